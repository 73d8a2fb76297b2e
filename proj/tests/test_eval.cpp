#include <catch2/catch_amalgamated.hpp>

#include "vtgforge/eval.hpp"
#include "vtgforge/rng.hpp"

using namespace vtgforge;
using namespace vtgforge::eval;

namespace {

// golds at [0,10]; a prediction [0, x] has IoU exactly x/10 for x <= 10
std::pair<std::vector<Prediction>, std::vector<GoldItem>> designed_items(
    const std::vector<double>& ious) {
    std::vector<Prediction> preds;
    std::vector<GoldItem> golds;
    for (std::size_t i = 0; i < ious.size(); ++i) {
        std::string id = "item" + std::to_string(i);
        golds.push_back({id, {0.0, 10.0}});
        if (ious[i] == 0.0) {
            preds.push_back({id, TimeInterval{11.0, 12.0}});
        } else {
            preds.push_back({id, TimeInterval{0.0, 10.0 * ious[i]}});
        }
    }
    return {std::move(preds), std::move(golds)};
}

}  // namespace

TEST_CASE("recall_at_iou counts inclusively at the threshold", "[eval]") {
    auto [preds, golds] = designed_items({1.0, 0.6, 0.5, 0.4});
    auto report = recall_at_iou(preds, golds);
    CHECK(report.n_items == 4);
    CHECK(report.recall.at(0.5) == 75.0);
    CHECK(report.recall.at(0.3) == 100.0);
    CHECK(report.recall.at(0.7) == 25.0);
}

TEST_CASE("recall_at_iou with perfect predictions is 100 everywhere", "[eval]") {
    auto [preds, golds] = designed_items({1.0, 1.0, 1.0});
    auto report = recall_at_iou(preds, golds);
    for (const auto& [theta, pct] : report.recall) CHECK(pct == 100.0);
}

TEST_CASE("recall_at_iou input validation", "[eval]") {
    CHECK_THROWS_AS(recall_at_iou({}, {}), std::invalid_argument);

    auto [preds, golds] = designed_items({0.5});
    auto duplicated = preds;
    duplicated.push_back(preds[0]);
    CHECK_THROWS_AS(recall_at_iou(duplicated, golds), std::invalid_argument);

    std::vector<Prediction> stray{{"ghost", TimeInterval{0, 1}}};
    CHECK_THROWS_AS(recall_at_iou(stray, golds), std::invalid_argument);
}

TEST_CASE("unparsed outputs and missing predictions count as misses", "[eval]") {
    std::vector<GoldItem> golds{{"a", {0, 10}}, {"b", {0, 10}}, {"c", {0, 10}}};
    std::vector<Prediction> preds{{"a", TimeInterval{0, 10}}, {"b", std::nullopt}};
    auto report = recall_at_iou(preds, golds);
    CHECK(report.n_items == 3);
    CHECK(report.recall.at(0.3) == 100.0 / 3.0);
}

TEST_CASE("recall is non-increasing in the threshold", "[eval]") {
    Rng rng(12);
    std::vector<Prediction> preds;
    std::vector<GoldItem> golds;
    for (int i = 0; i < 100; ++i) {
        std::string id = "i" + std::to_string(i);
        double gs = uniform_range(rng, 0.0, 50.0);
        double ge = gs + uniform_range(rng, 1.0, 30.0);
        golds.push_back({id, {gs, ge}});
        double shift = uniform_range(rng, -10.0, 10.0);
        preds.push_back({id, TimeInterval{std::max(0.0, gs + shift), ge + std::abs(shift)}});
    }
    auto report = recall_at_iou(preds, golds, {0.1, 0.3, 0.5, 0.7, 0.9});
    double last = 200.0;
    for (const auto& [theta, pct] : report.recall) {
        CHECK(pct <= last);
        last = pct;
    }
}

TEST_CASE("evaluate_splits partitions and reports empties", "[eval]") {
    vocab::FrequencyTable table;
    table.frequencies = {{"a", 0.1}, {"dog", 1e-4}, {"runs", 1e-4},
                         {"man", 1e-3}, {"walks", 1e-4}};

    // 10 items, 4 with captions containing absent (rare) words
    std::vector<Prediction> preds;
    std::vector<GoldItem> golds;
    std::vector<std::pair<std::string, MomentAnnotation>> annotations;
    for (int i = 0; i < 10; ++i) {
        std::string id = "q" + std::to_string(i);
        golds.push_back({id, {0.0, 10.0}});
        preds.push_back({id, TimeInterval{0.0, i < 5 ? 10.0 : 4.0}});
        MomentAnnotation ann;
        ann.video_id = "v1";
        ann.interval = {0.0, 10.0};
        ann.caption = i % 3 == 0 ? "a quokka walks" : "a dog runs";  // i = 0,3,6,9 rare
        annotations.emplace_back(id, ann);
    }
    auto reports = evaluate_splits(preds, golds, annotations, table);
    CHECK(reports.at(Split::Full).n_items == 10);
    CHECK(reports.at(Split::Rare).n_items == 4);
    CHECK(reports.at(Split::Common).n_items == 6);

    // item-weighted partition identity at every threshold
    for (double theta : {0.3, 0.5, 0.7}) {
        double full = reports.at(Split::Full).recall.at(theta);
        double rare = reports.at(Split::Rare).recall.at(theta);
        double common = reports.at(Split::Common).recall.at(theta);
        CHECK(std::abs(full - (4.0 * rare + 6.0 * common) / 10.0) < 1e-9);
    }

    // all-common corpus flags the rare split as empty
    vocab::FrequencyTable generous;
    generous.frequencies = {{"a", 0.1}, {"dog", 1e-4}, {"runs", 1e-4},
                            {"quokka", 1e-4}, {"walks", 1e-4}};
    auto no_rare = evaluate_splits(preds, golds, annotations, generous);
    CHECK(no_rare.at(Split::Rare).n_items == 0);
    CHECK(no_rare.at(Split::Rare).empty);
    CHECK(no_rare.at(Split::Full).n_items == 10);
}

TEST_CASE("dataset_stats over a tiny fixture", "[eval]") {
    std::vector<VideoRecord> videos{{"v1", 60.0, {}, {}}, {"v2", 60.0, {}, {}}};
    std::vector<MomentAnnotation> anns{
        {"v1", {10, 20}, "a dog runs very fast", {}, Provenance::Automated},     // 5 tokens
        {"v2", {30, 40}, "the quick fox jumps over it", {}, Provenance::Automated},  // 6 tokens
    };
    vocab::PosLexicon lexicon{{"dog", vocab::PosTag::Noun},
                              {"fox", vocab::PosTag::Noun},
                              {"runs", vocab::PosTag::Verb},
                              {"jumps", vocab::PosTag::Verb},
                              {"quick", vocab::PosTag::Adjective},
                              {"fast", vocab::PosTag::Adjective}};
    auto stats = dataset_stats(videos, anns, lexicon);
    CHECK(stats.total_duration_hours == 120.0 / 3600.0);
    CHECK(stats.duration_per_video_minutes == 1.0);
    CHECK(stats.duration_per_moment_seconds == 10.0);
    CHECK(stats.total_queries == 2);
    CHECK(stats.words_per_query == 5.5);
    CHECK(stats.unique_nouns == 2);
    CHECK(stats.unique_verbs == 2);
    CHECK(stats.unique_adjectives == 2);
    CHECK(stats.has_moments);
}

TEST_CASE("dataset_stats handles missing annotations and validates input", "[eval]") {
    std::vector<VideoRecord> videos{{"v1", 60.0, {}, {}}};
    auto stats = dataset_stats(videos, {}, {});
    CHECK_FALSE(stats.has_moments);
    CHECK(stats.duration_per_moment_seconds == 0.0);
    CHECK(stats.words_per_query == 0.0);
    CHECK(stats.total_queries == 0);
    CHECK(stats.total_duration_hours == 60.0 / 3600.0);

    CHECK_THROWS_AS(dataset_stats({}, {}, {}), std::invalid_argument);
}

TEST_CASE("dataset_stats POS counts are over unique surface forms", "[eval]") {
    std::vector<VideoRecord> videos{{"v1", 10.0, {}, {}}};
    std::vector<MomentAnnotation> anns{
        {"v1", {0, 1}, "dog dog dog", {}, Provenance::Automated},
        {"v1", {2, 3}, "dogs dog", {}, Provenance::Automated},
    };
    vocab::PosLexicon lexicon{{"dog", vocab::PosTag::Noun}, {"dogs", vocab::PosTag::Noun}};
    auto stats = dataset_stats(videos, anns, lexicon);
    CHECK(stats.unique_nouns == 2);  // "dog" and "dogs" count separately
    CHECK(stats.words_per_query == 2.5);
}

#include <catch2/catch_amalgamated.hpp>

#include <map>

#include "vtgforge/factory.hpp"
#include "vtgforge/io.hpp"

using namespace vtgforge;
using namespace vtgforge::factory;

namespace {

MomentAnnotation ann(const std::string& video, double s, double e, const std::string& caption) {
    return {video, {s, e}, caption, {}, Provenance::Automated};
}

// reference selection rule, written out independently of find_enclosing
std::optional<MomentAnnotation> brute_force_encloser(const MomentAnnotation& fine,
                                                     const std::vector<MomentAnnotation>& pool) {
    std::vector<MomentAnnotation> candidates;
    for (const auto& c : pool) {
        bool identical = c.interval == fine.interval && c.caption == fine.caption;
        bool encloses = c.interval.start <= fine.interval.start &&
                        fine.interval.end <= c.interval.end;
        bool longer = c.interval.length() > fine.interval.length();
        if (!identical && encloses && longer) candidates.push_back(c);
    }
    if (candidates.empty()) return std::nullopt;
    std::sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
        if (a.interval.length() != b.interval.length()) {
            return a.interval.length() < b.interval.length();
        }
        if (a.interval.start != b.interval.start) return a.interval.start < b.interval.start;
        return a.caption < b.caption;
    });
    return candidates.front();
}

std::vector<MomentAnnotation> random_video_annotations(Rng& rng, const std::string& video_id,
                                                       double duration, std::size_t count) {
    std::vector<MomentAnnotation> anns;
    for (std::size_t i = 0; i < count; ++i) {
        double a = uniform_range(rng, 0.0, duration);
        double b = uniform_range(rng, 0.0, duration);
        anns.push_back(ann(video_id, std::min(a, b), std::max(a, b),
                           "event " + std::to_string(i)));
    }
    return anns;
}

}  // namespace

TEST_CASE("grounding samples render the canonical answer", "[factory]") {
    auto a = ann("v1", 3.0, 7.5, "a dog jumps");
    auto sample = make_grounding_sample(a);
    CHECK(sample.task == TaskKind::Grounding);
    CHECK(sample.target.find("<3.0 to 7.5>") != std::string::npos);
    CHECK(sample.prompt.find("a dog jumps") != std::string::npos);
    CHECK(sample.meta.at("gold_start").get<double>() == 3.0);
    CHECK(sample.meta.at("gold_end").get<double>() == 7.5);

    auto b = ann("v1", 1.0, 2.0, "another event");
    CHECK(make_grounding_sample(b).target != sample.target);
}

TEST_CASE("caption samples carry the caption verbatim", "[factory]") {
    auto a = ann("v1", 3.0, 7.5, "a dog jumps over a fence");
    auto sample = make_caption_sample(a);
    CHECK(sample.target == a.caption);
    CHECK(sample.prompt.find("3.0") != std::string::npos);
    CHECK(sample.prompt.find("7.5") != std::string::npos);
}

TEST_CASE("matching samples label by IoU thresholds", "[factory]") {
    auto gold = ann("v1", 10, 20, "q");
    CHECK(make_matching_sample(gold, {10, 20}).target == "match");
    // IoU = 5/15 lands in the partial band
    CHECK(make_matching_sample(gold, {15, 25}).target == "partial match");
    CHECK(make_matching_sample(gold, {40, 50}).target == "mismatch");
}

TEST_CASE("matching labels always agree with an independent recomputation", "[factory]") {
    Rng rng(2024);
    auto gold = ann("v1", 30, 45, "q");
    for (int i = 0; i < 500; ++i) {
        double a = uniform_range(rng, 0.0, 100.0);
        double b = uniform_range(rng, 0.0, 100.0);
        TimeInterval probe{std::min(a, b), std::max(a, b)};
        auto sample = make_matching_sample(gold, probe);
        CHECK(sample.target == to_string(label_match(compute_iou(gold.interval, probe))));
    }
}

TEST_CASE("status samples name the three phases", "[factory]") {
    auto gold = ann("v1", 10, 20, "q");
    CHECK(make_status_sample(gold, 5).target == "Not Started");
    CHECK(make_status_sample(gold, 15).target == "In Progress");
    CHECK(make_status_sample(gold, 25).target == "Ended");
}

TEST_CASE("find_enclosing picks the tightest encloser", "[factory]") {
    auto fine = ann("v1", 5, 8, "b");
    std::vector<MomentAnnotation> pool{ann("v1", 0, 10, "wide"), ann("v1", 6, 9, "offset")};
    auto hit = find_enclosing(fine, pool);
    REQUIRE(hit.has_value());
    CHECK(hit->interval == TimeInterval{0, 10});  // [6,9] does not enclose

    CHECK_FALSE(find_enclosing(ann("v1", 0, 10, "b"), {ann("v1", 2, 8, "inner")}).has_value());

    auto two = find_enclosing(ann("v1", 3, 8, "b"),
                              {ann("v1", 0, 10, "outer"), ann("v1", 2, 9, "tight")});
    REQUIRE(two.has_value());
    CHECK(two->interval == TimeInterval{2, 9});
}

TEST_CASE("find_enclosing skips records identical to the fine event", "[factory]") {
    auto fine = ann("v1", 5, 8, "b");
    CHECK_FALSE(find_enclosing(fine, {fine}).has_value());
    // same interval under a different caption is still excluded: not longer
    CHECK_FALSE(find_enclosing(fine, {ann("v1", 5, 8, "other")}).has_value());
}

TEST_CASE("find_enclosing ties break by start then caption", "[factory]") {
    auto fine = ann("v1", 5, 8, "b");
    auto same_len_early = ann("v1", 3, 9, "later-name");
    auto same_len_late = ann("v1", 4, 10, "early-name");
    auto pick = find_enclosing(fine, {same_len_late, same_len_early});
    REQUIRE(pick.has_value());
    CHECK(pick->interval.start == 3.0);  // earlier start wins the length tie

    auto cap_a = ann("v1", 3, 9, "alpha");
    auto cap_b = ann("v1", 3, 9, "beta");
    auto by_caption = find_enclosing(fine, {cap_b, cap_a});
    REQUIRE(by_caption.has_value());
    CHECK(by_caption->caption == "alpha");
}

TEST_CASE("content-aware pairs always satisfy the enclosure invariant", "[factory]") {
    std::vector<MomentAnnotation> anns{
        ann("v1", 0, 30, "whole scene"), ann("v1", 5, 12, "first nested"),
        ann("v1", 6, 10, "deeper nested"), ann("v1", 40, 50, "disjoint"),
        ann("v2", 0, 5, "other video")};
    auto pairs = build_cot_content_aware(anns);
    for (const auto& p : pairs) {
        CHECK(p.valid());
        CHECK(p.variant == CotVariant::ContentAware);
    }
    // disjoint and cross-video events never pair
    for (const auto& p : pairs) {
        CHECK(p.fine.caption != "whole scene");
        CHECK(p.fine.video_id == p.coarse.video_id);
    }
}

TEST_CASE("content-aware construction equals brute force on random videos", "[factory]") {
    Rng rng(77);
    for (int trial = 0; trial < 30; ++trial) {
        auto anns = random_video_annotations(rng, "v" + std::to_string(trial), 100.0,
                                             1 + uniform_below(rng, 20));
        auto pairs = build_cot_content_aware(anns);
        std::size_t expected = 0;
        std::size_t index = 0;
        for (const auto& fine : anns) {
            auto oracle = brute_force_encloser(fine, anns);
            if (!oracle) continue;
            REQUIRE(index < pairs.size());
            CHECK(pairs[index].fine == fine);
            CHECK(pairs[index].coarse == *oracle);
            ++index;
            ++expected;
        }
        CHECK(pairs.size() == expected);
    }
}

TEST_CASE("disjoint-only videos produce no pairs", "[factory]") {
    std::vector<MomentAnnotation> anns{ann("v1", 0, 5, "a"), ann("v1", 6, 10, "b"),
                                       ann("v1", 11, 20, "c")};
    CHECK(build_cot_content_aware(anns).empty());
}

TEST_CASE("rule-based pairs strictly enclose and stay in bounds", "[factory]") {
    VideoRecord video{"v1", 100.0, {}, {}};
    Rng seeds(11);
    for (int i = 0; i < 300; ++i) {
        double s = uniform_range(seeds, 0.0, 90.0);
        double e = s + uniform_range(seeds, 0.5, 100.0 - s);
        auto fine = ann("v1", s, e, "event");
        auto pair = build_cot_rule_based(fine, video, seeds());
        REQUIRE(pair.has_value());
        CHECK(pair->valid());
        CHECK(pair->coarse.interval.start >= 0.0);
        CHECK(pair->coarse.interval.end <= video.duration);
        CHECK(pair->variant == CotVariant::RuleBased);
        CHECK(pair->coarse.caption == fine.caption);
    }
}

TEST_CASE("rule-based skips full-video annotations", "[factory]") {
    VideoRecord video{"v1", 100.0, {}, {}};
    CHECK_FALSE(build_cot_rule_based(ann("v1", 0, 100, "everything"), video, 1).has_value());
}

TEST_CASE("rule-based widens boundary-pinned annotations by the fallback", "[factory]") {
    VideoRecord video{"v1", 100.0, {}, {}};
    // degenerate moment: the proportional extension is zero on both sides
    auto pinned = build_cot_rule_based(ann("v1", 50, 50, "instant"), video, 3);
    REQUIRE(pinned.has_value());
    CHECK(pinned->valid());
    CHECK(pinned->coarse.interval.length() == 0.5);
}

TEST_CASE("rule-based is deterministic under the seed", "[factory]") {
    VideoRecord video{"v1", 100.0, {}, {}};
    auto fine = ann("v1", 10, 20, "event");
    auto a = build_cot_rule_based(fine, video, 99);
    auto b = build_cot_rule_based(fine, video, 99);
    REQUIRE(a.has_value());
    REQUIRE(b.has_value());
    CHECK(a->coarse.interval == b->coarse.interval);
    auto c = build_cot_rule_based(fine, video, 100);
    REQUIRE(c.has_value());
    CHECK(c->coarse.interval != a->coarse.interval);
}

TEST_CASE("render_cot_text follows the zoom-in template", "[factory]") {
    CotPair pair{ann("v1", 0, 10, "people in a bridal shop"),
                 ann("v1", 5, 8, "bride tries a strapless gown"), CotVariant::ContentAware};
    auto sample = render_cot_text(pair);
    CHECK(sample.task == TaskKind::SelfCorrectionCot);
    CHECK(sample.target.find("Zooming in further") != std::string::npos);
    CHECK(sample.target.find("I find that people in a bridal shop from 0.0 to 10.0.") !=
          std::string::npos);
    CHECK(sample.target.find("the event bride tries a strapless gown occurs from 5.0 to 8.0.") !=
          std::string::npos);
    // the answer carries the fine interval, never the coarse one
    CHECK(sample.target.find("<answer><5.0 to 8.0></answer>") != std::string::npos);
    CHECK(sample.target.find("<answer><0.0 to 10.0>") == std::string::npos);
    CHECK(sample.meta.at("gold_start").get<double>() == 5.0);

    CotPair bogus{ann("v1", 6, 8, "not enclosing"), ann("v1", 5, 9, "fine"),
                  CotVariant::ContentAware};
    CHECK_THROWS_AS(render_cot_text(bogus), std::invalid_argument);
}

TEST_CASE("select_hard_indices keeps the band around the target mean", "[factory]") {
    auto sel = select_hard_indices({0.1, 0.3, 0.35, 0.9}, 2);
    CHECK(sel.indices == std::vector<std::size_t>{1, 2});
    CHECK(sel.achieved_mean == (0.3 + 0.35) / 2.0);

    auto expanded = select_hard_indices({1.0, 1.0, 1.0}, 1);
    CHECK(expanded.indices.size() == 1);
    CHECK(expanded.achieved_mean == 1.0);
    CHECK(expanded.final_band > 0.15);

    CHECK_THROWS_AS(select_hard_indices({}, 1), std::invalid_argument);
}

TEST_CASE("select_hard_indices expansion stops once the request fills", "[factory]") {
    // 0.3 is inside the initial band; 0.8 needs two expansions
    auto sel = select_hard_indices({0.3, 0.8, 0.0}, 2);
    CHECK(sel.indices == std::vector<std::size_t>{0, 2});  // 0.0 (dist .3) beats 0.8 (dist .5)
}

TEST_CASE("build_sft_samples balances classes and is deterministic", "[factory]") {
    std::map<std::string, VideoRecord> videos{{"v1", {"v1", 100.0, {}, {}}},
                                              {"v2", {"v2", 60.0, {}, {}}}};
    std::vector<MomentAnnotation> anns{ann("v1", 10, 20, "first event"),
                                       ann("v1", 40, 70, "second event"),
                                       ann("v2", 5, 12, "third event")};
    auto samples = factory::build_sft_samples(anns, videos, 42);
    auto again = factory::build_sft_samples(anns, videos, 42);
    REQUIRE(samples.size() == again.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        CHECK(io::sample_to_json(samples[i]).dump() == io::sample_to_json(again[i]).dump());
    }

    // per annotation: one grounding, one captioning, and per-class counts
    // within one of each other
    std::map<std::string, std::map<TaskKind, int>> per_annotation;
    for (const auto& s : samples) {
        std::string key = s.sample_id.substr(0, s.sample_id.rfind(':'));
        per_annotation[key][s.task]++;
    }
    CHECK(per_annotation.size() == anns.size());
    for (const auto& [key, counts] : per_annotation) {
        CHECK(counts.at(TaskKind::Grounding) == 1);
        CHECK(counts.at(TaskKind::EventCaptioning) == 1);
        CHECK(counts.at(TaskKind::QueryClipMatching) <= 3);
        CHECK(counts.at(TaskKind::EventStatusClassification) <= 3);
    }

    // matching/status class counts per annotation differ by at most one
    std::map<std::string, std::map<std::string, int>> class_counts;
    for (const auto& s : samples) {
        auto pos = s.sample_id.rfind(':');
        std::string code = s.sample_id.substr(pos + 1);
        std::string key = s.sample_id.substr(0, pos);
        if (code.rfind("match-", 0) == 0 || code.rfind("status-", 0) == 0) {
            class_counts[key][code]++;
        }
    }
    for (const auto& [key, counts] : class_counts) {
        for (const auto& [code, n] : counts) CHECK(n == 1);
    }

    auto other_seed = factory::build_sft_samples(anns, videos, 43);
    bool any_difference = false;
    for (std::size_t i = 0; i < std::min(samples.size(), other_seed.size()); ++i) {
        if (io::sample_to_json(samples[i]).dump() != io::sample_to_json(other_seed[i]).dump()) {
            any_difference = true;
        }
    }
    CHECK(any_difference);

    CHECK_THROWS_AS(factory::build_sft_samples({ann("ghost", 0, 1, "x")}, videos, 1),
                    std::invalid_argument);
}

TEST_CASE("build_cot_samples emits both variants deterministically", "[factory]") {
    std::map<std::string, VideoRecord> videos{{"v1", {"v1", 100.0, {}, {}}}};
    std::vector<MomentAnnotation> anns{ann("v1", 0, 30, "outer scene"),
                                       ann("v1", 5, 12, "inner event")};
    auto content = factory::build_cot_samples(anns, videos, CotVariant::ContentAware, 1);
    REQUIRE(content.size() == 1);
    CHECK(content[0].meta.at("variant") == "content_aware");
    CHECK(content[0].meta.at("coarse_start").get<double>() == 0.0);

    auto rule_a = factory::build_cot_samples(anns, videos, CotVariant::RuleBased, 5);
    auto rule_b = factory::build_cot_samples(anns, videos, CotVariant::RuleBased, 5);
    REQUIRE(rule_a.size() == 2);
    for (std::size_t i = 0; i < rule_a.size(); ++i) {
        CHECK(io::sample_to_json(rule_a[i]).dump() == io::sample_to_json(rule_b[i]).dump());
    }
}

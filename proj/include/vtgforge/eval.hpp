#pragma once

// Evaluation engine: Recall@1 at IoU thresholds over full / rare / common
// splits, and the dataset-level statistics table (durations, query
// counts, per-POS unique vocabulary).

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "vtgforge/core.hpp"
#include "vtgforge/vocab.hpp"

namespace vtgforge::eval {

enum class Split { Full, Rare, Common };

inline const char* to_string(Split s) {
    switch (s) {
        case Split::Full: return "full";
        case Split::Rare: return "rare";
        case Split::Common: return "common";
    }
    return "";
}

// One prediction per item; a nullopt interval means the model output
// failed parsing and scores IoU 0.
struct Prediction {
    std::string item_id;
    std::optional<TimeInterval> interval;
};

struct GoldItem {
    std::string item_id;
    TimeInterval interval;
};

inline const std::vector<double> kDefaultThresholds{0.3, 0.5, 0.7};

struct EvalReport {
    Split split = Split::Full;
    std::size_t n_items = 0;
    bool empty = false;                 // split had no items; recalls meaningless
    std::map<double, double> recall;    // threshold -> percentage, inclusive comparison
};

// R1@theta: percentage of items whose single prediction reaches IoU >=
// theta against the gold. Golds without a prediction count as misses.
inline EvalReport recall_at_iou(const std::vector<Prediction>& predictions,
                                const std::vector<GoldItem>& golds,
                                const std::vector<double>& thresholds = kDefaultThresholds,
                                Split split = Split::Full) {
    if (golds.empty()) {
        throw std::invalid_argument("recall_at_iou: empty item set");
    }
    std::map<std::string, const GoldItem*> gold_by_id;
    for (const auto& g : golds) {
        if (!gold_by_id.emplace(g.item_id, &g).second) {
            throw std::invalid_argument("recall_at_iou: duplicate gold item " + g.item_id);
        }
    }
    std::set<std::string> seen;
    std::vector<double> ious;
    std::map<std::string, double> iou_by_id;
    for (const auto& p : predictions) {
        if (!gold_by_id.count(p.item_id)) {
            throw std::invalid_argument("recall_at_iou: prediction without gold: " + p.item_id);
        }
        if (!seen.insert(p.item_id).second) {
            throw std::invalid_argument("recall_at_iou: duplicate prediction " + p.item_id);
        }
        double iou =
            p.interval ? compute_iou(*p.interval, gold_by_id.at(p.item_id)->interval) : 0.0;
        iou_by_id[p.item_id] = iou;
    }
    for (const auto& g : golds) {
        auto it = iou_by_id.find(g.item_id);
        ious.push_back(it == iou_by_id.end() ? 0.0 : it->second);
    }

    EvalReport report;
    report.split = split;
    report.n_items = golds.size();
    for (double theta : thresholds) {
        std::size_t hit = 0;
        for (double iou : ious) {
            if (iou >= theta) ++hit;
        }
        report.recall[theta] =
            100.0 * static_cast<double>(hit) / static_cast<double>(golds.size());
    }
    return report;
}

// Evaluates the full set plus the rare/common partition induced by the
// caption frequency split. Annotations align with golds by item_id.
inline std::map<Split, EvalReport> evaluate_splits(
    const std::vector<Prediction>& predictions, const std::vector<GoldItem>& golds,
    const std::vector<std::pair<std::string, MomentAnnotation>>& annotations,
    const vocab::FrequencyTable& table,
    const std::vector<double>& thresholds = kDefaultThresholds) {
    std::map<std::string, const MomentAnnotation*> ann_by_id;
    for (const auto& [id, ann] : annotations) ann_by_id[id] = &ann;
    for (const auto& g : golds) {
        if (!ann_by_id.count(g.item_id)) {
            throw std::invalid_argument("evaluate_splits: gold without annotation: " + g.item_id);
        }
    }

    std::set<std::string> rare_ids;
    for (const auto& [id, ann] : annotations) {
        auto [rare, common] = vocab::split_rare_queries({ann}, table);
        if (!rare.empty()) rare_ids.insert(id);
    }

    auto subset = [&](Split split) {
        std::vector<GoldItem> sub_golds;
        std::set<std::string> ids;
        for (const auto& g : golds) {
            bool is_rare = rare_ids.count(g.item_id) > 0;
            if (split == Split::Full || (split == Split::Rare) == is_rare) {
                sub_golds.push_back(g);
                ids.insert(g.item_id);
            }
        }
        std::vector<Prediction> sub_preds;
        for (const auto& p : predictions) {
            if (ids.count(p.item_id)) sub_preds.push_back(p);
        }
        return std::make_pair(std::move(sub_preds), std::move(sub_golds));
    };

    std::map<Split, EvalReport> reports;
    for (Split split : {Split::Full, Split::Rare, Split::Common}) {
        auto [sub_preds, sub_golds] = subset(split);
        if (sub_golds.empty()) {
            EvalReport empty_report;
            empty_report.split = split;
            empty_report.empty = true;
            for (double theta : thresholds) empty_report.recall[theta] = 0.0;
            reports[split] = std::move(empty_report);
            continue;
        }
        reports[split] = recall_at_iou(sub_preds, sub_golds, thresholds, split);
    }
    return reports;
}

struct DatasetStats {
    double total_duration_hours = 0.0;
    double duration_per_video_minutes = 0.0;
    double duration_per_moment_seconds = 0.0;
    std::size_t total_queries = 0;
    double words_per_query = 0.0;
    std::size_t unique_nouns = 0;
    std::size_t unique_verbs = 0;
    std::size_t unique_adjectives = 0;
    bool has_moments = false;  // moment/query means are 0 when false
};

// Aggregates the statistics-table columns over a dataset. Unique POS
// counts cover all caption token types, tagged through the lexicon.
inline DatasetStats dataset_stats(const std::vector<VideoRecord>& videos,
                                  const std::vector<MomentAnnotation>& annotations,
                                  const vocab::PosLexicon& pos_lexicon) {
    if (videos.empty()) {
        throw std::invalid_argument("dataset_stats: no videos");
    }
    DatasetStats stats;
    double total_seconds = 0.0;
    for (const auto& v : videos) total_seconds += v.duration;
    stats.total_duration_hours = total_seconds / 3600.0;
    stats.duration_per_video_minutes =
        total_seconds / static_cast<double>(videos.size()) / 60.0;

    stats.total_queries = annotations.size();
    stats.has_moments = !annotations.empty();
    if (!stats.has_moments) return stats;

    double moment_seconds = 0.0;
    std::size_t token_total = 0;
    std::set<std::string> nouns;
    std::set<std::string> verbs;
    std::set<std::string> adjectives;
    for (const auto& ann : annotations) {
        moment_seconds += ann.interval.length();
        for (const auto& [token, count] : vocab::tokenize_query(ann.caption)) {
            token_total += count;
            auto it = pos_lexicon.find(token);
            if (it == pos_lexicon.end()) continue;
            switch (it->second) {
                case vocab::PosTag::Noun: nouns.insert(token); break;
                case vocab::PosTag::Verb: verbs.insert(token); break;
                case vocab::PosTag::Adjective: adjectives.insert(token); break;
                case vocab::PosTag::Other: break;
            }
        }
    }
    stats.duration_per_moment_seconds =
        moment_seconds / static_cast<double>(annotations.size());
    stats.words_per_query =
        static_cast<double>(token_total) / static_cast<double>(annotations.size());
    stats.unique_nouns = nouns.size();
    stats.unique_verbs = verbs.size();
    stats.unique_adjectives = adjectives.size();
    return stats;
}

}  // namespace vtgforge::eval

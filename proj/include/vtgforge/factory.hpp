#pragma once

// Training-data factory: the four SFT task samples, self-correction CoT
// pair construction (content-aware and rule-based variants), and
// hard-example selection for the RL stage. Output ordering is
// (video_id, annotation index, task), so runs are byte-reproducible.

#include <algorithm>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vtgforge/core.hpp"
#include "vtgforge/prompts.hpp"
#include "vtgforge/reward.hpp"
#include "vtgforge/rng.hpp"
#include "vtgforge/text.hpp"

namespace vtgforge::factory {

enum class TaskKind {
    Grounding,
    EventCaptioning,
    QueryClipMatching,
    EventStatusClassification,
    SelfCorrectionCot,
};

inline const char* to_string(TaskKind t) {
    switch (t) {
        case TaskKind::Grounding: return "grounding";
        case TaskKind::EventCaptioning: return "event_captioning";
        case TaskKind::QueryClipMatching: return "query_clip_matching";
        case TaskKind::EventStatusClassification: return "event_status_classification";
        case TaskKind::SelfCorrectionCot: return "self_correction_cot";
    }
    return "";
}

struct TrainingSample {
    TaskKind task = TaskKind::Grounding;
    std::string sample_id;
    std::string video_id;
    std::string prompt;
    std::string target;
    nlohmann::json meta = nlohmann::json::object();
};

enum class CotVariant { ContentAware, RuleBased };

inline const char* to_string(CotVariant v) {
    return v == CotVariant::ContentAware ? "content_aware" : "rule_based";
}

// A coarse event A strictly enclosing a fine event B in the same video:
// t_s^A <= t_s^B, t_e^B <= t_e^A, with A strictly longer.
struct CotPair {
    MomentAnnotation coarse;
    MomentAnnotation fine;
    CotVariant variant = CotVariant::ContentAware;

    bool valid() const {
        return coarse.video_id == fine.video_id &&
               coarse.interval.start <= fine.interval.start &&
               fine.interval.end <= coarse.interval.end &&
               coarse.interval.length() > fine.interval.length();
    }
};

inline TrainingSample make_grounding_sample(const MomentAnnotation& ann,
                                            const prompts::PromptTemplates& templates = {}) {
    TrainingSample sample;
    sample.task = TaskKind::Grounding;
    sample.video_id = ann.video_id;
    sample.prompt = render_template(templates.grounding, {{"caption", ann.caption}});
    sample.target = reward::render_answer_block(ann.interval);
    sample.meta["gold_start"] = ann.interval.start;
    sample.meta["gold_end"] = ann.interval.end;
    return sample;
}

inline TrainingSample make_caption_sample(const MomentAnnotation& ann,
                                          const prompts::PromptTemplates& templates = {}) {
    TrainingSample sample;
    sample.task = TaskKind::EventCaptioning;
    sample.video_id = ann.video_id;
    sample.prompt = render_template(templates.captioning,
                                    {{"start", format_seconds(ann.interval.start)},
                                     {"end", format_seconds(ann.interval.end)}});
    sample.target = ann.caption;
    sample.meta["start"] = ann.interval.start;
    sample.meta["end"] = ann.interval.end;
    return sample;
}

inline TrainingSample make_matching_sample(const MomentAnnotation& ann, const TimeInterval& probe,
                                           const prompts::PromptTemplates& templates = {}) {
    double iou = compute_iou(ann.interval, probe);
    MatchLabel label = label_match(iou);
    TrainingSample sample;
    sample.task = TaskKind::QueryClipMatching;
    sample.video_id = ann.video_id;
    sample.prompt = render_template(templates.matching,
                                    {{"caption", ann.caption},
                                     {"start", format_seconds(probe.start)},
                                     {"end", format_seconds(probe.end)}});
    sample.target = to_string(label);
    sample.meta["gold_start"] = ann.interval.start;
    sample.meta["gold_end"] = ann.interval.end;
    sample.meta["probe_start"] = probe.start;
    sample.meta["probe_end"] = probe.end;
    sample.meta["iou"] = iou;
    return sample;
}

inline TrainingSample make_status_sample(const MomentAnnotation& ann, double t,
                                         const prompts::PromptTemplates& templates = {}) {
    EventStatus status = event_status(t, ann.interval);
    TrainingSample sample;
    sample.task = TaskKind::EventStatusClassification;
    sample.video_id = ann.video_id;
    sample.prompt = render_template(
        templates.status, {{"caption", ann.caption}, {"t", format_seconds(t)}});
    sample.target = to_string(status);
    sample.meta["gold_start"] = ann.interval.start;
    sample.meta["gold_end"] = ann.interval.end;
    sample.meta["t"] = t;
    return sample;
}

// Among pool members strictly enclosing `fine` (excluding records
// identical to it), returns the one of minimal duration; ties break by
// earlier start, then lexicographic caption.
inline std::optional<MomentAnnotation> find_enclosing(const MomentAnnotation& fine,
                                                      const std::vector<MomentAnnotation>& pool) {
    const MomentAnnotation* best = nullptr;
    for (const auto& cand : pool) {
        if (cand.interval == fine.interval && cand.caption == fine.caption) continue;
        if (!(cand.interval.start <= fine.interval.start &&
              fine.interval.end <= cand.interval.end)) {
            continue;
        }
        if (!(cand.interval.length() > fine.interval.length())) continue;
        if (!best) {
            best = &cand;
            continue;
        }
        auto key = [](const MomentAnnotation& a) {
            return std::make_tuple(a.interval.length(), a.interval.start, a.caption);
        };
        if (key(cand) < key(*best)) best = &cand;
    }
    if (!best) return std::nullopt;
    return *best;
}

// Emits one pair per annotation that has an enclosing event in the same
// video. Output follows the input order of the fine annotations.
inline std::vector<CotPair> build_cot_content_aware(
    const std::vector<MomentAnnotation>& annotations) {
    std::map<std::string, std::vector<MomentAnnotation>> by_video;
    for (const auto& ann : annotations) by_video[ann.video_id].push_back(ann);

    std::vector<CotPair> pairs;
    for (const auto& ann : annotations) {
        auto coarse = find_enclosing(ann, by_video[ann.video_id]);
        if (!coarse) continue;
        pairs.push_back({std::move(*coarse), ann, CotVariant::ContentAware});
    }
    return pairs;
}

// Synthesizes a coarse guess by shifting the gold boundaries outward by
// independent uniform amounts in [5%, 30%] of the moment duration,
// clamped to the video. If clamping removes the extension on both sides,
// widens by 0.5 s on a side with room; returns nullopt when the
// annotation already spans the whole video (nothing to widen).
inline std::optional<CotPair> build_cot_rule_based(const MomentAnnotation& ann,
                                                   const VideoRecord& video,
                                                   std::uint64_t seed) {
    Rng rng(seed);
    double moment = ann.interval.length();
    double left = uniform_range(rng, 0.05, 0.30) * moment;
    double right = uniform_range(rng, 0.05, 0.30) * moment;
    double coarse_start = std::max(0.0, ann.interval.start - left);
    double coarse_end = std::min(video.duration, ann.interval.end + right);

    if (coarse_start == ann.interval.start && coarse_end == ann.interval.end) {
        if (ann.interval.start > 0.0) {
            coarse_start = std::max(0.0, ann.interval.start - 0.5);
        } else if (ann.interval.end < video.duration) {
            coarse_end = std::min(video.duration, ann.interval.end + 0.5);
        } else {
            return std::nullopt;
        }
    }

    MomentAnnotation coarse = ann;
    coarse.interval = TimeInterval{coarse_start, coarse_end};
    return CotPair{std::move(coarse), ann, CotVariant::RuleBased};
}

// Renders a pair into the self-correction reasoning sample: the think
// block states the coarse event, then zooms in to the fine one; the
// answer block carries the fine interval.
inline TrainingSample render_cot_text(const CotPair& pair,
                                      const prompts::PromptTemplates& templates = {}) {
    if (!pair.valid()) {
        throw std::invalid_argument("render_cot_text: pair violates the enclosure invariant");
    }
    std::string think = "I find that " + pair.coarse.caption + " from " +
                        format_seconds(pair.coarse.interval.start) + " to " +
                        format_seconds(pair.coarse.interval.end) +
                        ". Zooming in further, the event " + pair.fine.caption + " occurs from " +
                        format_seconds(pair.fine.interval.start) + " to " +
                        format_seconds(pair.fine.interval.end) + ".";

    TrainingSample sample;
    sample.task = TaskKind::SelfCorrectionCot;
    sample.video_id = pair.fine.video_id;
    sample.prompt = render_template(templates.cot, {{"caption", pair.fine.caption}});
    sample.target = reward::render_output(think, pair.fine.interval);
    sample.meta["gold_start"] = pair.fine.interval.start;
    sample.meta["gold_end"] = pair.fine.interval.end;
    sample.meta["coarse_start"] = pair.coarse.interval.start;
    sample.meta["coarse_end"] = pair.coarse.interval.end;
    sample.meta["variant"] = to_string(pair.variant);
    return sample;
}

struct HardSelection {
    std::vector<std::size_t> indices;  // ascending input positions
    double achieved_mean = 0.0;
    double final_band = 0.0;
};

// Picks up to `count` items whose baseline IoU lies in
// [target_mean - band, target_mean + band], closest to the target first.
// An under-filled band grows symmetrically in 0.05 steps until the
// request is filled or every item is inside.
inline HardSelection select_hard_indices(const std::vector<double>& baseline_ious,
                                         std::size_t count, double target_mean = 0.3,
                                         double band = 0.15) {
    if (baseline_ious.empty()) {
        throw std::invalid_argument("select_hard_indices: empty input");
    }
    constexpr double kEps = 1e-9;
    std::vector<std::size_t> order(baseline_ious.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    auto dist = [&](std::size_t i) { return std::abs(baseline_ious[i] - target_mean); };
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return dist(a) < dist(b); });

    double max_dist = dist(order.back());
    double b = band;
    auto in_band_count = [&](double width) {
        std::size_t n = 0;
        while (n < order.size() && dist(order[n]) <= width + kEps) ++n;
        return n;
    };
    std::size_t available = in_band_count(b);
    while (available < count && b + kEps < max_dist) {
        b += 0.05;
        available = in_band_count(b);
    }

    HardSelection selection;
    selection.final_band = b;
    std::size_t take = std::min(count, available);
    selection.indices.assign(order.begin(), order.begin() + take);
    std::sort(selection.indices.begin(), selection.indices.end());
    if (take > 0) {
        double sum = 0.0;
        for (std::size_t i : selection.indices) sum += baseline_ious[i];
        selection.achieved_mean = sum / static_cast<double>(take);
    }
    return selection;
}

namespace detail {

inline std::string pad_index(std::size_t i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04zu", i);
    return buf;
}

// Rejection-samples one probe interval per match class from the uniform
// proposal over [0, duration]^2; a class that 100 draws cannot hit is
// skipped.
inline void append_matching_samples(std::vector<TrainingSample>& out,
                                    const MomentAnnotation& ann, double duration, Rng& rng,
                                    const std::string& id_prefix,
                                    const prompts::PromptTemplates& templates) {
    struct ClassSpec {
        MatchLabel label;
        const char* code;
    };
    static constexpr ClassSpec kClasses[] = {{MatchLabel::Match, "match"},
                                             {MatchLabel::PartialMatch, "partial"},
                                             {MatchLabel::Mismatch, "mismatch"}};
    for (const auto& cls : kClasses) {
        for (int attempt = 0; attempt < 100; ++attempt) {
            double a = uniform_range(rng, 0.0, duration);
            double b = uniform_range(rng, 0.0, duration);
            TimeInterval probe{std::min(a, b), std::max(a, b)};
            if (label_match(compute_iou(ann.interval, probe)) != cls.label) continue;
            auto sample = make_matching_sample(ann, probe, templates);
            sample.sample_id = id_prefix + ":match-" + cls.code;
            out.push_back(std::move(sample));
            break;
        }
    }
}

inline void append_status_samples(std::vector<TrainingSample>& out, const MomentAnnotation& ann,
                                  double duration, Rng& rng, const std::string& id_prefix,
                                  const prompts::PromptTemplates& templates) {
    struct ClassSpec {
        EventStatus status;
        const char* code;
    };
    static constexpr ClassSpec kClasses[] = {{EventStatus::NotStarted, "notstarted"},
                                             {EventStatus::InProgress, "inprogress"},
                                             {EventStatus::Ended, "ended"}};
    for (const auto& cls : kClasses) {
        for (int attempt = 0; attempt < 100; ++attempt) {
            double t = uniform_range(rng, 0.0, duration);
            if (event_status(t, ann.interval) != cls.status) continue;
            auto sample = make_status_sample(ann, t, templates);
            sample.sample_id = id_prefix + ":status-" + cls.code;
            out.push_back(std::move(sample));
            break;
        }
    }
}

}  // namespace detail

// Builds the full multi-task SFT set: per annotation one grounding and
// one captioning sample plus class-balanced matching and status probes.
// Videos are visited in id order and each annotation's probes use an
// isolated rng stream, so identical inputs and seed give identical
// output.
inline std::vector<TrainingSample> build_sft_samples(
    const std::vector<MomentAnnotation>& annotations,
    const std::map<std::string, VideoRecord>& videos, std::uint64_t seed,
    const prompts::PromptTemplates& templates = {}) {
    std::map<std::string, std::vector<MomentAnnotation>> by_video;
    for (const auto& ann : annotations) {
        if (!videos.count(ann.video_id)) {
            throw std::invalid_argument("build_sft_samples: unknown video " + ann.video_id);
        }
        by_video[ann.video_id].push_back(ann);
    }

    std::vector<TrainingSample> out;
    for (const auto& [video_id, group] : by_video) {
        double duration = videos.at(video_id).duration;
        for (std::size_t i = 0; i < group.size(); ++i) {
            const auto& ann = group[i];
            std::string prefix = video_id + ":" + detail::pad_index(i);
            Rng rng(mix_seed(mix_seed(seed, fnv1a64(video_id)), i));

            auto grounding = make_grounding_sample(ann, templates);
            grounding.sample_id = prefix + ":ground";
            out.push_back(std::move(grounding));

            auto captioning = make_caption_sample(ann, templates);
            captioning.sample_id = prefix + ":capt";
            out.push_back(std::move(captioning));

            detail::append_matching_samples(out, ann, duration, rng, prefix, templates);
            detail::append_status_samples(out, ann, duration, rng, prefix, templates);
        }
    }
    return out;
}

// Builds rendered CoT samples for either variant. The rule-based variant
// derives one rng stream per annotation from the global seed.
inline std::vector<TrainingSample> build_cot_samples(
    const std::vector<MomentAnnotation>& annotations,
    const std::map<std::string, VideoRecord>& videos, CotVariant variant, std::uint64_t seed,
    const prompts::PromptTemplates& templates = {}) {
    std::vector<TrainingSample> out;
    if (variant == CotVariant::ContentAware) {
        std::map<std::string, std::size_t> counters;
        for (const auto& pair : build_cot_content_aware(annotations)) {
            auto sample = render_cot_text(pair, templates);
            sample.sample_id = pair.fine.video_id + ":" +
                               detail::pad_index(counters[pair.fine.video_id]++) +
                               ":cot-content";
            out.push_back(std::move(sample));
        }
        return out;
    }

    std::map<std::string, std::vector<MomentAnnotation>> by_video;
    for (const auto& ann : annotations) {
        if (!videos.count(ann.video_id)) {
            throw std::invalid_argument("build_cot_samples: unknown video " + ann.video_id);
        }
        by_video[ann.video_id].push_back(ann);
    }
    for (const auto& [video_id, group] : by_video) {
        const auto& video = videos.at(video_id);
        for (std::size_t i = 0; i < group.size(); ++i) {
            auto pair = build_cot_rule_based(group[i],
                                             video,
                                             mix_seed(mix_seed(seed, fnv1a64(video_id)), i));
            if (!pair) continue;  // spans the whole video; nothing to widen
            auto sample = render_cot_text(*pair, templates);
            sample.sample_id = video_id + ":" + detail::pad_index(i) + ":cot-rule";
            out.push_back(std::move(sample));
        }
    }
    return out;
}

}  // namespace vtgforge::factory

#pragma once

// Caption-centric annotation engine: renders the dense-caption prompt
// with target-word steering, parses timestamped caption lines into
// moment annotations, validates them, and measures agreement between
// automated and human-corrected annotations.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "vtgforge/core.hpp"
#include "vtgforge/prompts.hpp"
#include "vtgforge/text.hpp"
#include "vtgforge/vocab.hpp"

namespace vtgforge::annotate {

struct CaptionPromptSpec {
    std::string video_id;
    double duration = 0.0;  // seconds, > 0
    std::vector<std::string> target_words;
};

struct RawCaptionLine {
    std::string start_text;
    std::string end_text;
    std::string caption;
    std::size_t line_number = 0;  // 1-based over non-empty lines' positions
};

enum class RejectReason {
    GrammarMismatch,
    InvertedInterval,
    ZeroLengthAfterClamp,
    OutOfBounds,
    EmptyCaption,
    Duplicate,
};

inline const char* to_string(RejectReason r) {
    switch (r) {
        case RejectReason::GrammarMismatch: return "GrammarMismatch";
        case RejectReason::InvertedInterval: return "InvertedInterval";
        case RejectReason::ZeroLengthAfterClamp: return "ZeroLengthAfterClamp";
        case RejectReason::OutOfBounds: return "OutOfBounds";
        case RejectReason::EmptyCaption: return "EmptyCaption";
        case RejectReason::Duplicate: return "Duplicate";
    }
    return "";
}

struct RejectedLine {
    RawCaptionLine line;
    RejectReason reason;
};

struct ParseResult {
    std::vector<MomentAnnotation> accepted;
    std::vector<RejectedLine> rejected;
};

inline std::string build_caption_prompt(const CaptionPromptSpec& spec,
                                        const std::string& template_text = prompts::kCaptionPrompt) {
    if (!(spec.duration > 0.0)) {
        throw std::invalid_argument("build_caption_prompt: duration must be positive");
    }
    return prompts::render_with_targets(
        template_text, {{"duration", format_seconds(spec.duration)}}, spec.target_words);
}

namespace detail {

// Timestamp syntax: decimal seconds ("12", "12.5") or clock text
// ("MM:SS" / "MM:SS.fff", seconds 00-59, at most three fraction digits).
// Returns the parsed value and the matched text, advancing pos past it.
inline std::optional<std::pair<double, std::string>> parse_timestamp(const std::string& s,
                                                                     std::size_t& pos) {
    auto digit = [](char c) { return c >= '0' && c <= '9'; };
    const std::size_t begin = pos;
    std::size_t p = pos;
    while (p < s.size() && digit(s[p])) ++p;
    if (p == begin) return std::nullopt;

    bool clock_shaped = p - begin <= 2 && p + 2 < s.size() && s[p] == ':' &&
                        digit(s[p + 1]) && digit(s[p + 2]);
    if (clock_shaped) {
        if (s[p + 1] > '5') return std::nullopt;  // seconds 00-59
        std::size_t q = p + 3;
        if (q < s.size() && digit(s[q])) return std::nullopt;  // three-digit seconds
        double seconds = (s[p + 1] - '0') * 10 + (s[p + 2] - '0');
        if (q < s.size() && s[q] == '.') {
            std::size_t f = q + 1;
            while (f < s.size() && digit(s[f])) ++f;
            std::size_t n_frac = f - (q + 1);
            if (n_frac < 1 || n_frac > 3) return std::nullopt;
            seconds += std::stod("0" + s.substr(q, f - q));
            q = f;
        }
        double minutes = std::stod(s.substr(begin, p - begin));
        std::string text = s.substr(begin, q - begin);
        pos = q;
        return std::make_pair(minutes * 60.0 + seconds, text);
    }

    // decimal branch
    std::size_t q = p;
    if (q < s.size() && s[q] == '.') {
        std::size_t f = q + 1;
        while (f < s.size() && digit(s[f])) ++f;
        if (f == q + 1) return std::nullopt;  // trailing dot
        q = f;
    }
    std::string text = s.substr(begin, q - begin);
    double value = std::stod(text);
    pos = q;
    return std::make_pair(value, text);
}

inline void skip_spaces(const std::string& s, std::size_t& pos) {
    while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
}

}  // namespace detail

// Parses an MLLM completion into moment annotations, one caption per
// line, format `START - END: CAPTION`. Accepted intervals are clamped to
// the video and marked Automated; every non-empty line that fails the
// grammar, is inverted, or clamps to zero length is returned as a
// rejection with a machine-readable reason.
inline ParseResult parse_dense_captions(const std::string& completion, const VideoRecord& video,
                                        const std::vector<std::string>& target_words = {}) {
    ParseResult result;
    std::size_t line_number = 0;
    std::istringstream in(completion);
    std::string raw;
    while (std::getline(in, raw)) {
        std::string line(trim(raw));
        if (line.empty()) continue;
        ++line_number;

        auto reject = [&](RejectReason reason, const std::string& st = {},
                          const std::string& et = {}) {
            result.rejected.push_back({{st, et, line, line_number}, reason});
        };

        std::size_t cursor = 0;
        auto start_tok = detail::parse_timestamp(line, cursor);
        if (!start_tok) {
            reject(RejectReason::GrammarMismatch);
            continue;
        }
        detail::skip_spaces(line, cursor);
        if (cursor >= line.size() || line[cursor] != '-') {
            reject(RejectReason::GrammarMismatch, start_tok->second);
            continue;
        }
        ++cursor;
        detail::skip_spaces(line, cursor);
        auto end_tok = detail::parse_timestamp(line, cursor);
        if (!end_tok) {
            reject(RejectReason::GrammarMismatch, start_tok->second);
            continue;
        }
        detail::skip_spaces(line, cursor);
        if (cursor >= line.size() || line[cursor] != ':') {
            reject(RejectReason::GrammarMismatch, start_tok->second, end_tok->second);
            continue;
        }
        ++cursor;
        std::string caption(trim(line.substr(cursor)));
        if (caption.empty()) {
            reject(RejectReason::GrammarMismatch, start_tok->second, end_tok->second);
            continue;
        }
        if (start_tok->first > end_tok->first) {
            reject(RejectReason::InvertedInterval, start_tok->second, end_tok->second);
            continue;
        }
        TimeInterval clamped =
            clamp_interval(TimeInterval{start_tok->first, end_tok->first}, video.duration);
        if (clamped.degenerate()) {
            reject(RejectReason::ZeroLengthAfterClamp, start_tok->second, end_tok->second);
            continue;
        }
        result.accepted.push_back({video.video_id, clamped, caption, target_words,
                                   Provenance::Automated});
    }
    return result;
}

// Renders an annotation back into the caption line format. Reparsing a
// rendered line yields the same annotation.
inline std::string render_caption_line(const MomentAnnotation& ann) {
    return format_seconds(ann.interval.start) + " - " + format_seconds(ann.interval.end) + ": " +
           ann.caption;
}

// Standalone validation pass: bounds against the video record, empty
// captions, and exact-duplicate (interval, caption) pairs. Order is
// preserved; the first of a duplicate run survives.
inline std::pair<std::vector<MomentAnnotation>, std::vector<std::pair<MomentAnnotation, RejectReason>>>
validate_annotations(const std::vector<MomentAnnotation>& annotations, const VideoRecord& video) {
    std::vector<MomentAnnotation> accepted;
    std::vector<std::pair<MomentAnnotation, RejectReason>> rejected;
    std::set<std::tuple<double, double, std::string>> seen;
    for (const auto& ann : annotations) {
        if (trim(ann.caption).empty()) {
            rejected.emplace_back(ann, RejectReason::EmptyCaption);
            continue;
        }
        if (ann.interval.end > video.duration || ann.interval.start < 0.0) {
            rejected.emplace_back(ann, RejectReason::OutOfBounds);
            continue;
        }
        if (!seen.emplace(ann.interval.start, ann.interval.end, ann.caption).second) {
            rejected.emplace_back(ann, RejectReason::Duplicate);
            continue;
        }
        accepted.push_back(ann);
    }
    return {std::move(accepted), std::move(rejected)};
}

// Fraction of annotations whose caption tokens contain at least one of
// their own target words, exact token match.
inline double steering_hit_rate(const std::vector<MomentAnnotation>& annotations) {
    if (annotations.empty()) {
        throw std::invalid_argument("steering_hit_rate: empty input");
    }
    bool any_targets = std::any_of(annotations.begin(), annotations.end(),
                                   [](const auto& a) { return !a.target_words.empty(); });
    if (!any_targets) {
        throw std::invalid_argument("steering_hit_rate: no annotation carries target words");
    }
    std::size_t hits = 0;
    for (const auto& ann : annotations) {
        auto tokens = vocab::tokenize_query(ann.caption);
        for (const auto& target : ann.target_words) {
            if (tokens.count(to_lower(target))) {
                ++hits;
                break;
            }
        }
    }
    return static_cast<double>(hits) / static_cast<double>(annotations.size());
}

enum class PairingKey { VideoAndCaption, VideoAndIndex };

struct AgreementReport {
    double rate = 0.0;         // agreements / automated annotations
    std::size_t n_automated = 0;
    std::size_t n_paired = 0;
    std::size_t n_agreeing = 0;
    std::vector<std::string> unpaired_keys;
};

// Fraction of automated annotations whose interval IoU with the
// human-corrected counterpart strictly exceeds the threshold. Records
// that pair with nothing count as disagreements.
inline AgreementReport agreement_rate(const std::vector<MomentAnnotation>& automated,
                                      const std::vector<MomentAnnotation>& corrected,
                                      double iou_threshold = 0.5,
                                      PairingKey key = PairingKey::VideoAndCaption) {
    auto key_of = [&](const MomentAnnotation& ann, std::size_t index_in_video) {
        if (key == PairingKey::VideoAndCaption) {
            return ann.video_id + "\x1f" + normalize_text(ann.caption);
        }
        return ann.video_id + "\x1f" + std::to_string(index_in_video);
    };
    auto group = [&](const std::vector<MomentAnnotation>& anns) {
        std::map<std::string, std::vector<const MomentAnnotation*>> groups;
        std::map<std::string, std::size_t> per_video;
        for (const auto& ann : anns) {
            groups[key_of(ann, per_video[ann.video_id]++)].push_back(&ann);
        }
        if (key == PairingKey::VideoAndCaption) {
            for (auto& [k, members] : groups) {
                std::sort(members.begin(), members.end(), [](const auto* a, const auto* b) {
                    return std::tie(a->interval.start, a->interval.end) <
                           std::tie(b->interval.start, b->interval.end);
                });
            }
        }
        return groups;
    };

    AgreementReport report;
    report.n_automated = automated.size();
    auto auto_groups = group(automated);
    auto gold_groups = group(corrected);
    for (const auto& [k, members] : auto_groups) {
        auto it = gold_groups.find(k);
        std::size_t n_gold = it == gold_groups.end() ? 0 : it->second.size();
        for (std::size_t i = 0; i < members.size(); ++i) {
            if (i >= n_gold) {
                report.unpaired_keys.push_back(k);
                continue;
            }
            ++report.n_paired;
            double iou = compute_iou(members[i]->interval, it->second[i]->interval);
            if (iou > iou_threshold) ++report.n_agreeing;
        }
    }
    report.rate = report.n_automated == 0
                      ? 0.0
                      : static_cast<double>(report.n_agreeing) /
                            static_cast<double>(report.n_automated);
    return report;
}

}  // namespace vtgforge::annotate

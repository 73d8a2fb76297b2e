#pragma once

// Verifiable reward computation for model outputs in the
// `<think>...</think> <answer><t_s to t_e></answer>` format: the strict
// format parser, the timestamp-aware IoU reward, the binary format
// reward, their composite, and group-relative advantage normalization.

#include <cmath>
#include <cstdlib>
#include <optional>
#include <string>
#include <vector>

#include "vtgforge/core.hpp"
#include "vtgforge/text.hpp"

namespace vtgforge::reward {

enum class ParseError {
    MissingThink,
    NestedTags,
    MissingAnswer,
    MalformedAnswer,
    InvertedInterval,
    TrailingContent,
};

inline const char* to_string(ParseError e) {
    switch (e) {
        case ParseError::MissingThink: return "MissingThink";
        case ParseError::NestedTags: return "NestedTags";
        case ParseError::MissingAnswer: return "MissingAnswer";
        case ParseError::MalformedAnswer: return "MalformedAnswer";
        case ParseError::InvertedInterval: return "InvertedInterval";
        case ParseError::TrailingContent: return "TrailingContent";
    }
    return "";
}

struct ParsedOutput {
    std::string think_text;
    std::optional<TimeInterval> answer_interval;  // present iff well_formed
    bool well_formed = false;
    std::optional<ParseError> parse_error;
};

// Canonical answer-span rendering, one-decimal seconds. The training-data
// factory emits this exact form; parse_answer inverts it.
inline std::string render_answer_span(const TimeInterval& interval) {
    return "<" + format_seconds(interval.start) + " to " + format_seconds(interval.end) + ">";
}

inline std::string render_answer_block(const TimeInterval& interval) {
    return "<answer>" + render_answer_span(interval) + "</answer>";
}

inline std::string render_output(const std::string& think_text, const TimeInterval& interval) {
    return "<think>" + think_text + "</think> " + render_answer_block(interval);
}

namespace detail {

inline bool scan_number(const std::string& s, std::size_t& pos, double& out) {
    std::size_t start = pos;
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
    if (pos == start) return false;
    if (pos < s.size() && s[pos] == '.') {
        std::size_t frac = ++pos;
        while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
        if (pos == frac) return false;
    }
    out = std::strtod(s.c_str() + start, nullptr);
    return true;
}

inline void skip_ws(const std::string& s, std::size_t& pos) {
    while (pos < s.size() &&
           (s[pos] == ' ' || s[pos] == '\t' || s[pos] == '\n' || s[pos] == '\r')) {
        ++pos;
    }
}

inline bool consume(const std::string& s, std::size_t& pos, std::string_view literal) {
    if (s.compare(pos, literal.size(), literal) != 0) return false;
    pos += literal.size();
    return true;
}

}  // namespace detail

// Structural parse of a model output. Well-formed means, in order: one
// <think> block, optional whitespace, <answer><S to E></answer> with
// unsigned decimal S <= E, and nothing else besides surrounding
// whitespace. Total over arbitrary strings; failures land in parse_error.
inline ParsedOutput parse_answer(const std::string& output) {
    ParsedOutput parsed;
    auto fail = [&](ParseError e) {
        parsed.parse_error = e;
        return parsed;
    };

    std::size_t pos = 0;
    detail::skip_ws(output, pos);
    if (!detail::consume(output, pos, "<think>")) return fail(ParseError::MissingThink);
    std::size_t think_end = output.find("</think>", pos);
    if (think_end == std::string::npos) return fail(ParseError::MissingThink);
    parsed.think_text = output.substr(pos, think_end - pos);
    for (std::string_view tag : {"<think>", "<answer>", "</answer>"}) {
        if (parsed.think_text.find(tag) != std::string::npos) {
            return fail(ParseError::NestedTags);
        }
    }
    pos = think_end + 8;

    detail::skip_ws(output, pos);
    if (!detail::consume(output, pos, "<answer>")) return fail(ParseError::MissingAnswer);
    std::size_t answer_end = output.find("</answer>", pos);
    if (answer_end == std::string::npos) return fail(ParseError::MissingAnswer);
    std::string body = output.substr(pos, answer_end - pos);
    pos = answer_end + 9;

    detail::skip_ws(output, pos);
    if (pos != output.size()) return fail(ParseError::TrailingContent);

    auto is_ws = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; };
    std::size_t b = 0;
    double start = 0.0;
    double end = 0.0;
    detail::skip_ws(body, b);
    if (!detail::consume(body, b, "<")) return fail(ParseError::MalformedAnswer);
    detail::skip_ws(body, b);
    if (!detail::scan_number(body, b, start)) return fail(ParseError::MalformedAnswer);
    if (b >= body.size() || !is_ws(body[b])) return fail(ParseError::MalformedAnswer);
    detail::skip_ws(body, b);
    if (!detail::consume(body, b, "to")) return fail(ParseError::MalformedAnswer);
    if (b >= body.size() || !is_ws(body[b])) return fail(ParseError::MalformedAnswer);
    detail::skip_ws(body, b);
    if (!detail::scan_number(body, b, end)) return fail(ParseError::MalformedAnswer);
    detail::skip_ws(body, b);
    if (!detail::consume(body, b, ">")) return fail(ParseError::MalformedAnswer);
    detail::skip_ws(body, b);
    if (b != body.size()) return fail(ParseError::MalformedAnswer);

    if (start > end) return fail(ParseError::InvertedInterval);
    parsed.answer_interval = TimeInterval{start, end};
    parsed.well_formed = true;
    return parsed;
}

// Timestamp-aware IoU reward: IoU scaled by boundary-deviation penalties
// normalized by the video duration,
//   IoU * (1 - |t_s - t'_s| / t) * (1 - |t_e - t'_e| / t).
// The prediction is clamped into [0, duration] first, which keeps every
// factor in [0, 1].
inline double tiou_reward(const TimeInterval& pred, const TimeInterval& gold, double duration) {
    if (!(duration > 0.0)) {
        throw std::invalid_argument("tiou_reward: duration must be positive");
    }
    TimeInterval p = clamp_interval(pred, duration);
    double iou = compute_iou(p, gold);
    double start_penalty = 1.0 - std::abs(p.start - gold.start) / duration;
    double end_penalty = 1.0 - std::abs(p.end - gold.end) / duration;
    return iou * start_penalty * end_penalty;
}

inline double format_reward(const ParsedOutput& parsed) {
    return parsed.well_formed ? 1.0 : 0.0;
}

struct RewardBreakdown {
    double r_tiou = 0.0;   // in [0, 1]
    double r_format = 0.0; // 0 or 1
    double r_total = 0.0;  // r_tiou + r_format
    ParsedOutput parsed;
};

// r(o) = r_tIoU(o) + r_format(o); malformed outputs score 0 + 0.
inline RewardBreakdown composite_reward(const std::string& output, const TimeInterval& gold,
                                        double duration) {
    if (!(duration > 0.0)) {
        throw std::invalid_argument("composite_reward: duration must be positive");
    }
    RewardBreakdown breakdown;
    breakdown.parsed = parse_answer(output);
    if (breakdown.parsed.well_formed) {
        breakdown.r_tiou = tiou_reward(*breakdown.parsed.answer_interval, gold, duration);
        breakdown.r_format = 1.0;
    }
    breakdown.r_total = breakdown.r_tiou + breakdown.r_format;
    return breakdown;
}

// Group-relative advantages: (r_i - mean) / population std. A zero-variance
// group normalizes to all zeros.
inline std::vector<double> group_advantages(const std::vector<double>& rewards) {
    if (rewards.empty()) {
        throw std::invalid_argument("group_advantages: empty reward group");
    }
    double mean = 0.0;
    for (double r : rewards) mean += r;
    mean /= static_cast<double>(rewards.size());
    double variance = 0.0;
    for (double r : rewards) variance += (r - mean) * (r - mean);
    variance /= static_cast<double>(rewards.size());
    double stddev = std::sqrt(variance);
    std::vector<double> out(rewards.size(), 0.0);
    if (stddev == 0.0) return out;
    for (std::size_t i = 0; i < rewards.size(); ++i) {
        out[i] = (rewards[i] - mean) / stddev;
    }
    return out;
}

}  // namespace vtgforge::reward

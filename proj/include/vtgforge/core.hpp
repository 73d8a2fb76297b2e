#pragma once

// Core value types for temporal grounding data: time intervals, video
// records, moment annotations, and the exact interval arithmetic shared
// by every other component.

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace vtgforge {

// Closed [start, end] span in seconds within a video.
struct TimeInterval {
    double start = 0.0;
    double end = 0.0;

    double length() const { return end - start; }
    bool degenerate() const { return start == end; }

    bool valid() const {
        return std::isfinite(start) && std::isfinite(end) &&
               start >= 0.0 && start <= end;
    }

    bool operator==(const TimeInterval& other) const = default;
};

inline TimeInterval make_interval(double start, double end) {
    TimeInterval iv{start, end};
    if (!iv.valid()) {
        throw std::invalid_argument("invalid time interval [" +
                                    std::to_string(start) + ", " +
                                    std::to_string(end) + "]");
    }
    return iv;
}

struct VideoRecord {
    std::string video_id;
    double duration = 0.0;  // seconds, > 0
    std::optional<std::string> source_keyword;
    std::optional<std::string> domain_tag;
};

enum class Provenance { Automated, HumanCorrected };

// One caption bound to a time interval in a specific video; the atomic
// dataset record.
struct MomentAnnotation {
    std::string video_id;
    TimeInterval interval;
    std::string caption;
    std::vector<std::string> target_words;
    Provenance provenance = Provenance::Automated;

    bool operator==(const MomentAnnotation& other) const = default;
};

enum class EventStatus { NotStarted, InProgress, Ended };

enum class MatchLabel { Match, PartialMatch, Mismatch };

inline const char* to_string(EventStatus s) {
    switch (s) {
        case EventStatus::NotStarted: return "Not Started";
        case EventStatus::InProgress: return "In Progress";
        case EventStatus::Ended: return "Ended";
    }
    return "";
}

inline const char* to_string(MatchLabel label) {
    switch (label) {
        case MatchLabel::Match: return "match";
        case MatchLabel::PartialMatch: return "partial match";
        case MatchLabel::Mismatch: return "mismatch";
    }
    return "";
}

// Intersection-over-union of two closed intervals, measured by length.
// Two identical degenerate points score 1; any other pairing involving a
// zero-length interval scores 0.
inline double compute_iou(const TimeInterval& a, const TimeInterval& b) {
    if (!a.valid() || !b.valid()) {
        throw std::invalid_argument("compute_iou requires valid intervals");
    }
    if (a.degenerate() && b.degenerate()) {
        return a.start == b.start ? 1.0 : 0.0;
    }
    double inter = std::max(0.0, std::min(a.end, b.end) - std::max(a.start, b.start));
    double uni = a.length() + b.length() - inter;
    if (uni <= 0.0) return 0.0;
    return inter / uni;
}

// Status of an event at time t. Both boundaries classify as InProgress.
inline EventStatus event_status(double t, const TimeInterval& interval) {
    if (!(t >= 0.0) || !interval.valid()) {
        throw std::invalid_argument("event_status requires t >= 0 and a valid interval");
    }
    if (t < interval.start) return EventStatus::NotStarted;
    if (t > interval.end) return EventStatus::Ended;
    return EventStatus::InProgress;
}

// match (IoU > 0.7), partial match (0.3 <= IoU <= 0.7), mismatch (IoU < 0.3).
inline MatchLabel label_match(double iou) {
    if (!(iou >= 0.0) || !(iou <= 1.0)) {
        throw std::domain_error("label_match requires IoU in [0, 1]");
    }
    if (iou > 0.7) return MatchLabel::Match;
    if (iou >= 0.3) return MatchLabel::PartialMatch;
    return MatchLabel::Mismatch;
}

// Clamps both endpoints into [0, duration]. Clamping is monotone, so a
// valid input interval stays valid; intervals entirely outside collapse
// onto the nearer boundary.
inline TimeInterval clamp_interval(const TimeInterval& interval, double duration) {
    if (!(duration > 0.0)) {
        throw std::invalid_argument("clamp_interval requires duration > 0");
    }
    auto clamp = [duration](double v) { return std::min(std::max(v, 0.0), duration); };
    double s = clamp(interval.start);
    double e = clamp(interval.end);
    if (s > e) {  // only possible for inverted inputs
        double edge = interval.end <= 0.0 ? 0.0 : duration;
        s = e = edge;
    }
    return TimeInterval{s, e};
}

}  // namespace vtgforge

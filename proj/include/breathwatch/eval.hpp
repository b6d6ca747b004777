#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "breathwatch/breath.hpp"
#include "breathwatch/image.hpp"
#include "breathwatch/roi.hpp"

namespace breathwatch {

struct ConfusionCounts {
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t tn = 0;
    std::int64_t fn = 0;
};

struct DetectionRates {
    std::optional<double> dar;
    std::optional<double> far;
    std::optional<double> sensitivity;
    std::optional<double> precision;
};

// A predicted box counts as correct when it fully contains the reference
// box and the reference fills more than 60% of its area (inclusive pixel
// areas). Degenerate predictions never count.
inline bool box_match(const RoiRect& pred, const RoiRect& ref) {
    if (pred.area() <= 0 || ref.area() <= 0) return false;
    bool contained = pred.x0 <= ref.x0 && pred.x1 >= ref.x1 &&
                     pred.y0 <= ref.y0 && pred.y1 >= ref.y1;
    if (!contained) return false;
    return static_cast<double>(ref.area()) / static_cast<double>(pred.area()) > 0.6;
}

inline double box_accuracy(std::span<const RoiRect> pred, std::span<const RoiRect> ref) {
    if (pred.size() != ref.size())
        throw InputError("box_accuracy: per-frame box lists differ in length");
    if (pred.empty())
        throw InputError("box_accuracy: no boxes to score");
    std::int64_t hits = 0;
    for (size_t i = 0; i < pred.size(); ++i)
        if (box_match(pred[i], ref[i])) ++hits;
    return static_cast<double>(hits) / static_cast<double>(pred.size());
}

struct CycleSpan {
    double start_ms = 0.0;
    double end_ms = 0.0;
};

// Splits the clip into breathing cycles at midpoints between reference
// peaks; the first cycle opens at 0 and the last closes at the clip end.
inline std::vector<CycleSpan> cycles_from_peaks(std::span<const double> peaks_ms,
                                                double duration_ms) {
    std::vector<CycleSpan> out;
    if (peaks_ms.empty()) return out;
    double start = 0.0;
    for (size_t i = 0; i + 1 < peaks_ms.size(); ++i) {
        double mid = 0.5 * (peaks_ms[i] + peaks_ms[i + 1]);
        out.push_back(CycleSpan{start, mid});
        start = mid;
    }
    out.push_back(CycleSpan{start, duration_ms});
    return out;
}

// Fraction of cycles holding exactly one detected peak; spans are
// half-open [start, end).
inline std::optional<double> cycle_accuracy(std::span<const double> detected_ms,
                                            std::span<const CycleSpan> cycles) {
    if (cycles.empty()) return std::nullopt;
    std::int64_t good = 0;
    for (const CycleSpan& c : cycles) {
        int count = 0;
        for (double p : detected_ms)
            if (p >= c.start_ms && p < c.end_ms) ++count;
        if (count == 1) ++good;
    }
    return static_cast<double>(good) / static_cast<double>(cycles.size());
}

inline DetectionRates confusion_metrics(const ConfusionCounts& c) {
    DetectionRates r;
    if (c.tp + c.tn > 0)
        r.dar = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.tn);
    if (c.fp + c.fn > 0)
        r.far = static_cast<double>(c.fp) / static_cast<double>(c.fp + c.fn);
    if (c.tp + c.fn > 0)
        r.sensitivity = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    if (c.tp + c.fp > 0)
        r.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
    return r;
}

namespace detail {

inline double event_overlap_ms(const ApneaEvent& a, const ApneaEvent& b) {
    double lo = a.start_ms > b.start_ms ? a.start_ms : b.start_ms;
    double hi = std::min(a.start_ms + a.length_ms, b.start_ms + b.length_ms);
    return hi - lo;
}

inline bool events_match(const ApneaEvent& a, const ApneaEvent& b) {
    double shorter = std::min(a.length_ms, b.length_ms);
    if (!(shorter > 0.0)) return false;
    return event_overlap_ms(a, b) >= 0.5 * shorter;
}

}  // namespace detail

// Event-level confusion: a predicted pause is a true positive when it
// overlaps some reference pause by at least half the shorter of the two;
// unmatched predictions are false positives, unmatched references false
// negatives. True negatives are tumbling windows of window_ms over
// [0, total_ms) that intersect no pause from either list.
inline ConfusionCounts match_events(std::span<const ApneaEvent> pred,
                                    std::span<const ApneaEvent> ref,
                                    double window_ms, double total_ms) {
    if (!(window_ms > 0.0))
        throw ConfigError("match_events: window_ms must be positive");
    ConfusionCounts c;
    std::vector<bool> ref_hit(ref.size(), false);
    for (const ApneaEvent& p : pred) {
        bool hit = false;
        for (size_t j = 0; j < ref.size(); ++j) {
            if (detail::events_match(p, ref[j])) {
                hit = true;
                ref_hit[j] = true;
            }
        }
        if (hit)
            ++c.tp;
        else
            ++c.fp;
    }
    for (bool h : ref_hit)
        if (!h) ++c.fn;
    for (double w0 = 0.0; w0 < total_ms; w0 += window_ms) {
        double w1 = std::min(w0 + window_ms, total_ms);
        auto clear = [&](std::span<const ApneaEvent> evs) {
            for (const ApneaEvent& e : evs)
                if (e.start_ms < w1 && e.start_ms + e.length_ms > w0) return false;
            return true;
        };
        if (clear(pred) && clear(ref)) ++c.tn;
    }
    return c;
}

}  // namespace breathwatch

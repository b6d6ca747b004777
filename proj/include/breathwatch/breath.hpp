#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "breathwatch/image.hpp"

namespace breathwatch {

enum class PeakRule {
    Corrected,  // s1(t) > s1(t-1) and s1(t) >= s1(t+1): local maximum
    AsPrinted,  // s1(t) > s1(t-1) and s1(t) <= s1(t+1): rising points
};

// Indices of peaks; plateaus credit their first sample. Series shorter than
// three samples has no interior points and yields an empty list.
inline std::vector<std::int64_t> find_peaks(std::span<const double> s1,
                                            PeakRule rule = PeakRule::Corrected) {
    std::vector<std::int64_t> peaks;
    if (s1.size() < 3)
        return peaks;
    for (size_t t = 1; t + 1 < s1.size(); ++t) {
        if (!(s1[t] > s1[t - 1]))
            continue;
        bool right = rule == PeakRule::Corrected ? s1[t] >= s1[t + 1] : s1[t] <= s1[t + 1];
        if (right)
            peaks.push_back(static_cast<std::int64_t>(t));
    }
    return peaks;
}

struct BreathInterval {
    int number = 0;  // numbered from 1
    double ms = 0.0;
};

struct BreathReport {
    std::vector<double> peaks_ms;
    std::vector<BreathInterval> intervals;
};

inline BreathReport breath_intervals(std::span<const std::int64_t> peak_frames,
                                     double frame_period_ms) {
    BreathReport r;
    r.peaks_ms.reserve(peak_frames.size());
    for (std::int64_t f : peak_frames)
        r.peaks_ms.push_back(static_cast<double>(f) * frame_period_ms);
    for (size_t i = 1; i < peak_frames.size(); ++i)
        r.intervals.push_back(BreathInterval{
            static_cast<int>(i),
            static_cast<double>(peak_frames[i] - peak_frames[i - 1]) * frame_period_ms});
    return r;
}

struct ApneaEvent {
    double start_ms = 0.0;
    double length_ms = 0.0;
};

struct ApneaWindow {
    double start_ms = 0.0;
    double end_ms = 0.0;
    int severity = 0;
};

struct ApneaReport {
    std::vector<ApneaWindow> windows;
    double window_ms = 200000.0;
    double pause_ms = 15000.0;
};

// Tumbling windows over [0, total_ms); a window's severity counts the
// inter-peak gaps longer than pause_ms that intersect it. A gap crossing a
// boundary counts in every window it touches; the trailing window covers
// whatever span remains.
inline ApneaReport score_windows(std::span<const double> peak_timestamps_ms, double total_ms,
                                 double window_ms = 200000.0, double pause_ms = 15000.0) {
    if (!(window_ms > pause_ms) || !(pause_ms > 0.0))
        throw ConfigError("need window_ms > pause_ms > 0");
    ApneaReport rep;
    rep.window_ms = window_ms;
    rep.pause_ms = pause_ms;
    for (double w0 = 0.0; w0 < total_ms; w0 += window_ms) {
        double w1 = w0 + window_ms < total_ms ? w0 + window_ms : total_ms;
        ApneaWindow win{w0, w1, 0};
        for (size_t i = 1; i < peak_timestamps_ms.size(); ++i) {
            double a = peak_timestamps_ms[i - 1];
            double b = peak_timestamps_ms[i];
            if (b - a > pause_ms && a < w1 && b > w0)
                ++win.severity;
        }
        rep.windows.push_back(win);
    }
    return rep;
}

}  // namespace breathwatch

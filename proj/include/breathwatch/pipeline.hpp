#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "breathwatch/breath.hpp"
#include "breathwatch/edge.hpp"
#include "breathwatch/frame_io.hpp"
#include "breathwatch/image.hpp"
#include "breathwatch/motion.hpp"
#include "breathwatch/parallel.hpp"
#include "breathwatch/roi.hpp"

namespace breathwatch {

struct AnalyzeOptions {
    double window_ms = 200000.0;
    double pause_ms = 15000.0;
    PeakRule peak_rule = PeakRule::Corrected;
    bool full_frame_edges = false;
    int jobs = 1;
    bool want_signal = false;
};

struct RoiSpan {
    std::int64_t from_frame = 0;
    RoiRect rect;
};

// Supplies the working rectangle per frame, either a fixed rectangle or a
// confidence-gated detector track. Low-confidence track entries keep the
// last usable rectangle; a clip that never yields one cannot be analyzed.
class RoiProvider {
public:
    static RoiProvider fixed(const RoiRect& r) {
        RoiProvider p;
        if (r.x0 < 0 || r.y0 < 0 || r.x1 < r.x0 || r.y1 < r.y0)
            throw RoiError("fixed roi rectangle is degenerate");
        p.fixed_ = r;
        return p;
    }

    static RoiProvider from_track(RoiTrack track) {
        RoiProvider p;
        p.track_ = std::move(track);
        return p;
    }

    bool tracked() const { return track_.has_value(); }

    RoiRect rect_for(std::int64_t frame, int width, int height) {
        RoiRect r;
        if (fixed_) {
            if (fixed_->x1 >= width || fixed_->y1 >= height)
                throw RoiError("fixed roi rectangle exceeds frame bounds");
            r = *fixed_;
        } else {
            RoiBox box = track_->box_at(frame);
            std::optional<RoiRect> cur = roi_rect(box, width, height);
            if (cur)
                last_ = *cur;
            else if (!last_)
                throw InputError("no confident roi detection by frame " +
                                 std::to_string(frame));
            r = *last_;
        }
        if (spans_.empty() || !(spans_.back().rect == r))
            spans_.push_back(RoiSpan{frame, r});
        return r;
    }

    const std::vector<RoiSpan>& spans() const { return spans_; }

private:
    RoiProvider() = default;

    std::optional<RoiRect> fixed_;
    std::optional<RoiTrack> track_;
    std::optional<RoiRect> last_;
    std::vector<RoiSpan> spans_;
};

struct SignalRow {
    std::int64_t frame = 0;
    double cx = 0.0;
    double cy = 0.0;
    std::optional<double> vx, vy, ux, uy, s0, s1;
};

struct AnalysisResult {
    BreathReport breath;
    ApneaReport apnea;
    std::vector<ApneaEvent> events;
    std::vector<std::int64_t> peak_frames;
    std::vector<SignalRow> signal;
    std::vector<RoiSpan> roi_spans;
    std::int64_t frames = 0;
    Fps fps;
    double duration_ms = 0.0;
    double processing_ms = 0.0;
    double fps_processed = 0.0;
};

namespace detail {

inline GrayImage crop_image(const GrayImage& src, const RoiRect& r) {
    GrayImage out(r.width(), r.height());
    for (int y = 0; y < r.height(); ++y) {
        const std::uint8_t* s = src.row(r.y0 + y) + r.x0;
        std::copy(s, s + r.width(), out.row(y));
    }
    return out;
}

}  // namespace detail

// Reads the whole source, tracks the edge centroid of each frame's working
// rectangle, and reduces the motion signal to breath intervals and apnea
// window scores. Per-frame image work is pure and fans out across jobs;
// the temporal stages consume frames strictly in order, so results do not
// depend on the job count.
inline AnalysisResult analyze_stream(FrameSource& src, RoiProvider& roi,
                                     const AnalyzeOptions& opt) {
    if (!(opt.pause_ms > 0.0) || !(opt.window_ms > opt.pause_ms))
        throw ConfigError("window_ms must exceed pause_ms and both must be positive");
    if (opt.jobs < 1)
        throw ConfigError("jobs must be at least 1");

    const auto t0 = std::chrono::steady_clock::now();
    AnalysisResult res;
    res.fps = src.fps();
    const double period_ms = res.fps.frame_period_ms();

    ThreadPool pool(static_cast<size_t>(opt.jobs));
    MotionTracker tracker;
    std::vector<double> s1;
    std::vector<std::int64_t> sample_frames;

    struct FrameOut {
        std::int64_t frame = 0;
        RoiRect rect;
        double cx = 0.0;
        double cy = 0.0;
    };
    const size_t batch_cap = static_cast<size_t>(opt.jobs) * 4;
    std::vector<GrayFrame> batch;
    std::vector<FrameOut> outs;
    bool eof = false;
    while (!eof) {
        batch.clear();
        while (batch.size() < batch_cap) {
            GrayFrame f;
            if (!src.next(f)) {
                eof = true;
                break;
            }
            batch.push_back(std::move(f));
        }
        if (batch.empty()) break;
        outs.assign(batch.size(), FrameOut{});
        for (size_t i = 0; i < batch.size(); ++i) {
            outs[i].frame = batch[i].frame_index;
            outs[i].rect =
                roi.rect_for(batch[i].frame_index, batch[i].width(), batch[i].height());
        }
        pool.run_indexed(batch.size(), [&](size_t i) {
            const GrayFrame& f = batch[i];
            const RoiRect& r = outs[i].rect;
            if (opt.full_frame_edges) {
                EdgeMap edges = detect_edges(f.pixels);
                Centroid c = centroid(edges, r, f.frame_index);
                outs[i].cx = c.x;
                outs[i].cy = c.y;
            } else {
                GrayImage sub = detail::crop_image(f.pixels, r);
                EdgeMap edges = detect_edges(sub);
                RoiRect whole{0, r.width() - 1, 0, r.height() - 1};
                Centroid c = centroid(edges, whole, f.frame_index);
                outs[i].cx = c.x + r.x0;
                outs[i].cy = c.y + r.y0;
            }
        });
        for (const FrameOut& o : outs) {
            auto state = tracker.feed(Centroid{o.cx, o.cy, o.frame});
            if (state.sample) {
                s1.push_back(state.sample->s1);
                sample_frames.push_back(state.sample->frame_index);
            }
            if (opt.want_signal) {
                SignalRow row;
                row.frame = o.frame;
                row.cx = o.cx;
                row.cy = o.cy;
                if (state.velocity) {
                    row.vx = state.velocity->vx;
                    row.vy = state.velocity->vy;
                }
                if (state.direction) {
                    row.ux = state.direction->ux;
                    row.uy = state.direction->uy;
                }
                if (state.sample) {
                    row.s0 = state.sample->s0;
                    row.s1 = state.sample->s1;
                }
                res.signal.push_back(row);
            }
        }
        res.frames += static_cast<std::int64_t>(batch.size());
    }
    const auto t1 = std::chrono::steady_clock::now();
    if (res.frames == 0)
        throw InputError("input contains no frames");

    res.processing_ms =
        std::chrono::duration<double, std::milli>(t1 - t0).count();
    res.fps_processed =
        static_cast<double>(res.frames) / (std::max(res.processing_ms, 1e-9) / 1000.0);
    res.duration_ms = static_cast<double>(res.frames) * period_ms;

    std::vector<std::int64_t> peak_idx = find_peaks(s1, opt.peak_rule);
    res.peak_frames.reserve(peak_idx.size());
    for (std::int64_t i : peak_idx)
        res.peak_frames.push_back(sample_frames[static_cast<size_t>(i)]);
    res.breath = breath_intervals(res.peak_frames, period_ms);
    res.apnea = score_windows(res.breath.peaks_ms, res.duration_ms, opt.window_ms,
                              opt.pause_ms);
    for (size_t i = 1; i < res.breath.peaks_ms.size(); ++i) {
        double gap = res.breath.peaks_ms[i] - res.breath.peaks_ms[i - 1];
        if (gap > opt.pause_ms)
            res.events.push_back(ApneaEvent{res.breath.peaks_ms[i - 1], gap});
    }
    res.roi_spans = roi.spans();
    return res;
}

}  // namespace breathwatch

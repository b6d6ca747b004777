#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "breathwatch/breath.hpp"
#include "breathwatch/frame_io.hpp"
#include "breathwatch/image.hpp"
#include "breathwatch/roi.hpp"

namespace breathwatch {

inline constexpr double kApneaPauseMs = 15000.0;
inline constexpr double kApneaWindowMs = 200000.0;

struct TorsoSpec {
    double cx = -1.0;  // negative: derive from frame size
    double cy = -1.0;
    double width = -1.0;
    double height = -1.0;
    double bright = 250.0;
    double dark = 20.0;
};

struct Pause {
    double start_s = 0.0;
    double length_s = 0.0;
};

struct SynthConfig {
    int width = 320;
    int height = 240;
    double fps = 24.0;
    double duration_s = 60.0;
    double breaths_per_min = 20.0;
    double amplitude_px = 3.0;
    TorsoSpec torso;
    std::vector<Pause> pauses;
    double noise_sigma = 0.0;
    std::uint64_t seed = 0;
    bool square_wave = false;
};

struct GroundTruth {
    std::vector<double> peaks_ms;
    std::vector<ApneaEvent> apnea_events;
    RoiBox roi;
};

namespace detail {

// Gaussian stream: Box-Muller over a seeded mt19937_64, so noise bytes do
// not depend on the standard library's normal_distribution implementation.
class GaussStream {
public:
    explicit GaussStream(std::uint64_t seed) : gen_(seed) {}

    double next() {
        if (have_) {
            have_ = false;
            return spare_;
        }
        double u1 = (static_cast<double>(gen_() >> 11) + 1.0) * 0x1.0p-53;  // (0,1]
        double u2 = static_cast<double>(gen_() >> 11) * 0x1.0p-53;          // [0,1)
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586 * u2;
        spare_ = r * std::sin(a);
        have_ = true;
        return r * std::cos(a);
    }

private:
    std::mt19937_64 gen_;
    bool have_ = false;
    double spare_ = 0.0;
};

}  // namespace detail

// Renders a striped torso band that translates rigidly and vertically with
// the breathing displacement. Stripe geometry is chosen so the edge
// centroid of the band tracks the displacement with sub-hundredth-pixel
// fidelity: stripes span the full frame width, the band sits strictly
// inside the nominal ROI at every displacement, successive stripes carry
// fractional offsets that spread quantization phases over a uniform comb,
// and stripes slope away from the center column in a shallow chevron. The
// chevron makes the columns sample a second uniform phase comb (sub-pixel
// y resolution), while the mirror symmetry pins the x centroid to the
// exact frame center on noise-free clips and keeps the recovered motion
// purely vertical.
class SynthGenerator {
public:
    explicit SynthGenerator(const SynthConfig& cfg) : cfg_(cfg) {
        validate();
        torso_ = cfg.torso;
        if (torso_.cx < 0.0) torso_.cx = (cfg_.width - 1) / 2.0;
        if (torso_.cy < 0.0) torso_.cy = cfg_.height / 2.0;
        if (torso_.width < 0.0) torso_.width = cfg_.width;
        if (torso_.height < 0.0) torso_.height = 0.85 * cfg_.height;

        // Chevron slope q/m where m counts the distinct center distances
        // among crop columns. Coprime q makes the per-column stripe phases
        // an exactly uniform comb with spacing 1/m.
        const int crop_w = cfg_.width - 8;
        const int comb = (crop_w + 1) / 2;
        int q = static_cast<int>(std::lround(0.0224 * comb));
        if (q < 1) q = 1;
        while (std::gcd(q, comb) != 1) ++q;
        tilt_ = static_cast<double>(q) / static_cast<double>(comb);

        // Every stripe boundary has to stay inside the nominal analysis crop
        // across the whole displacement and tilt swing, with slack for the
        // detector's 5x5 support; otherwise stripes sliding over the crop
        // border drag the edge centroid back toward the crop center.
        const double crop_half = (cfg_.height - 24) / 2.0;
        const double tilt_reach = tilt_ * (cfg_.width - 9) / 2.0;
        const double budget = std::min(
            torso_.height - 4.0,
            2.0 * (crop_half - tilt_reach - cfg_.amplitude_px - 5.0));
        int nstripes = 1 + static_cast<int>(std::floor((budget - 4.5) / kPeriod));
        if (nstripes < 1) nstripes = 1;
        // Stripe i is shifted by i/n, so the rising and the falling
        // boundaries each form their own uniform fractional comb with
        // spacing 1/n. Together with the column comb this keeps the
        // centroid's quantization ripple far below the breathing curvature.
        bounds_.resize(2 * nstripes);
        for (int i = 0; i < nstripes; ++i) {
            const double lo =
                kPeriod * i + static_cast<double>(i) / nstripes - 0.5;
            bounds_[2 * i] = lo;
            bounds_[2 * i + 1] = lo + kStripe;
        }
        double mean = 0.0;
        for (double b : bounds_) mean += b;
        mean /= static_cast<double>(bounds_.size());
        for (double& b : bounds_) b -= mean;

        period_ms_ = 1000.0 / cfg_.fps;
        nframes_ = static_cast<std::int64_t>(std::llround(cfg_.duration_s * cfg_.fps));
        sorted_pauses_ = cfg_.pauses;
        std::sort(sorted_pauses_.begin(), sorted_pauses_.end(),
                  [](const Pause& a, const Pause& b) { return a.start_s < b.start_s; });
    }

    const SynthConfig& config() const { return cfg_; }
    std::int64_t frame_count() const { return nframes_; }
    double frame_period_ms() const { return period_ms_; }

    double displacement(std::int64_t frame) const {
        double t = static_cast<double>(frame) / cfg_.fps;
        double eff = t;
        for (const Pause& p : sorted_pauses_) {
            if (t >= p.start_s + p.length_s)
                eff -= p.length_s;
            else if (t > p.start_s)
                eff -= t - p.start_s;
        }
        double phase = 2.0 * 3.14159265358979323846 * (cfg_.breaths_per_min / 60.0) * eff;
        double c = std::cos(phase);
        if (cfg_.square_wave)
            return c > 0.0 ? -cfg_.amplitude_px : cfg_.amplitude_px;
        return -cfg_.amplitude_px * c;
    }

    // Pure by frame index; safe to call from several threads at once.
    GrayFrame frame(std::int64_t t) const {
        const int w = cfg_.width, h = cfg_.height;
        const double d = displacement(t);
        GrayFrame f;
        f.pixels = GrayImage(w, h);
        f.frame_index = t;
        f.timestamp_ms = t * period_ms_;
        const int ns = static_cast<int>(bounds_.size()) / 2;
        const bool noisy = cfg_.noise_sigma > 0.0;
        detail::GaussStream gauss((cfg_.seed << 20) + static_cast<std::uint64_t>(t));
        for (int x = 0; x < w; ++x) {
            const double colbase = tilt_ * std::fabs(x - torso_.cx);
            // u grows with y, so the candidate stripe index only advances.
            // The dark gap exceeds one pixel, so at most one stripe can
            // overlap a unit pixel window.
            int si = 0;
            for (int y = 0; y < h; ++y) {
                const double u = ((y - torso_.cy) - colbase) - d;
                while (si < ns && bounds_[2 * si + 1] <= u - 0.5)
                    ++si;
                double cov = 0.0;
                if (si < ns) {
                    double lo = bounds_[2 * si], hi = bounds_[2 * si + 1];
                    double ov = (hi < u + 0.5 ? hi : u + 0.5) - (lo > u - 0.5 ? lo : u - 0.5);
                    cov = ov < 0.0 ? 0.0 : (ov > 1.0 ? 1.0 : ov);
                }
                double v = torso_.dark + (torso_.bright - torso_.dark) * cov;
                if (noisy)
                    v += cfg_.noise_sigma * gauss.next();
                double q = std::nearbyint(v);
                f.pixels.at(x, y) = static_cast<std::uint8_t>(q < 0.0 ? 0.0 : (q > 255.0 ? 255.0 : q));
            }
        }
        return f;
    }

    RoiBox true_roi_box() const {
        RoiBox b;
        b.pc = 1.0;
        b.bx = (cfg_.width - 1) / 2.0;
        b.by = cfg_.height / 2.0;
        b.bw = cfg_.width - 9;
        b.bh = cfg_.height - 24;
        b.frame_index = 0;
        return b;
    }

    GroundTruth ground_truth() const {
        GroundTruth gt;
        const double T = 60.0 / cfg_.breaths_per_min;
        for (std::int64_t k = 0;; ++k) {
            double t = T / 4.0 + static_cast<double>(k) * T;
            for (const Pause& p : sorted_pauses_)
                if (t >= p.start_s)
                    t += p.length_s;
            if (t >= cfg_.duration_s)
                break;
            gt.peaks_ms.push_back(t * 1000.0);
        }
        for (const Pause& p : sorted_pauses_)
            if (p.length_s * 1000.0 > kApneaPauseMs)
                gt.apnea_events.push_back(ApneaEvent{p.start_s * 1000.0, p.length_s * 1000.0});
        gt.roi = true_roi_box();
        return gt;
    }

private:
    void validate() const {
        if (cfg_.width < 32 || cfg_.height < 32)
            throw ConfigError("synth frames must be at least 32x32");
        if (!(cfg_.fps > 0.0))
            throw ConfigError("fps must be positive");
        if (!(cfg_.duration_s > 0.0))
            throw ConfigError("duration_s must be positive");
        if (!(cfg_.breaths_per_min > 0.0))
            throw ConfigError("breaths_per_min must be positive");
        if (cfg_.amplitude_px < 1.0)
            throw ConfigError("amplitude_px must be at least 1");
        if (!(cfg_.fps > 2.0 * cfg_.breaths_per_min / 60.0))
            throw ConfigError("fps must exceed twice the breathing rate (Nyquist)");
        if (cfg_.noise_sigma < 0.0)
            throw ConfigError("noise_sigma must be non-negative");
        std::vector<Pause> ps = cfg_.pauses;
        std::sort(ps.begin(), ps.end(),
                  [](const Pause& a, const Pause& b) { return a.start_s < b.start_s; });
        double prev_end = -1.0;
        for (const Pause& p : ps) {
            if (p.start_s < 0.0 || !(p.length_s > 0.0))
                throw ConfigError("pause must have non-negative start and positive length");
            if (p.start_s + p.length_s > cfg_.duration_s)
                throw ConfigError("pause extends past clip duration");
            if (p.start_s < prev_end)
                throw ConfigError("pauses must not overlap");
            prev_end = p.start_s + p.length_s;
        }
    }

    // Stripe geometry: bright width 3.5 on a nominal period of 6 (the dark
    // gap of 2.5 keeps neighbouring edge responses separated after the 5x5
    // blur). The half-integer width avoids exact thinning ties at integer
    // line offsets.
    static constexpr double kStripe = 3.5;
    static constexpr double kPeriod = 6.0;

    SynthConfig cfg_;
    TorsoSpec torso_;
    std::vector<double> bounds_;
    double tilt_ = 0.0;
    double period_ms_ = 1000.0 / 24.0;
    std::int64_t nframes_ = 0;
    std::vector<Pause> sorted_pauses_;
};

inline std::pair<FrameSequence, GroundTruth> generate(const SynthConfig& cfg) {
    SynthGenerator gen(cfg);
    FrameSequence seq;
    seq.fps = Fps::of(cfg.fps);
    seq.frames.reserve(static_cast<size_t>(gen.frame_count()));
    for (std::int64_t t = 0; t < gen.frame_count(); ++t)
        seq.frames.push_back(gen.frame(t));
    return {std::move(seq), gen.ground_truth()};
}

// Streams generated frames into the analysis pipeline without materializing
// the whole clip.
class SynthSource : public FrameSource {
public:
    explicit SynthSource(const SynthConfig& cfg) : gen_(cfg) {}
    explicit SynthSource(SynthGenerator gen) : gen_(std::move(gen)) {}

    bool next(GrayFrame& out) override {
        if (idx_ >= gen_.frame_count()) return false;
        out = gen_.frame(idx_++);
        return true;
    }

    Fps fps() const override { return Fps::of(gen_.config().fps); }
    const SynthGenerator& generator() const { return gen_; }

private:
    SynthGenerator gen_;
    std::int64_t idx_ = 0;
};

}  // namespace breathwatch

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>

#include "breathwatch/image.hpp"
#include "breathwatch/roi.hpp"

namespace breathwatch {

struct Centroid {
    double x = 0.0;
    double y = 0.0;
    std::int64_t frame_index = 0;
};

struct Velocity {
    double vx = 0.0;
    double vy = 0.0;
};

struct UnitDirection {
    double ux = 1.0;
    double uy = 0.0;
};

struct BreathSample {
    std::int64_t frame_index = 0;
    double s0 = 0.0;
    double s1 = 0.0;
};

// Mean position of edge pixels inside the rectangle; an edgeless region
// falls back to the rectangle center.
inline Centroid centroid(const EdgeMap& edges, const RoiRect& roi, std::int64_t frame_index = 0) {
    if (roi.x0 < 0 || roi.y0 < 0 || roi.x1 >= edges.width() || roi.y1 >= edges.height())
        throw InputError("ROI outside edge map bounds");
    long n = 0;
    double sx = 0.0, sy = 0.0;
    for (int y = roi.y0; y <= roi.y1; ++y) {
        const std::uint8_t* row = edges.row(y);
        for (int x = roi.x0; x <= roi.x1; ++x) {
            if (row[x]) {
                sx += x;
                sy += y;
                ++n;
            }
        }
    }
    Centroid c;
    c.frame_index = frame_index;
    if (n == 0) {
        c.x = (roi.x0 + roi.x1) / 2.0;
        c.y = (roi.y0 + roi.y1) / 2.0;
    } else {
        c.x = sx / static_cast<double>(n);
        c.y = sy / static_cast<double>(n);
    }
    return c;
}

inline Velocity velocity(const Centroid& cur, const Centroid& prev) {
    if (cur.frame_index != prev.frame_index + 1)
        throw SequencingError("velocity requires consecutive frames");
    return Velocity{cur.x - prev.x, cur.y - prev.y};
}

// Last 10 velocities, newest first.
class VelocityWindow {
public:
    static constexpr int kSize = 10;

    void push(const Velocity& v) {
        head_ = (head_ + kSize - 1) % kSize;
        buf_[head_] = v;
        if (count_ < kSize) ++count_;
    }

    bool full() const { return count_ == kSize; }
    int count() const { return count_; }

    // index 0 = newest
    const Velocity& operator[](int i) const { return buf_[(head_ + i) % kSize]; }

private:
    std::array<Velocity, kSize> buf_{};
    int head_ = 0;
    int count_ = 0;
};

// Dominant eigenvector of the 2x2 scatter matrix of the mean-centered
// window, closed form; sign follows prev_u, degenerate spectra hold it.
inline UnitDirection principal_direction(const VelocityWindow& win,
                                         const UnitDirection* prev_u = nullptr) {
    if (!win.full())
        throw SequencingError("principal_direction requires a full window");
    const UnitDirection fallback = prev_u ? *prev_u : UnitDirection{1.0, 0.0};
    double mx = 0.0, my = 0.0;
    for (int i = 0; i < VelocityWindow::kSize; ++i) {
        mx += win[i].vx;
        my += win[i].vy;
    }
    mx /= VelocityWindow::kSize;
    my /= VelocityWindow::kSize;
    double a = 0.0, b = 0.0, c = 0.0;
    for (int i = 0; i < VelocityWindow::kSize; ++i) {
        double dx = win[i].vx - mx;
        double dy = win[i].vy - my;
        a += dx * dx;
        b += dx * dy;
        c += dy * dy;
    }
    double disc = std::sqrt((a - c) * (a - c) + 4.0 * b * b);
    if (disc == 0.0)
        return fallback;
    double l1 = 0.5 * (a + c + disc);
    double v1x = b, v1y = l1 - a;
    double v2x = l1 - c, v2y = b;
    double q1 = v1x * v1x + v1y * v1y;
    double q2 = v2x * v2x + v2y * v2y;
    double vx = q1 >= q2 ? v1x : v2x;
    double vy = q1 >= q2 ? v1y : v2y;
    double norm = std::sqrt(vx * vx + vy * vy);
    if (norm == 0.0)
        return fallback;
    UnitDirection u{vx / norm, vy / norm};
    if (u.ux * fallback.ux + u.uy * fallback.uy < 0.0) {
        u.ux = -u.ux;
        u.uy = -u.uy;
    }
    return u;
}

inline double project_breath_sample(const UnitDirection& u, const Velocity& v) {
    return u.ux * v.vx + u.uy * v.vy;
}

// 0.8/0.2 blend written so a constant series passes through unchanged.
inline double smooth_sample(double s0_cur, double s0_prev) {
    return s0_prev + 0.8 * (s0_cur - s0_prev);
}

// Sequential per-frame state: previous centroid, velocity window, direction
// continuity and the previous raw sample. Emits one BreathSample per frame
// once the window is full.
class MotionTracker {
public:
    struct FrameState {
        Centroid centroid;
        std::optional<Velocity> velocity;
        std::optional<UnitDirection> direction;
        std::optional<BreathSample> sample;
    };

    FrameState feed(const Centroid& c) {
        FrameState st;
        st.centroid = c;
        if (prev_centroid_) {
            Velocity v = velocity(c, *prev_centroid_);
            window_.push(v);
            st.velocity = v;
            if (window_.full()) {
                u_ = principal_direction(window_, &u_);
                st.direction = u_;
                double s0 = project_breath_sample(u_, v);
                double s1 = prev_s0_ ? smooth_sample(s0, *prev_s0_) : s0;
                prev_s0_ = s0;
                st.sample = BreathSample{c.frame_index, s0, s1};
            }
        }
        prev_centroid_ = c;
        return st;
    }

    const UnitDirection& direction() const { return u_; }

private:
    std::optional<Centroid> prev_centroid_;
    VelocityWindow window_;
    UnitDirection u_{1.0, 0.0};
    std::optional<double> prev_s0_;
};

}  // namespace breathwatch

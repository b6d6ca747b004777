#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "breathwatch/image.hpp"

namespace breathwatch {

// 5x5 smoothing kernel, applied as 1/159 times the integer matrix.
inline constexpr int kBlurKernel[5][5] = {
    {2, 4, 5, 4, 2},
    {4, 9, 12, 9, 4},
    {5, 12, 15, 12, 5},
    {4, 9, 12, 9, 4},
    {2, 4, 5, 4, 2},
};
inline constexpr double kBlurScale = 159.0;

inline constexpr int kSobelX[3][3] = {{-1, 0, 1}, {-2, 0, 2}, {-1, 0, 1}};
inline constexpr int kSobelY[3][3] = {{1, 2, 1}, {0, 0, 0}, {-1, -2, -1}};

struct GradientField {
    RealImage magnitude;
    Image<std::uint8_t> quantized;  // direction bin: 0, 1, 2, 3 for 0, pi/4, pi/2, 3pi/4
    RealImage angle;                // folded to [0, pi); filled only on request
};

struct ThresholdPair {
    double t_low = 0.0;
    double t_high = 0.0;
    double mean = 0.0;
    double stddev = 0.0;
};

// Smooths with the integer kernel; sums stay exact in int32, one division at
// the end. Borders replicate the nearest edge pixel.
inline RealImage gaussian_blur(const GrayImage& src) {
    const int w = src.width(), h = src.height();
    if (w < 5 || h < 5)
        throw InputError("gaussian_blur needs at least a 5x5 frame");
    RealImage out(w, h);
    for (int y = 0; y < h; ++y) {
        const std::uint8_t* rows[5];
        for (int k = 0; k < 5; ++k)
            rows[k] = src.row(detail::clampi(y + k - 2, 0, h - 1));
        double* orow = out.row(y);
        auto clamped = [&](int x) {
            int s = 0;
            for (int ky = 0; ky < 5; ++ky)
                for (int kx = 0; kx < 5; ++kx)
                    s += kBlurKernel[ky][kx] * rows[ky][detail::clampi(x + kx - 2, 0, w - 1)];
            return s;
        };
        for (int x = 0; x < 2; ++x)
            orow[x] = clamped(x) / kBlurScale;
        for (int x = 2; x < w - 2; ++x) {
            int s = 0;
            for (int ky = 0; ky < 5; ++ky) {
                const std::uint8_t* r = rows[ky] + (x - 2);
                for (int kx = 0; kx < 5; ++kx)
                    s += kBlurKernel[ky][kx] * r[kx];
            }
            orow[x] = s / kBlurScale;
        }
        for (int x = w - 2 > 2 ? w - 2 : 2; x < w; ++x)
            orow[x] = clamped(x) / kBlurScale;
    }
    return out;
}

namespace detail {

// tan(pi/8) and tan(3*pi/8): quantization cone boundaries.
inline constexpr double kTanPi8 = 0.41421356237309503;
inline constexpr double kTan3Pi8 = 2.414213562373095;

inline std::uint8_t direction_bin(double dx, double dy, double mag) {
    if (mag == 0.0)
        return 0;
    double adx = dx < 0.0 ? -dx : dx;
    double ady = dy < 0.0 ? -dy : dy;
    double r1 = kTanPi8 * adx;
    if (ady < r1)
        return 0;
    bool pos = (dx > 0.0) == (dy > 0.0);
    double r3 = kTan3Pi8 * adx;
    if (ady > r3)
        return 2;
    if (ady == r3)
        return pos ? 2 : 3;
    if (ady > r1)
        return pos ? 1 : 3;
    return pos ? 1 : 0;  // ady == r1 exactly
}

}  // namespace detail

inline GradientField compute_gradients(const RealImage& smoothed, bool with_angle = false) {
    const int w = smoothed.width(), h = smoothed.height();
    if (w < 3 || h < 3)
        throw InputError("compute_gradients needs at least a 3x3 frame");
    RealImage dx_img(w, h), dy_img(w, h);
    for (int y = 0; y < h; ++y) {
        const double* m0 = smoothed.row(detail::clampi(y - 1, 0, h - 1));
        const double* m1 = smoothed.row(y);
        const double* m2 = smoothed.row(detail::clampi(y + 1, 0, h - 1));
        double* dxr = dx_img.row(y);
        double* dyr = dy_img.row(y);
        auto tap = [&](int x) {
            int xl = detail::clampi(x - 1, 0, w - 1);
            int xr = detail::clampi(x + 1, 0, w - 1);
            double a00 = m0[xl], a01 = m0[x], a02 = m0[xr];
            double a10 = m1[xl], a12 = m1[xr];
            double a20 = m2[xl], a21 = m2[x], a22 = m2[xr];
            double sx = 0.0;
            sx -= a00; sx += a02;
            sx -= 2.0 * a10; sx += 2.0 * a12;
            sx -= a20; sx += a22;
            double sy = 0.0;
            sy += a00; sy += 2.0 * a01; sy += a02;
            sy -= a20; sy -= 2.0 * a21; sy -= a22;
            dxr[x] = sx;
            dyr[x] = sy;
        };
        tap(0);
        for (int x = 1; x < w - 1; ++x) {
            double a00 = m0[x - 1], a01 = m0[x], a02 = m0[x + 1];
            double a10 = m1[x - 1], a12 = m1[x + 1];
            double a20 = m2[x - 1], a21 = m2[x], a22 = m2[x + 1];
            double sx = 0.0;
            sx -= a00; sx += a02;
            sx -= 2.0 * a10; sx += 2.0 * a12;
            sx -= a20; sx += a22;
            double sy = 0.0;
            sy += a00; sy += 2.0 * a01; sy += a02;
            sy -= a20; sy -= 2.0 * a21; sy -= a22;
            dxr[x] = sx;
            dyr[x] = sy;
        }
        tap(w - 1);
    }

    GradientField g;
    g.magnitude = RealImage(w, h);
    g.quantized = Image<std::uint8_t>(w, h);
    {
        const double* dxp = dx_img.data().data();
        const double* dyp = dy_img.data().data();
        double* mp = g.magnitude.data().data();
        const size_t n = g.magnitude.size();
        for (size_t i = 0; i < n; ++i)
            mp[i] = std::sqrt(dxp[i] * dxp[i] + dyp[i] * dyp[i]);
        std::uint8_t* bp = g.quantized.data().data();
        for (size_t i = 0; i < n; ++i)
            bp[i] = detail::direction_bin(dxp[i], dyp[i], mp[i]);
        if (with_angle) {
            g.angle = RealImage(w, h);
            double* ap = g.angle.data().data();
            const double pi = 3.14159265358979323846;
            for (size_t i = 0; i < n; ++i) {
                double a = (dxp[i] == 0.0 && dyp[i] == 0.0) ? 0.0 : std::atan2(dyp[i], dxp[i]);
                if (a < 0.0) a += pi;
                if (a >= pi) a = 0.0;
                ap[i] = a;
            }
        }
    }
    return g;
}

// Non-maximum suppression: a pixel keeps its magnitude iff it is >= both
// neighbors along its quantized direction; ties survive, out-of-bounds
// neighbors count as zero.
inline RealImage thin_edges(const GradientField& grad) {
    const int w = grad.magnitude.width(), h = grad.magnitude.height();
    RealImage thin(w, h, 0.0);
    static constexpr int kOff[4][2][2] = {
        {{1, 0}, {-1, 0}},
        {{1, 1}, {-1, -1}},
        {{0, 1}, {0, -1}},
        {{1, -1}, {-1, 1}},
    };
    const double* mp = grad.magnitude.data().data();
    const std::uint8_t* bp = grad.quantized.data().data();
    double* tp = thin.data().data();
    const long lin1[4] = {1, w + 1, w, -w + 1};
    const long lin2[4] = {-1, -w - 1, -w, w - 1};
    for (int y = 0; y < h; ++y) {
        const bool yin = y > 0 && y < h - 1;
        for (int x = 0; x < w; ++x) {
            const size_t i = static_cast<size_t>(y) * w + x;
            const double m = mp[i];
            const int b = bp[i];
            double n1, n2;
            if (yin && x > 0 && x < w - 1) {
                n1 = mp[i + lin1[b]];
                n2 = mp[i + lin2[b]];
            } else {
                auto nb = [&](int ox, int oy) {
                    int nx = x + ox, ny = y + oy;
                    if (nx < 0 || nx >= w || ny < 0 || ny >= h) return 0.0;
                    return mp[static_cast<size_t>(ny) * w + nx];
                };
                n1 = nb(kOff[b][0][0], kOff[b][0][1]);
                n2 = nb(kOff[b][1][0], kOff[b][1][1]);
            }
            if (m >= n1 && m >= n2)
                tp[i] = m;
        }
    }
    return thin;
}

// Mean and population standard deviation over every entry, zeros included.
inline ThresholdPair adaptive_thresholds(const RealImage& thin) {
    const size_t n = thin.size();
    if (n == 0)
        throw InputError("adaptive_thresholds on empty map");
    const double* p = thin.data().data();
    double sum = 0.0;
    for (size_t i = 0; i < n; ++i)
        sum += p[i];
    double mean = sum / static_cast<double>(n);
    double var = 0.0;
    for (size_t i = 0; i < n; ++i) {
        double d = p[i] - mean;
        var += d * d;
    }
    double stddev = std::sqrt(var / static_cast<double>(n));
    ThresholdPair t;
    t.mean = mean;
    t.stddev = stddev;
    t.t_high = mean + 0.5 * stddev;
    t.t_low = mean - 0.5 * stddev;
    return t;
}

// Two passes: mark pixels above t_high, then promote intermediate pixels
// with a strong 8-neighbor from the first pass. No transitive chaining.
inline EdgeMap hysteresis_link(const RealImage& thin, const ThresholdPair& thr) {
    const int w = thin.width(), h = thin.height();
    const double* tp = thin.data().data();
    EdgeMap strong(w, h, 0);
    std::uint8_t* sp = strong.data().data();
    const size_t n = thin.size();
    for (size_t i = 0; i < n; ++i)
        sp[i] = tp[i] > thr.t_high ? 1 : 0;
    EdgeMap out = strong;
    std::uint8_t* op = out.data().data();
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const size_t i = static_cast<size_t>(y) * w + x;
            if (sp[i] || tp[i] < thr.t_low || tp[i] > thr.t_high)
                continue;
            bool hit = false;
            for (int oy = -1; oy <= 1 && !hit; ++oy) {
                int ny = y + oy;
                if (ny < 0 || ny >= h) continue;
                for (int ox = -1; ox <= 1; ++ox) {
                    int nx = x + ox;
                    if ((ox == 0 && oy == 0) || nx < 0 || nx >= w) continue;
                    if (sp[static_cast<size_t>(ny) * w + nx]) {
                        hit = true;
                        break;
                    }
                }
            }
            if (hit)
                op[i] = 1;
        }
    }
    return out;
}

#ifdef BREATHWATCH_CLASSIC_HYSTERESIS
// Classic transitive variant for comparison experiments: intermediates
// connected to a strong pixel through other intermediates also survive.
inline EdgeMap hysteresis_link_chained(const RealImage& thin, const ThresholdPair& thr) {
    const int w = thin.width(), h = thin.height();
    const double* tp = thin.data().data();
    EdgeMap out(w, h, 0);
    std::uint8_t* op = out.data().data();
    std::vector<size_t> stack;
    const size_t n = thin.size();
    for (size_t i = 0; i < n; ++i) {
        if (tp[i] > thr.t_high) {
            op[i] = 1;
            stack.push_back(i);
        }
    }
    while (!stack.empty()) {
        size_t i = stack.back();
        stack.pop_back();
        int x = static_cast<int>(i % w), y = static_cast<int>(i / w);
        for (int oy = -1; oy <= 1; ++oy) {
            for (int ox = -1; ox <= 1; ++ox) {
                if (ox == 0 && oy == 0) continue;
                int nx = x + ox, ny = y + oy;
                if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
                size_t j = static_cast<size_t>(ny) * w + nx;
                if (op[j] || tp[j] < thr.t_low || tp[j] > thr.t_high) continue;
                op[j] = 1;
                stack.push_back(j);
            }
        }
    }
    return out;
}
#endif

struct EdgeStages {
    RealImage blurred;
    GradientField gradients;
    RealImage thin;
    ThresholdPair thresholds;
    EdgeMap edges;
};

inline EdgeStages detect_edges_stages(const GrayImage& frame, bool with_angle = false) {
    EdgeStages s;
    s.blurred = gaussian_blur(frame);
    s.gradients = compute_gradients(s.blurred, with_angle);
    s.thin = thin_edges(s.gradients);
    s.thresholds = adaptive_thresholds(s.thin);
    s.edges = hysteresis_link(s.thin, s.thresholds);
    return s;
}

inline EdgeMap detect_edges(const GrayImage& frame) {
    RealImage blurred = gaussian_blur(frame);
    GradientField grad = compute_gradients(blurred);
    RealImage thin = thin_edges(grad);
    ThresholdPair thr = adaptive_thresholds(thin);
    return hysteresis_link(thin, thr);
}

inline EdgeMap detect_edges(const GrayFrame& frame) { return detect_edges(frame.pixels); }

}  // namespace breathwatch

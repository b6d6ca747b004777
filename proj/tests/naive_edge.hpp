#pragma once

// Plain-form reference for the edge stages, written straight from the
// definitions: generic kernel loops, atan2 direction binning, coordinate
// neighbor lookups. The optimized library path must agree with this
// bit for bit; tests compare stage by stage.

#include <cmath>
#include <cstdint>

#include "breathwatch/edge.hpp"
#include "breathwatch/image.hpp"

namespace naive {

using breathwatch::EdgeMap;
using breathwatch::GradientField;
using breathwatch::GrayImage;
using breathwatch::RealImage;
using breathwatch::ThresholdPair;

inline int clampi(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }

inline double sample(const RealImage& img, int x, int y) {
    return img.at(clampi(x, 0, img.width() - 1), clampi(y, 0, img.height() - 1));
}

inline RealImage blur(const GrayImage& src) {
    static const long K[5][5] = {{2, 4, 5, 4, 2},
                                 {4, 9, 12, 9, 4},
                                 {5, 12, 15, 12, 5},
                                 {4, 9, 12, 9, 4},
                                 {2, 4, 5, 4, 2}};
    RealImage out(src.width(), src.height());
    for (int y = 0; y < src.height(); ++y) {
        for (int x = 0; x < src.width(); ++x) {
            long acc = 0;
            for (int ky = -2; ky <= 2; ++ky)
                for (int kx = -2; kx <= 2; ++kx) {
                    int sx = clampi(x + kx, 0, src.width() - 1);
                    int sy = clampi(y + ky, 0, src.height() - 1);
                    acc += K[ky + 2][kx + 2] * static_cast<long>(src.at(sx, sy));
                }
            out.at(x, y) = static_cast<double>(acc) / 159.0;
        }
    }
    return out;
}

inline GradientField gradients(const RealImage& smoothed) {
    static const double KX[3][3] = {{-1, 0, 1}, {-2, 0, 2}, {-1, 0, 1}};
    static const double KY[3][3] = {{1, 2, 1}, {0, 0, 0}, {-1, -2, -1}};
    const int w = smoothed.width(), h = smoothed.height();
    RealImage dx(w, h), dy(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double sx = 0.0, sy = 0.0;
            for (int ky = -1; ky <= 1; ++ky)
                for (int kx = -1; kx <= 1; ++kx) {
                    double v = sample(smoothed, x + kx, y + ky);
                    sx += KX[ky + 1][kx + 1] * v;
                    sy += KY[ky + 1][kx + 1] * v;
                }
            dx.at(x, y) = sx;
            dy.at(x, y) = sy;
        }
    }
    GradientField g;
    g.magnitude = RealImage(w, h);
    g.quantized = breathwatch::Image<std::uint8_t>(w, h);
    const double pi = 3.14159265358979323846;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double gx = dx.at(x, y), gy = dy.at(x, y);
            double mag = std::sqrt(gx * gx + gy * gy);
            g.magnitude.at(x, y) = mag;
            std::uint8_t bin = 0;
            if (mag != 0.0) {
                double a = std::atan2(gy, gx);
                if (a < 0.0) a += pi;
                if (a >= pi) a = 0.0;
                if (a < pi / 8.0)
                    bin = 0;
                else if (a < 3.0 * pi / 8.0)
                    bin = 1;
                else if (a < 5.0 * pi / 8.0)
                    bin = 2;
                else if (a < 7.0 * pi / 8.0)
                    bin = 3;
                else
                    bin = 0;
            }
            g.quantized.at(x, y) = bin;
        }
    }
    return g;
}

inline RealImage suppress(const GradientField& g) {
    const int w = g.magnitude.width(), h = g.magnitude.height();
    RealImage out(w, h, 0.0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            int ox, oy;
            switch (g.quantized.at(x, y)) {
                case 0: ox = 1; oy = 0; break;
                case 1: ox = 1; oy = 1; break;
                case 2: ox = 0; oy = 1; break;
                default: ox = 1; oy = -1; break;
            }
            auto mag_at = [&](int nx, int ny) {
                if (nx < 0 || nx >= w || ny < 0 || ny >= h) return 0.0;
                return g.magnitude.at(nx, ny);
            };
            double m = g.magnitude.at(x, y);
            if (m >= mag_at(x + ox, y + oy) && m >= mag_at(x - ox, y - oy))
                out.at(x, y) = m;
        }
    }
    return out;
}

inline ThresholdPair thresholds(const RealImage& thin) {
    double sum = 0.0;
    for (int y = 0; y < thin.height(); ++y)
        for (int x = 0; x < thin.width(); ++x)
            sum += thin.at(x, y);
    double n = static_cast<double>(thin.size());
    double mean = sum / n;
    double acc = 0.0;
    for (int y = 0; y < thin.height(); ++y)
        for (int x = 0; x < thin.width(); ++x) {
            double d = thin.at(x, y) - mean;
            acc += d * d;
        }
    ThresholdPair t;
    t.mean = mean;
    t.stddev = std::sqrt(acc / n);
    t.t_high = mean + 0.5 * t.stddev;
    t.t_low = mean - 0.5 * t.stddev;
    return t;
}

inline EdgeMap link(const RealImage& thin, const ThresholdPair& t) {
    const int w = thin.width(), h = thin.height();
    EdgeMap strong(w, h, 0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            strong.at(x, y) = thin.at(x, y) > t.t_high ? 1 : 0;
    EdgeMap out(w, h, 0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (strong.at(x, y)) {
                out.at(x, y) = 1;
                continue;
            }
            double v = thin.at(x, y);
            if (v < t.t_low || v > t.t_high)
                continue;
            for (int ny = y - 1; ny <= y + 1; ++ny)
                for (int nx = x - 1; nx <= x + 1; ++nx) {
                    if (nx == x && ny == y) continue;
                    if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
                    if (strong.at(nx, ny)) out.at(x, y) = 1;
                }
        }
    }
    return out;
}

inline EdgeMap detect(const GrayImage& frame) {
    RealImage smoothed = blur(frame);
    GradientField g = gradients(smoothed);
    RealImage thin = suppress(g);
    ThresholdPair t = thresholds(thin);
    return link(thin, t);
}

}  // namespace naive

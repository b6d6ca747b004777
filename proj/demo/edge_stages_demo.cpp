// Renders one synthetic frame, runs the staged edge detector on it, and
// prints a tiny ASCII strip chart of each stage plus the threshold stats.

#include <cstdio>

#include "breathwatch/breathwatch.hpp"

using namespace breathwatch;

namespace {

void ascii_row(const char* label, const RealImage& img, int y) {
    static const char ramp[] = " .:-=+*#%@";
    double peak = 1e-12;
    for (int x = 0; x < img.width(); ++x) peak = std::max(peak, img.at(x, y));
    std::printf("%-10s|", label);
    for (int x = 0; x < img.width(); x += 2) {
        int idx = static_cast<int>(img.at(x, y) / peak * 9.0);
        std::putchar(ramp[idx < 0 ? 0 : (idx > 9 ? 9 : idx)]);
    }
    std::printf("|\n");
}

}  // namespace

int main() {
    SynthConfig cfg;
    cfg.width = 96;
    cfg.height = 64;
    cfg.duration_s = 1.0;
    SynthGenerator gen(cfg);
    GrayFrame frame = gen.frame(0);

    EdgeStages stages = detect_edges_stages(frame.pixels);

    const int y = cfg.height / 2;
    RealImage raw(frame.width(), frame.height());
    for (int yy = 0; yy < frame.height(); ++yy)
        for (int xx = 0; xx < frame.width(); ++xx)
            raw.at(xx, yy) = frame.pixels.at(xx, yy);
    ascii_row("input", raw, y);
    ascii_row("blurred", stages.blurred, y);
    ascii_row("magnitude", stages.gradients.magnitude, y);
    ascii_row("thinned", stages.thin, y);

    std::printf("%-10s|", "edges");
    for (int x = 0; x < stages.edges.width(); x += 2)
        std::putchar(stages.edges.at(x, y) ? '#' : ' ');
    std::printf("|\n\n");

    long count = 0;
    for (int yy = 0; yy < stages.edges.height(); ++yy)
        for (int xx = 0; xx < stages.edges.width(); ++xx)
            if (stages.edges.at(xx, yy)) ++count;
    std::printf("mean %.3f stddev %.3f -> t_low %.3f t_high %.3f, %ld edge pixels\n",
                stages.thresholds.mean, stages.thresholds.stddev, stages.thresholds.t_low,
                stages.thresholds.t_high, count);
    return 0;
}

// Generates a short clip with one long breathing pause and runs the full
// monitoring pipeline on it, printing intervals and window severities.

#include <cstdio>

#include "breathwatch/breathwatch.hpp"

using namespace breathwatch;

int main() {
    SynthConfig cfg;
    cfg.width = 160;
    cfg.height = 120;
    cfg.fps = 12.0;
    cfg.duration_s = 60.0;
    cfg.pauses.push_back(Pause{25.0, 17.0});

    SynthSource src(cfg);
    RoiProvider roi = RoiProvider::fixed(
        *roi_rect(src.generator().true_roi_box(), cfg.width, cfg.height));

    AnalyzeOptions opt;
    opt.window_ms = 60000.0;
    AnalysisResult res = analyze_stream(src, roi, opt);

    std::printf("%lld frames (%.1f s) analyzed at %.0f fps\n",
                static_cast<long long>(res.frames), res.duration_ms / 1000.0,
                res.fps_processed);
    for (const BreathInterval& iv : res.breath.intervals)
        std::printf("breath %2d  interval %7.1f ms\n", iv.number, iv.ms);
    for (const ApneaEvent& e : res.events)
        std::printf("pause of %.1f s starting at %.1f s\n", e.length_ms / 1000.0,
                    e.start_ms / 1000.0);
    for (size_t i = 0; i < res.apnea.windows.size(); ++i) {
        const ApneaWindow& w = res.apnea.windows[i];
        std::printf("window %zu [%5.1f s, %5.1f s)  severity %d%s\n", i,
                    w.start_ms / 1000.0, w.end_ms / 1000.0, w.severity,
                    w.severity > 0 ? "  << ALERT" : "");
    }
    return 0;
}

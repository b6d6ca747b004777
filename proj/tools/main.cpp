#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "breathwatch/breathwatch.hpp"
#include "breathwatch/report_io.hpp"

namespace fs = std::filesystem;
namespace bw = breathwatch;

namespace {

bw::SequenceFormat resolve_format(const fs::path& input, const std::string& flag) {
    if (flag == "pgm-dir") return bw::SequenceFormat::PgmDir;
    if (flag == "y4m") return bw::SequenceFormat::Y4m;
    if (flag == "raw") return bw::SequenceFormat::RawPlanar;
    if (!flag.empty())
        throw bw::ConfigError("unknown --format " + flag);
    if (fs::is_directory(input)) return bw::SequenceFormat::PgmDir;
    std::string ext = input.extension().string();
    if (ext == ".y4m") return bw::SequenceFormat::Y4m;
    if (ext == ".raw" || ext == ".gray" || ext == ".yuv")
        return bw::SequenceFormat::RawPlanar;
    throw bw::ConfigError("cannot infer format of " + input.string() + "; pass --format");
}

bw::RoiRect parse_roi_flag(const std::string& s) {
    int v[4];
    char extra;
    if (std::sscanf(s.c_str(), "%d,%d,%d,%d%c", &v[0], &v[1], &v[2], &v[3], &extra) != 4)
        throw bw::ConfigError("--roi expects x0,y0,x1,y1");
    bw::RoiRect r{v[0], v[2], v[1], v[3]};
    if (r.x1 < r.x0 || r.y1 < r.y0 || r.x0 < 0 || r.y0 < 0)
        throw bw::ConfigError("--roi rectangle is empty or negative");
    return r;
}

bw::Pause parse_pause_flag(const std::string& s) {
    double start = 0.0, len = 0.0;
    char extra;
    if (std::sscanf(s.c_str(), "%lf:%lf%c", &start, &len, &extra) != 2)
        throw bw::ConfigError("--pause expects start_s:length_s");
    return bw::Pause{start, len};
}

struct AnalyzeArgs {
    std::string input;
    std::string format;
    double fps = 24.0;
    int width = 0;
    int height = 0;
    std::string roi;
    std::string roi_track;
    double window_ms = 200000.0;
    double pause_ms = 15000.0;
    bool peaks_as_printed = false;
    bool full_frame_edges = false;
    int jobs = 1;
    std::string dump_signal;
    std::string out_dir = ".";
};

int run_analyze(const AnalyzeArgs& a) {
    bw::SequenceFormat fmt = resolve_format(a.input, a.format);
    if (fmt == bw::SequenceFormat::RawPlanar && (a.width <= 0 || a.height <= 0))
        throw bw::ConfigError("raw input needs --width and --height");
    auto src = bw::open_source(a.input, fmt, bw::Fps::of(a.fps), a.width, a.height);

    bw::RoiProvider roi = a.roi.empty()
                              ? bw::RoiProvider::from_track(bw::load_roi_track(a.roi_track))
                              : bw::RoiProvider::fixed(parse_roi_flag(a.roi));

    bw::AnalyzeOptions opt;
    opt.window_ms = a.window_ms;
    opt.pause_ms = a.pause_ms;
    opt.peak_rule = a.peaks_as_printed ? bw::PeakRule::AsPrinted : bw::PeakRule::Corrected;
    opt.full_frame_edges = a.full_frame_edges;
    opt.jobs = a.jobs;
    opt.want_signal = !a.dump_signal.empty();

    bw::AnalysisResult res = bw::analyze_stream(*src, roi, opt);

    fs::create_directories(a.out_dir);
    bw::write_intervals_csv(fs::path(a.out_dir) / "intervals.csv", res.breath);
    bw::write_apnea_json(fs::path(a.out_dir) / "apnea.json", res.apnea);
    bw::RunMeta meta;
    meta.input = a.input;
    meta.roi_mode = a.roi.empty() ? "track" : "fixed";
    meta.edges = a.full_frame_edges ? "full-frame" : "roi";
    meta.peak_rule = a.peaks_as_printed ? "as-printed" : "corrected";
    meta.jobs = a.jobs;
    bw::write_run_json(fs::path(a.out_dir) / "run.json", res, meta);
    if (!a.dump_signal.empty())
        bw::write_signal_csv(fs::path(a.dump_signal), res.signal);

    int status = 0;
    for (size_t i = 0; i < res.apnea.windows.size(); ++i) {
        const bw::ApneaWindow& w = res.apnea.windows[i];
        if (w.severity > 0) {
            std::fprintf(stderr, "APNEA window=%zu severity=%d\n", i, w.severity);
            status = 2;
        }
    }
    std::fprintf(stdout,
                 "%lld frames in %.1f ms (%.1f fps); %zu breaths, %zu intervals\n",
                 static_cast<long long>(res.frames), res.processing_ms, res.fps_processed,
                 res.breath.peaks_ms.size(), res.breath.intervals.size());
    return status;
}

struct GenArgs {
    std::string config;
    std::string out_dir;
    int jobs = 1;
    int width = 0;
    int height = 0;
    double fps = 0.0;
    double duration = 0.0;
    double bpm = 0.0;
    double amplitude = 0.0;
    double sigma = -1.0;
    std::uint64_t seed = 0;
    bool seed_set = false;
    bool square_wave = false;
    std::vector<std::string> pauses;
};

bw::SynthConfig config_from_json(const fs::path& path) {
    nlohmann::json j = bw::detail::load_json(path);
    bw::SynthConfig c;
    try {
        c.width = j.value("width", c.width);
        c.height = j.value("height", c.height);
        c.fps = j.value("fps", c.fps);
        c.duration_s = j.value("duration_s", c.duration_s);
        c.breaths_per_min = j.value("breaths_per_min", c.breaths_per_min);
        c.amplitude_px = j.value("amplitude_px", c.amplitude_px);
        c.noise_sigma = j.value("noise_sigma", c.noise_sigma);
        c.seed = j.value("seed", c.seed);
        c.square_wave = j.value("square_wave", c.square_wave);
        if (j.contains("pauses"))
            for (const auto& p : j.at("pauses"))
                c.pauses.push_back(
                    bw::Pause{p.at("start_s").get<double>(), p.at("length_s").get<double>()});
        if (j.contains("torso")) {
            const auto& t = j.at("torso");
            c.torso.cx = t.value("cx", c.torso.cx);
            c.torso.cy = t.value("cy", c.torso.cy);
            c.torso.width = t.value("width", c.torso.width);
            c.torso.height = t.value("height", c.torso.height);
            c.torso.bright = t.value("bright", c.torso.bright);
            c.torso.dark = t.value("dark", c.torso.dark);
        }
    } catch (const nlohmann::json::exception& e) {
        throw bw::ConfigError(path.string() + ": " + e.what());
    }
    return c;
}

int run_gen(const GenArgs& a) {
    bw::SynthConfig cfg;
    if (!a.config.empty()) cfg = config_from_json(a.config);
    if (a.width > 0) cfg.width = a.width;
    if (a.height > 0) cfg.height = a.height;
    if (a.fps > 0.0) cfg.fps = a.fps;
    if (a.duration > 0.0) cfg.duration_s = a.duration;
    if (a.bpm > 0.0) cfg.breaths_per_min = a.bpm;
    if (a.amplitude > 0.0) cfg.amplitude_px = a.amplitude;
    if (a.sigma >= 0.0) cfg.noise_sigma = a.sigma;
    if (a.seed_set) cfg.seed = a.seed;
    if (a.square_wave) cfg.square_wave = true;
    for (const std::string& p : a.pauses) cfg.pauses.push_back(parse_pause_flag(p));

    std::int64_t n = bw::write_synth_clip(cfg, a.out_dir, a.jobs);
    std::fprintf(stdout, "wrote %lld frames to %s\n", static_cast<long long>(n),
                 a.out_dir.c_str());
    return 0;
}

int run_evaluate(const std::string& pred, const std::string& truth, const std::string& out) {
    bw::RunData run = bw::read_run_json(pred);
    bw::TruthData gt = bw::read_truth_json(truth);
    bw::EvalMetrics m = bw::compute_metrics(run, gt);
    bw::write_metrics_json(out, m);
    auto show = [](const char* k, const std::optional<double>& v) {
        if (v)
            std::fprintf(stdout, "%s=%.4f\n", k, *v);
        else
            std::fprintf(stdout, "%s=n/a\n", k);
    };
    show("box_accuracy", m.box_accuracy);
    show("cycle_accuracy", m.cycle_accuracy);
    show("dar", m.dar);
    show("far", m.far);
    std::fprintf(stdout, "counts tp=%lld fp=%lld tn=%lld fn=%lld\n",
                 static_cast<long long>(m.counts.tp), static_cast<long long>(m.counts.fp),
                 static_cast<long long>(m.counts.tn), static_cast<long long>(m.counts.fn));
    return 0;
}

void write_scaled_pgm(const fs::path& path, const bw::RealImage& img) {
    double peak = 0.0;
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
            peak = std::max(peak, img.at(x, y));
    bw::GrayImage out(img.width(), img.height());
    double scale = peak > 0.0 ? 255.0 / peak : 0.0;
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) {
            double v = std::nearbyint(img.at(x, y) * scale);
            out.at(x, y) = static_cast<std::uint8_t>(v < 0.0 ? 0.0 : (v > 255.0 ? 255.0 : v));
        }
    bw::write_pgm(path, out);
}

int run_debug_edges(const std::string& input, const std::string& format, double fps,
                    int width, int height, std::int64_t frame_no, const std::string& out_dir) {
    bw::SequenceFormat fmt = resolve_format(input, format);
    if (fmt == bw::SequenceFormat::RawPlanar && (width <= 0 || height <= 0))
        throw bw::ConfigError("raw input needs --width and --height");
    auto src = bw::open_source(input, fmt, bw::Fps::of(fps), width, height);
    bw::GrayFrame f;
    std::int64_t seen = -1;
    while (src->next(f)) {
        seen = f.frame_index;
        if (seen == frame_no) break;
    }
    if (seen != frame_no)
        throw bw::InputError("frame " + std::to_string(frame_no) + " past end of input");

    bw::EdgeStages st = bw::detect_edges_stages(f.pixels);
    fs::create_directories(out_dir);
    bw::GrayImage blurred(st.blurred.width(), st.blurred.height());
    for (int y = 0; y < blurred.height(); ++y)
        for (int x = 0; x < blurred.width(); ++x) {
            double v = std::nearbyint(st.blurred.at(x, y));
            blurred.at(x, y) =
                static_cast<std::uint8_t>(v < 0.0 ? 0.0 : (v > 255.0 ? 255.0 : v));
        }
    bw::write_pgm(fs::path(out_dir) / "blurred.pgm", blurred);
    write_scaled_pgm(fs::path(out_dir) / "magnitude.pgm", st.gradients.magnitude);
    write_scaled_pgm(fs::path(out_dir) / "thin.pgm", st.thin);
    bw::GrayImage edges(st.edges.width(), st.edges.height());
    for (int y = 0; y < edges.height(); ++y)
        for (int x = 0; x < edges.width(); ++x)
            edges.at(x, y) = st.edges.at(x, y) ? 255 : 0;
    bw::write_pgm(fs::path(out_dir) / "edges.pgm", edges);
    std::fprintf(stdout, "t_low=%.6f t_high=%.6f mean=%.6f stddev=%.6f\n",
                 st.thresholds.t_low, st.thresholds.t_high, st.thresholds.mean,
                 st.thresholds.stddev);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"camera-based breathing monitor"};
    app.require_subcommand(1);

    AnalyzeArgs an;
    CLI::App* analyze = app.add_subcommand("analyze", "detect breaths and apnea in a clip");
    analyze->add_option("--input", an.input, "frame source (pgm dir, .y4m, raw planar)")
        ->required();
    analyze->add_option("--format", an.format, "pgm-dir|y4m|raw (default: inferred)");
    analyze->add_option("--fps", an.fps, "frame rate for pgm-dir/raw inputs");
    analyze->add_option("--width", an.width, "frame width for raw input");
    analyze->add_option("--height", an.height, "frame height for raw input");
    auto* roi_opt = analyze->add_option("--roi", an.roi, "fixed rectangle x0,y0,x1,y1");
    auto* trk_opt =
        analyze->add_option("--roi-track", an.roi_track, "ROI track CSV (frame,pc,bx,by,bw,bh)");
    roi_opt->excludes(trk_opt);
    analyze->add_option("--window-ms", an.window_ms, "severity window length");
    analyze->add_option("--pause-ms", an.pause_ms, "minimum gap counted as a pause");
    analyze->add_flag("--peaks-as-printed", an.peaks_as_printed,
                      "use the rising-point peak rule");
    analyze->add_flag("--full-frame-edges", an.full_frame_edges,
                      "run edge detection on whole frames, not the ROI crop");
    analyze->add_option("--jobs", an.jobs, "worker threads for per-frame stages");
    analyze->add_option("--dump-signal", an.dump_signal, "write per-frame signal CSV here");
    analyze->add_option("--out", an.out_dir, "output directory (default .)");

    GenArgs gen;
    CLI::App* gensub = app.add_subcommand("gen-synth", "render a synthetic breathing clip");
    gensub->add_option("--config", gen.config, "JSON config; flags override");
    gensub->add_option("--out", gen.out_dir, "output directory")->required();
    gensub->add_option("--jobs", gen.jobs, "worker threads for rendering");
    gensub->add_option("--width", gen.width, "frame width");
    gensub->add_option("--height", gen.height, "frame height");
    gensub->add_option("--fps", gen.fps, "frame rate");
    gensub->add_option("--duration", gen.duration, "clip length in seconds");
    gensub->add_option("--bpm", gen.bpm, "breaths per minute");
    gensub->add_option("--amplitude", gen.amplitude, "breathing amplitude in pixels");
    gensub->add_option("--sigma", gen.sigma, "gaussian pixel noise level");
    auto* seed_opt = gensub->add_option("--seed", gen.seed, "noise seed");
    gensub->add_flag("--square-wave", gen.square_wave, "square displacement waveform");
    gensub->add_option("--pause", gen.pauses, "breathing pause start_s:length_s (repeatable)");

    std::string ev_pred, ev_truth, ev_out = "metrics.json";
    CLI::App* ev = app.add_subcommand("evaluate", "score a run against ground truth");
    ev->add_option("--pred", ev_pred, "run.json from analyze")->required();
    ev->add_option("--truth", ev_truth, "truth.json from gen-synth")->required();
    ev->add_option("--out", ev_out, "metrics output path");

    std::string dbg_input, dbg_format, dbg_out = "edge-stages";
    double dbg_fps = 24.0;
    int dbg_w = 0, dbg_h = 0;
    std::int64_t dbg_frame = 0;
    CLI::App* dbg = app.add_subcommand("debug-edges", "dump per-stage edge detector images");
    dbg->add_option("--input", dbg_input, "frame source")->required();
    dbg->add_option("--format", dbg_format, "pgm-dir|y4m|raw (default: inferred)");
    dbg->add_option("--fps", dbg_fps, "frame rate for pgm-dir/raw inputs");
    dbg->add_option("--width", dbg_w, "frame width for raw input");
    dbg->add_option("--height", dbg_h, "frame height for raw input");
    dbg->add_option("--frame", dbg_frame, "frame index to dump");
    dbg->add_option("--out", dbg_out, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*analyze) {
            if (an.roi.empty() && an.roi_track.empty())
                throw bw::ConfigError("analyze needs --roi or --roi-track");
            return run_analyze(an);
        }
        if (*gensub) {
            gen.seed_set = seed_opt->count() > 0;
            return run_gen(gen);
        }
        if (*ev) return run_evaluate(ev_pred, ev_truth, ev_out);
        if (*dbg)
            return run_debug_edges(dbg_input, dbg_format, dbg_fps, dbg_w, dbg_h, dbg_frame,
                                   dbg_out);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}

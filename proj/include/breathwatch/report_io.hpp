#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "breathwatch/breath.hpp"
#include "breathwatch/eval.hpp"
#include "breathwatch/frame_io.hpp"
#include "breathwatch/image.hpp"
#include "breathwatch/parallel.hpp"
#include "breathwatch/pipeline.hpp"
#include "breathwatch/roi.hpp"
#include "breathwatch/synth.hpp"

namespace breathwatch {

namespace detail {

// Round-trip exact decimal form; %g drops trailing zeros so integral
// values print bare.
inline std::string g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw InputError("cannot write " + path.string());
    return out;
}

inline nlohmann::json load_json(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw InputError("cannot open " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

}  // namespace detail

inline void write_intervals_csv(std::ostream& out, const BreathReport& r) {
    out << "breath,interval_ms\n";
    for (const BreathInterval& iv : r.intervals)
        out << iv.number << ',' << detail::g17(iv.ms) << '\n';
}

inline void write_intervals_csv(const std::filesystem::path& path, const BreathReport& r) {
    auto out = detail::open_out(path);
    write_intervals_csv(out, r);
}

inline nlohmann::json apnea_to_json(const ApneaReport& rep) {
    nlohmann::json j;
    j["window_ms"] = rep.window_ms;
    j["pause_ms"] = rep.pause_ms;
    j["windows"] = nlohmann::json::array();
    for (const ApneaWindow& w : rep.windows)
        j["windows"].push_back({{"window_start_ms", w.start_ms},
                                {"window_end_ms", w.end_ms},
                                {"severity", w.severity}});
    return j;
}

inline void write_apnea_json(const std::filesystem::path& path, const ApneaReport& rep) {
    auto out = detail::open_out(path);
    out << apnea_to_json(rep).dump(2) << '\n';
}

inline void write_signal_csv(std::ostream& out, std::span<const SignalRow> rows) {
    out << "frame,cx,cy,vx,vy,ux,uy,s0,s1\n";
    auto opt = [&](const std::optional<double>& v) {
        out << ',';
        if (v) out << detail::g17(*v);
    };
    for (const SignalRow& r : rows) {
        out << r.frame << ',' << detail::g17(r.cx) << ',' << detail::g17(r.cy);
        opt(r.vx);
        opt(r.vy);
        opt(r.ux);
        opt(r.uy);
        opt(r.s0);
        opt(r.s1);
        out << '\n';
    }
}

inline void write_signal_csv(const std::filesystem::path& path,
                             std::span<const SignalRow> rows) {
    auto out = detail::open_out(path);
    write_signal_csv(out, rows);
}

struct RunMeta {
    std::string input;
    std::string roi_mode;  // "fixed" or "track"
    std::string edges;     // "roi" or "full-frame"
    std::string peak_rule; // "corrected" or "as-printed"
    int jobs = 1;
};

inline nlohmann::json run_to_json(const AnalysisResult& res, const RunMeta& meta) {
    nlohmann::json j;
    j["schema"] = "breathwatch-run/1";
    j["input"] = meta.input;
    j["frames"] = res.frames;
    j["fps"] = res.fps.value();
    j["duration_ms"] = res.duration_ms;
    j["window_ms"] = res.apnea.window_ms;
    j["pause_ms"] = res.apnea.pause_ms;
    j["peak_rule"] = meta.peak_rule;
    j["edges"] = meta.edges;
    j["jobs"] = meta.jobs;
    j["processing_ms"] = res.processing_ms;
    j["fps_processed"] = res.fps_processed;
    nlohmann::json spans = nlohmann::json::array();
    for (const RoiSpan& s : res.roi_spans)
        spans.push_back({{"from_frame", s.from_frame},
                         {"rect",
                          {{"x0", s.rect.x0},
                           {"x1", s.rect.x1},
                           {"y0", s.rect.y0},
                           {"y1", s.rect.y1}}}});
    j["roi"] = {{"mode", meta.roi_mode}, {"spans", spans}};
    j["peaks_ms"] = res.breath.peaks_ms;
    j["apnea_events"] = nlohmann::json::array();
    for (const ApneaEvent& e : res.events)
        j["apnea_events"].push_back({{"start_ms", e.start_ms}, {"length_ms", e.length_ms}});
    j["windows"] = apnea_to_json(res.apnea)["windows"];
    return j;
}

inline void write_run_json(const std::filesystem::path& path, const AnalysisResult& res,
                           const RunMeta& meta) {
    auto out = detail::open_out(path);
    out << run_to_json(res, meta).dump(2) << '\n';
}

struct RunData {
    std::int64_t frames = 0;
    double fps = 0.0;
    double duration_ms = 0.0;
    double window_ms = 0.0;
    double pause_ms = 0.0;
    double fps_processed = 0.0;
    std::vector<double> peaks_ms;
    std::vector<ApneaEvent> events;
    std::vector<RoiSpan> roi_spans;
};

inline RunData read_run_json(const std::filesystem::path& path) {
    nlohmann::json j = detail::load_json(path);
    RunData d;
    try {
        d.frames = j.at("frames").get<std::int64_t>();
        d.fps = j.at("fps").get<double>();
        d.duration_ms = j.at("duration_ms").get<double>();
        d.window_ms = j.at("window_ms").get<double>();
        d.pause_ms = j.at("pause_ms").get<double>();
        d.fps_processed = j.value("fps_processed", 0.0);
        d.peaks_ms = j.at("peaks_ms").get<std::vector<double>>();
        for (const auto& e : j.at("apnea_events"))
            d.events.push_back(
                ApneaEvent{e.at("start_ms").get<double>(), e.at("length_ms").get<double>()});
        for (const auto& s : j.at("roi").at("spans")) {
            RoiSpan sp;
            sp.from_frame = s.at("from_frame").get<std::int64_t>();
            const auto& r = s.at("rect");
            sp.rect = RoiRect{r.at("x0").get<int>(), r.at("x1").get<int>(),
                              r.at("y0").get<int>(), r.at("y1").get<int>()};
            d.roi_spans.push_back(sp);
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    return d;
}

inline nlohmann::json truth_to_json(const SynthGenerator& gen) {
    const SynthConfig& cfg = gen.config();
    GroundTruth gt = gen.ground_truth();
    nlohmann::json j;
    j["schema"] = "breathwatch-truth/1";
    j["fps"] = cfg.fps;
    j["width"] = cfg.width;
    j["height"] = cfg.height;
    j["frames"] = gen.frame_count();
    j["duration_ms"] = static_cast<double>(gen.frame_count()) * gen.frame_period_ms();
    j["peaks_ms"] = gt.peaks_ms;
    j["apnea_events"] = nlohmann::json::array();
    for (const ApneaEvent& e : gt.apnea_events)
        j["apnea_events"].push_back({{"start_ms", e.start_ms}, {"length_ms", e.length_ms}});
    j["roi_box"] = {{"pc", gt.roi.pc},
                    {"bx", gt.roi.bx},
                    {"by", gt.roi.by},
                    {"bw", gt.roi.bw},
                    {"bh", gt.roi.bh}};
    j["config"] = {{"breaths_per_min", cfg.breaths_per_min},
                   {"amplitude_px", cfg.amplitude_px},
                   {"noise_sigma", cfg.noise_sigma},
                   {"seed", cfg.seed},
                   {"square_wave", cfg.square_wave},
                   {"duration_s", cfg.duration_s}};
    nlohmann::json pauses = nlohmann::json::array();
    for (const Pause& p : cfg.pauses)
        pauses.push_back({{"start_s", p.start_s}, {"length_s", p.length_s}});
    j["config"]["pauses"] = pauses;
    return j;
}

inline void write_truth_json(const std::filesystem::path& path, const SynthGenerator& gen) {
    auto out = detail::open_out(path);
    out << truth_to_json(gen).dump(2) << '\n';
}

struct TruthData {
    double fps = 0.0;
    int width = 0;
    int height = 0;
    std::int64_t frames = 0;
    double duration_ms = 0.0;
    std::vector<double> peaks_ms;
    std::vector<ApneaEvent> events;
    RoiBox roi_box;
};

inline TruthData read_truth_json(const std::filesystem::path& path) {
    nlohmann::json j = detail::load_json(path);
    TruthData d;
    try {
        d.fps = j.at("fps").get<double>();
        d.width = j.at("width").get<int>();
        d.height = j.at("height").get<int>();
        d.frames = j.at("frames").get<std::int64_t>();
        d.duration_ms = j.at("duration_ms").get<double>();
        d.peaks_ms = j.at("peaks_ms").get<std::vector<double>>();
        for (const auto& e : j.at("apnea_events"))
            d.events.push_back(
                ApneaEvent{e.at("start_ms").get<double>(), e.at("length_ms").get<double>()});
        const auto& b = j.at("roi_box");
        d.roi_box.pc = b.at("pc").get<double>();
        d.roi_box.bx = b.at("bx").get<double>();
        d.roi_box.by = b.at("by").get<double>();
        d.roi_box.bw = b.at("bw").get<double>();
        d.roi_box.bh = b.at("bh").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    return d;
}

// Writes frames/NNNNNN.pgm, truth.json, and roi_track.csv under out_dir.
inline std::int64_t write_synth_clip(const SynthConfig& cfg,
                                     const std::filesystem::path& out_dir, int jobs = 1) {
    SynthGenerator gen(cfg);
    namespace fs = std::filesystem;
    fs::create_directories(out_dir / "frames");
    const std::int64_t n = gen.frame_count();
    ThreadPool pool(jobs);
    pool.run_indexed(static_cast<long>(n), [&](long i) {
        char name[32];
        std::snprintf(name, sizeof name, "%06ld.pgm", i);
        write_pgm(out_dir / "frames" / name, gen.frame(i).pixels);
    });
    write_truth_json(out_dir / "truth.json", gen);
    write_roi_track(out_dir / "roi_track.csv", {gen.true_roi_box()});
    return n;
}

struct EvalMetrics {
    std::optional<double> box_accuracy;
    std::optional<double> cycle_accuracy;
    std::optional<double> dar;
    std::optional<double> far;
    std::optional<double> sensitivity;
    std::optional<double> precision;
    ConfusionCounts counts;
};

inline EvalMetrics compute_metrics(const RunData& run, const TruthData& truth) {
    EvalMetrics m;
    if (!run.roi_spans.empty() && run.frames > 0) {
        std::optional<RoiRect> ref = roi_rect(truth.roi_box, truth.width, truth.height);
        if (ref) {
            std::vector<RoiRect> pred(static_cast<size_t>(run.frames));
            size_t si = 0;
            for (std::int64_t f = 0; f < run.frames; ++f) {
                while (si + 1 < run.roi_spans.size() &&
                       run.roi_spans[si + 1].from_frame <= f)
                    ++si;
                pred[static_cast<size_t>(f)] = run.roi_spans[si].rect;
            }
            std::vector<RoiRect> refs(pred.size(), *ref);
            m.box_accuracy = box_accuracy(pred, refs);
        }
    }
    std::vector<CycleSpan> cycles = cycles_from_peaks(truth.peaks_ms, truth.duration_ms);
    m.cycle_accuracy = cycle_accuracy(run.peaks_ms, cycles);
    m.counts = match_events(run.events, truth.events, run.window_ms, truth.duration_ms);
    DetectionRates r = confusion_metrics(m.counts);
    m.dar = r.dar;
    m.far = r.far;
    m.sensitivity = r.sensitivity;
    m.precision = r.precision;
    return m;
}

inline nlohmann::json metrics_to_json(const EvalMetrics& m) {
    nlohmann::json j;
    auto put = [&](const char* key, const std::optional<double>& v) {
        j[key] = v ? nlohmann::json(*v) : nlohmann::json();
    };
    put("box_accuracy", m.box_accuracy);
    put("cycle_accuracy", m.cycle_accuracy);
    put("dar", m.dar);
    put("far", m.far);
    put("sensitivity", m.sensitivity);
    put("precision", m.precision);
    j["counts"] = {{"tp", m.counts.tp},
                   {"fp", m.counts.fp},
                   {"tn", m.counts.tn},
                   {"fn", m.counts.fn}};
    return j;
}

inline void write_metrics_json(const std::filesystem::path& path, const EvalMetrics& m) {
    auto out = detail::open_out(path);
    out << metrics_to_json(m).dump(2) << '\n';
}

}  // namespace breathwatch

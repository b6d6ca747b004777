#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "breathwatch/image.hpp"

namespace breathwatch {

// Detector-style box: confidence plus center/size in pixels.
struct RoiBox {
    double pc = 1.0;
    double bx = 0.0;
    double by = 0.0;
    double bw = 0.0;
    double bh = 0.0;
    std::int64_t frame_index = 0;
};

// Inclusive pixel rectangle.
struct RoiRect {
    int x0 = 0;
    int x1 = 0;
    int y0 = 0;
    int y1 = 0;

    int width() const { return x1 - x0 + 1; }
    int height() const { return y1 - y0 + 1; }
    long area() const { return static_cast<long>(width()) * height(); }
    bool operator==(const RoiRect&) const = default;
};

inline constexpr double kDefaultConfidenceFloor = 0.5;

// Center/size box to clamped pixel rectangle; nullopt signals a detection
// below the confidence floor.
inline std::optional<RoiRect> roi_rect(const RoiBox& box, int frame_w, int frame_h,
                                       double confidence_floor = kDefaultConfidenceFloor) {
    if (box.pc < 0.0 || box.pc > 1.0)
        throw RoiError("box confidence out of [0,1]");
    if (!(box.bw > 0.0) || !(box.bh > 0.0))
        throw RoiError("box size must be positive");
    if (box.pc < confidence_floor)
        return std::nullopt;
    auto r = [](double v) { return static_cast<int>(std::lround(v)); };
    RoiRect rect;
    rect.x0 = detail::clampi(r(box.bx - 0.5 * box.bw), 0, frame_w - 1);
    rect.x1 = detail::clampi(r(box.bx + 0.5 * box.bw), 0, frame_w - 1);
    rect.y0 = detail::clampi(r(box.by - 0.5 * box.bh), 0, frame_h - 1);
    rect.y1 = detail::clampi(r(box.by + 0.5 * box.bh), 0, frame_h - 1);
    if (rect.x0 >= rect.x1 || rect.y0 >= rect.y1)
        throw RoiError("clamped ROI rectangle is degenerate");
    return rect;
}

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace detail

// Sparse per-frame box updates; frames without a record inherit the most
// recent earlier box.
class RoiTrack {
public:
    explicit RoiTrack(std::vector<RoiBox> rows) : rows_(std::move(rows)) {
        if (rows_.empty())
            throw FormatError("ROI track has no rows");
    }

    const RoiBox& box_at(std::int64_t frame) const {
        const RoiBox* best = &rows_.front();
        for (const RoiBox& b : rows_) {
            if (b.frame_index > frame) break;
            best = &b;
        }
        return *best;
    }

    const std::vector<RoiBox>& rows() const { return rows_; }

private:
    std::vector<RoiBox> rows_;
};

inline RoiTrack load_roi_track(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw InputError("cannot open ROI track " + path.string());
    std::string line;
    int lineno = 0;
    if (!std::getline(in, line))
        throw FormatError(path.string() + ": empty ROI track");
    ++lineno;
    {
        auto hdr = detail::split_csv(line);
        const char* want[] = {"frame", "pc", "bx", "by", "bw", "bh"};
        bool ok = hdr.size() == 6;
        for (int i = 0; ok && i < 6; ++i) ok = hdr[i] == want[i];
        if (!ok)
            throw FormatError(path.string() + ": line 1: expected header frame,pc,bx,by,bw,bh");
    }
    std::vector<RoiBox> rows;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        auto f = detail::split_csv(line);
        std::string where = path.string() + ": line " + std::to_string(lineno);
        if (f.size() != 6)
            throw FormatError(where + ": expected 6 fields, got " + std::to_string(f.size()));
        RoiBox b;
        try {
            b.frame_index = std::stoll(f[0]);
            b.pc = std::stod(f[1]);
            b.bx = std::stod(f[2]);
            b.by = std::stod(f[3]);
            b.bw = std::stod(f[4]);
            b.bh = std::stod(f[5]);
        } catch (const std::exception&) {
            throw FormatError(where + ": malformed number");
        }
        if (b.frame_index < 0)
            throw FormatError(where + ": negative frame index");
        if (b.pc < 0.0 || b.pc > 1.0)
            throw FormatError(where + ": pc out of [0,1]");
        if (!(b.bw > 0.0) || !(b.bh > 0.0))
            throw FormatError(where + ": box size must be positive");
        if (!rows.empty() && b.frame_index <= rows.back().frame_index)
            throw FormatError(where + ": frame indices must be strictly increasing");
        rows.push_back(b);
    }
    return RoiTrack(std::move(rows));
}

inline void write_roi_track(const std::filesystem::path& path, const std::vector<RoiBox>& rows) {
    std::ofstream out(path);
    if (!out)
        throw InputError("cannot write ROI track " + path.string());
    out << "frame,pc,bx,by,bw,bh\n";
    std::ostringstream ss;
    ss.precision(10);
    for (const RoiBox& b : rows) {
        ss.str("");
        ss << b.frame_index << "," << b.pc << "," << b.bx << "," << b.by << "," << b.bw << ","
           << b.bh << "\n";
        out << ss.str();
    }
}

}  // namespace breathwatch

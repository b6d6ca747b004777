#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "breathwatch/image.hpp"

namespace breathwatch {

// ITU-style luma with round-half-up; R=G=B=v maps to v for every v.
inline std::uint8_t luma(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    double y = 0.299 * r + 0.587 * g + 0.114 * b;
    long v = static_cast<long>(std::floor(y + 0.5));
    if (v < 0) v = 0;
    if (v > 255) v = 255;
    return static_cast<std::uint8_t>(v);
}

inline GrayFrame decode_frame(const std::vector<std::uint8_t>& rgb, int width, int height,
                              std::int64_t frame_index = 0, double frame_period_ms = 0.0) {
    if (width < 5 || height < 5)
        throw InputError("frame must be at least 5x5");
    if (rgb.size() != static_cast<size_t>(width) * height * 3)
        throw InputError("rgb buffer size does not match dimensions");
    GrayFrame f;
    f.pixels = GrayImage(width, height);
    const std::uint8_t* p = rgb.data();
    for (size_t i = 0; i < f.pixels.size(); ++i, p += 3)
        f.pixels.data()[i] = luma(p[0], p[1], p[2]);
    f.frame_index = frame_index;
    f.timestamp_ms = frame_index * frame_period_ms;
    return f;
}

namespace detail {

inline int pgm_token(std::istream& in, std::string& tok) {
    tok.clear();
    int c = in.get();
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
        } else if (std::isspace(c)) {
            c = in.get();
        } else {
            break;
        }
    }
    while (c != EOF && !std::isspace(c)) {
        tok.push_back(static_cast<char>(c));
        c = in.get();
    }
    return tok.empty() ? EOF : 0;
}

}  // namespace detail

inline GrayImage read_pgm(std::istream& in, const std::string& name = "<stream>") {
    std::string tok;
    if (detail::pgm_token(in, tok) == EOF || tok != "P5")
        throw FormatError(name + ": not a binary PGM (bad magic '" + tok + "')");
    long vals[3];
    for (long& v : vals) {
        if (detail::pgm_token(in, tok) == EOF)
            throw FormatError(name + ": truncated PGM header");
        try {
            v = std::stol(tok);
        } catch (const std::exception&) {
            throw FormatError(name + ": bad PGM header token '" + tok + "'");
        }
    }
    if (vals[0] <= 0 || vals[1] <= 0)
        throw FormatError(name + ": bad PGM dimensions");
    if (vals[2] != 255)
        throw FormatError(name + ": PGM maxval must be 255");
    GrayImage img(static_cast<int>(vals[0]), static_cast<int>(vals[1]));
    in.read(reinterpret_cast<char*>(img.data().data()), static_cast<std::streamsize>(img.size()));
    if (static_cast<size_t>(in.gcount()) != img.size())
        throw FormatError(name + ": truncated PGM pixel data");
    return img;
}

inline GrayImage read_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw InputError("cannot open " + path.string());
    return read_pgm(in, path.filename().string());
}

inline void write_pgm(std::ostream& out, const GrayImage& img) {
    out << "P5\n" << img.width() << " " << img.height() << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.data().data()),
              static_cast<std::streamsize>(img.size()));
}

inline void write_pgm(const std::filesystem::path& path, const GrayImage& img) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw InputError("cannot write " + path.string());
    write_pgm(out, img);
}

// Pull-based frame stream; analyze works frame by frame in bounded memory.
class FrameSource {
public:
    virtual ~FrameSource() = default;
    virtual bool next(GrayFrame& out) = 0;
    virtual Fps fps() const = 0;
};

class PgmDirSource : public FrameSource {
public:
    PgmDirSource(const std::filesystem::path& dir, Fps fps) : fps_(fps) {
        if (!std::filesystem::is_directory(dir))
            throw InputError("not a directory: " + dir.string());
        for (const auto& e : std::filesystem::directory_iterator(dir))
            if (e.is_regular_file() && e.path().extension() == ".pgm")
                files_.push_back(e.path());
        std::sort(files_.begin(), files_.end());
        if (files_.empty())
            throw InputError("no .pgm frames in " + dir.string());
    }

    bool next(GrayFrame& out) override {
        if (idx_ >= files_.size()) return false;
        out.pixels = read_pgm(files_[idx_]);
        if (idx_ > 0 && (out.pixels.width() != w_ || out.pixels.height() != h_))
            throw FormatError("frame dimension mismatch at " + files_[idx_].filename().string());
        w_ = out.pixels.width();
        h_ = out.pixels.height();
        out.frame_index = static_cast<std::int64_t>(idx_);
        out.timestamp_ms = out.frame_index * fps_.frame_period_ms();
        ++idx_;
        return true;
    }

    Fps fps() const override { return fps_; }
    size_t count() const { return files_.size(); }

private:
    std::vector<std::filesystem::path> files_;
    Fps fps_;
    size_t idx_ = 0;
    int w_ = 0, h_ = 0;
};

class Y4mSource : public FrameSource {
public:
    explicit Y4mSource(const std::filesystem::path& path)
        : in_(path, std::ios::binary), name_(path.filename().string()) {
        if (!in_)
            throw InputError("cannot open " + path.string());
        std::string header;
        if (!std::getline(in_, header))
            throw FormatError(name_ + ": empty file");
        parse_header(header);
    }

    bool next(GrayFrame& out) override {
        std::string marker;
        if (!std::getline(in_, marker))
            return false;
        if (marker.rfind("FRAME", 0) != 0)
            throw FormatError(name_ + ": bad frame marker at frame " + std::to_string(idx_));
        out.pixels = GrayImage(w_, h_);
        in_.read(reinterpret_cast<char*>(out.pixels.data().data()),
                 static_cast<std::streamsize>(out.pixels.size()));
        if (static_cast<size_t>(in_.gcount()) != out.pixels.size())
            throw FormatError(name_ + ": truncated frame " + std::to_string(idx_));
        if (chroma_bytes_ > 0) {
            in_.ignore(chroma_bytes_);
            if (in_.gcount() != chroma_bytes_)
                throw FormatError(name_ + ": truncated chroma in frame " + std::to_string(idx_));
        }
        out.frame_index = idx_++;
        out.timestamp_ms = out.frame_index * fps_.frame_period_ms();
        return true;
    }

    Fps fps() const override { return fps_; }
    int width() const { return w_; }
    int height() const { return h_; }

private:
    void parse_header(const std::string& header) {
        std::vector<std::string> tok;
        size_t pos = 0;
        while (pos < header.size()) {
            size_t sp = header.find(' ', pos);
            if (sp == std::string::npos) sp = header.size();
            if (sp > pos) tok.push_back(header.substr(pos, sp - pos));
            pos = sp + 1;
        }
        if (tok.empty() || tok[0] != "YUV4MPEG2")
            throw FormatError(name_ + ": not a YUV4MPEG2 stream");
        std::string colorspace = "420";
        bool have_w = false, have_h = false, have_f = false;
        for (size_t i = 1; i < tok.size(); ++i) {
            const std::string& t = tok[i];
            try {
                switch (t[0]) {
                    case 'W': w_ = std::stoi(t.substr(1)); have_w = true; break;
                    case 'H': h_ = std::stoi(t.substr(1)); have_h = true; break;
                    case 'F': {
                        size_t colon = t.find(':');
                        if (colon == std::string::npos)
                            throw FormatError(name_ + ": bad frame rate '" + t + "'");
                        fps_.num = std::stol(t.substr(1, colon - 1));
                        fps_.den = std::stol(t.substr(colon + 1));
                        have_f = true;
                        break;
                    }
                    case 'C': colorspace = t.substr(1); break;
                    default: break;  // interlacing/aspect tags are irrelevant here
                }
            } catch (const FormatError&) {
                throw;
            } catch (const std::exception&) {
                throw FormatError(name_ + ": bad header token '" + t + "'");
            }
        }
        if (!have_w || !have_h || !have_f || w_ <= 0 || h_ <= 0 || fps_.num <= 0 || fps_.den <= 0)
            throw FormatError(name_ + ": incomplete YUV4MPEG2 header");
        if (colorspace == "mono") {
            chroma_bytes_ = 0;
        } else if (colorspace.rfind("420", 0) == 0) {
            if (w_ % 2 != 0 || h_ % 2 != 0)
                throw FormatError(name_ + ": 4:2:0 requires even dimensions");
            chroma_bytes_ = static_cast<std::streamsize>(w_ / 2) * (h_ / 2) * 2;
        } else {
            throw FormatError(name_ + ": unsupported colorspace C" + colorspace);
        }
    }

    std::ifstream in_;
    std::string name_;
    int w_ = 0, h_ = 0;
    Fps fps_;
    std::streamsize chroma_bytes_ = 0;
    std::int64_t idx_ = 0;
};

class RawPlanarSource : public FrameSource {
public:
    RawPlanarSource(const std::filesystem::path& path, int width, int height, Fps fps)
        : in_(path, std::ios::binary), name_(path.filename().string()),
          w_(width), h_(height), fps_(fps) {
        if (!in_)
            throw InputError("cannot open " + path.string());
        if (width < 5 || height < 5)
            throw InputError("raw frames must be at least 5x5");
    }

    bool next(GrayFrame& out) override {
        out.pixels = GrayImage(w_, h_);
        in_.read(reinterpret_cast<char*>(out.pixels.data().data()),
                 static_cast<std::streamsize>(out.pixels.size()));
        std::streamsize got = in_.gcount();
        if (got == 0) return false;
        if (static_cast<size_t>(got) != out.pixels.size())
            throw FormatError(name_ + ": truncated frame " + std::to_string(idx_));
        out.frame_index = idx_++;
        out.timestamp_ms = out.frame_index * fps_.frame_period_ms();
        return true;
    }

    Fps fps() const override { return fps_; }

private:
    std::ifstream in_;
    std::string name_;
    int w_, h_;
    Fps fps_;
    std::int64_t idx_ = 0;
};

enum class SequenceFormat { PgmDir, Y4m, RawPlanar };

inline std::unique_ptr<FrameSource> open_source(const std::filesystem::path& path,
                                                SequenceFormat format, Fps fps_flag,
                                                int raw_width = 0, int raw_height = 0) {
    switch (format) {
        case SequenceFormat::PgmDir:
            return std::make_unique<PgmDirSource>(path, fps_flag);
        case SequenceFormat::Y4m:
            return std::make_unique<Y4mSource>(path);
        case SequenceFormat::RawPlanar:
            return std::make_unique<RawPlanarSource>(path, raw_width, raw_height, fps_flag);
    }
    throw InputError("unknown sequence format");
}

inline FrameSequence load_sequence(const std::filesystem::path& path, SequenceFormat format,
                                   Fps fps_flag = Fps{24, 1}, int raw_width = 0,
                                   int raw_height = 0) {
    auto src = open_source(path, format, fps_flag, raw_width, raw_height);
    FrameSequence seq;
    seq.fps = src->fps();
    GrayFrame f;
    while (src->next(f)) {
        if (!seq.frames.empty() && (f.width() != seq.frames[0].width() ||
                                    f.height() != seq.frames[0].height()))
            throw FormatError("frame dimension mismatch at frame " +
                              std::to_string(f.frame_index));
        seq.frames.push_back(std::move(f));
    }
    if (seq.frames.empty())
        throw InputError("sequence is empty: " + path.string());
    return seq;
}

}  // namespace breathwatch

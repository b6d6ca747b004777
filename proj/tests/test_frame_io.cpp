#include <unistd.h>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "breathwatch/frame_io.hpp"

namespace fs = std::filesystem;
using namespace breathwatch;

namespace {

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        path_ = fs::temp_directory_path() / ("bw_" + tag + "_" + std::to_string(::getpid()));
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

GrayImage pattern_image(int w, int h, int salt = 0) {
    GrayImage img(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            img.at(x, y) = static_cast<std::uint8_t>((x * 7 + y * 13 + salt) & 0xff);
    return img;
}

void write_y4m(const fs::path& p, const std::string& header,
               const std::vector<std::vector<std::uint8_t>>& frames) {
    std::ofstream out(p, std::ios::binary);
    out << header << "\n";
    for (const auto& f : frames) {
        out << "FRAME\n";
        out.write(reinterpret_cast<const char*>(f.data()),
                  static_cast<std::streamsize>(f.size()));
    }
}

}  // namespace

TEST(Luma, PrimariesAndWhite) {
    EXPECT_EQ(luma(255, 0, 0), 76);
    EXPECT_EQ(luma(0, 255, 0), 150);
    EXPECT_EQ(luma(0, 0, 255), 29);
    EXPECT_EQ(luma(255, 255, 255), 255);
    EXPECT_EQ(luma(0, 0, 0), 0);
}

TEST(Luma, GrayInputsPassThrough) {
    for (int v = 0; v < 256; ++v)
        EXPECT_EQ(luma(static_cast<std::uint8_t>(v), static_cast<std::uint8_t>(v),
                       static_cast<std::uint8_t>(v)),
                  v);
}

TEST(Luma, RoundsHalfUp) {
    // 0.299*1 + 0.587*1 + 0.114*2 = 1.114
    EXPECT_EQ(luma(1, 1, 2), 1);
    // 0.114*4 = 0.456; 0.114*5 = 0.57
    EXPECT_EQ(luma(0, 0, 4), 0);
    EXPECT_EQ(luma(0, 0, 5), 1);
}

TEST(DecodeFrame, ConvertsInterleavedRgb) {
    std::vector<std::uint8_t> rgb(5 * 5 * 3, 0);
    rgb[0] = 255;  // (0,0) pure red
    rgb[3 * 6 + 1] = 255;  // (1,1) pure green
    GrayFrame f = decode_frame(rgb, 5, 5, 7, 40.0);
    EXPECT_EQ(f.pixels.at(0, 0), 76);
    EXPECT_EQ(f.pixels.at(1, 1), 150);
    EXPECT_EQ(f.pixels.at(4, 4), 0);
    EXPECT_EQ(f.frame_index, 7);
    EXPECT_DOUBLE_EQ(f.timestamp_ms, 280.0);
}

TEST(DecodeFrame, RejectsBadInput) {
    std::vector<std::uint8_t> rgb(5 * 5 * 3 - 1, 0);
    EXPECT_THROW(decode_frame(rgb, 5, 5), InputError);
    std::vector<std::uint8_t> tiny(4 * 4 * 3, 0);
    EXPECT_THROW(decode_frame(tiny, 4, 4), InputError);
}

TEST(Pgm, RoundTripsThroughStream) {
    GrayImage img = pattern_image(17, 9);
    std::stringstream ss;
    write_pgm(ss, img);
    GrayImage back = read_pgm(ss);
    EXPECT_EQ(back, img);
}

TEST(Pgm, HeaderAllowsCommentsAndWhitespace) {
    GrayImage img = pattern_image(6, 5);
    std::stringstream ss;
    ss << "P5 # binary graymap\n  6\t5 # dims\n 255\n";
    ss.write(reinterpret_cast<const char*>(img.data().data()), 30);
    GrayImage back = read_pgm(ss);
    EXPECT_EQ(back, img);
}

TEST(Pgm, RejectsWrongMagic) {
    std::stringstream ss;
    ss << "P6\n2 2\n255\n0000";
    EXPECT_THROW(read_pgm(ss), FormatError);
}

TEST(Pgm, RejectsWrongMaxval) {
    std::stringstream ss;
    ss << "P5\n2 2\n65535\n";
    ss << std::string(8, 'x');
    EXPECT_THROW(read_pgm(ss), FormatError);
}

TEST(Pgm, RejectsTruncatedPixels) {
    std::stringstream ss;
    ss << "P5\n4 4\n255\nabc";
    try {
        read_pgm(ss, "clip.pgm");
        FAIL() << "expected FormatError";
    } catch (const FormatError& e) {
        EXPECT_NE(std::string(e.what()).find("clip.pgm"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("truncated"), std::string::npos);
    }
}

TEST(Pgm, RejectsGarbageHeaderToken) {
    std::stringstream ss;
    ss << "P5\nabc 4\n255\n" << std::string(16, 'x');
    EXPECT_THROW(read_pgm(ss), FormatError);
}

TEST(Pgm, MissingFileThrowsInputError) {
    EXPECT_THROW(read_pgm(fs::path("/nonexistent/frame.pgm")), InputError);
}

TEST(Y4m, ReadsMonochromeFrames) {
    TempDir tmp("y4m_mono");
    fs::path p = tmp.path() / "clip.y4m";
    std::vector<std::uint8_t> f0(48), f1(48);
    for (int i = 0; i < 48; ++i) {
        f0[i] = static_cast<std::uint8_t>(i);
        f1[i] = static_cast<std::uint8_t>(200 - i);
    }
    write_y4m(p, "YUV4MPEG2 W8 H6 F24:1 Cmono", {f0, f1});

    Y4mSource src(p);
    EXPECT_EQ(src.width(), 8);
    EXPECT_EQ(src.height(), 6);
    EXPECT_EQ(src.fps().num, 24);
    EXPECT_EQ(src.fps().den, 1);

    GrayFrame f;
    ASSERT_TRUE(src.next(f));
    EXPECT_EQ(f.frame_index, 0);
    EXPECT_EQ(f.pixels.at(3, 2), 19);
    ASSERT_TRUE(src.next(f));
    EXPECT_EQ(f.frame_index, 1);
    EXPECT_EQ(f.pixels.at(0, 0), 200);
    EXPECT_DOUBLE_EQ(f.timestamp_ms, 1000.0 / 24.0);
    EXPECT_FALSE(src.next(f));
}

TEST(Y4m, DefaultColorspaceSkipsChroma) {
    TempDir tmp("y4m_420");
    fs::path p = tmp.path() / "clip.y4m";
    std::vector<std::uint8_t> frame(6 * 6 + 18);
    for (size_t i = 0; i < frame.size(); ++i)
        frame[i] = static_cast<std::uint8_t>(i + 1);
    write_y4m(p, "YUV4MPEG2 W6 H6 F30:1", {frame, frame});

    Y4mSource src(p);
    GrayFrame f;
    ASSERT_TRUE(src.next(f));
    EXPECT_EQ(f.pixels.at(5, 5), 36);
    ASSERT_TRUE(src.next(f));
    EXPECT_EQ(f.pixels.at(0, 0), 1);  // chroma of frame 0 was skipped
    EXPECT_FALSE(src.next(f));
}

TEST(Y4m, FractionalFrameRate) {
    TempDir tmp("y4m_ntsc");
    fs::path p = tmp.path() / "clip.y4m";
    write_y4m(p, "YUV4MPEG2 W6 H6 F30000:1001 Cmono", {std::vector<std::uint8_t>(36, 0)});
    Y4mSource src(p);
    EXPECT_EQ(src.fps().num, 30000);
    EXPECT_EQ(src.fps().den, 1001);
    EXPECT_NEAR(src.fps().frame_period_ms(), 33.3667, 1e-4);
}

TEST(Y4m, RejectsBadMagic) {
    TempDir tmp("y4m_magic");
    fs::path p = tmp.path() / "clip.y4m";
    std::ofstream(p) << "YUV4MPEG W8 H6 F24:1\n";
    EXPECT_THROW(Y4mSource src(p), FormatError);
}

TEST(Y4m, RejectsIncompleteHeader) {
    TempDir tmp("y4m_hdr");
    fs::path p = tmp.path() / "clip.y4m";
    std::ofstream(p) << "YUV4MPEG2 W8 H6\n";
    EXPECT_THROW(Y4mSource src(p), FormatError);
}

TEST(Y4m, RejectsOddDimensionsFor420) {
    TempDir tmp("y4m_odd");
    fs::path p = tmp.path() / "clip.y4m";
    std::ofstream(p) << "YUV4MPEG2 W7 H6 F24:1\n";
    EXPECT_THROW(Y4mSource src(p), FormatError);
}

TEST(Y4m, RejectsUnsupportedColorspace) {
    TempDir tmp("y4m_cs");
    fs::path p = tmp.path() / "clip.y4m";
    std::ofstream(p) << "YUV4MPEG2 W8 H6 F24:1 C444\n";
    EXPECT_THROW(Y4mSource src(p), FormatError);
}

TEST(Y4m, TruncatedFrameNamesIndex) {
    TempDir tmp("y4m_trunc");
    fs::path p = tmp.path() / "clip.y4m";
    std::vector<std::uint8_t> full(48, 9), part(20, 9);
    {
        std::ofstream out(p, std::ios::binary);
        out << "YUV4MPEG2 W8 H6 F24:1 Cmono\nFRAME\n";
        out.write(reinterpret_cast<const char*>(full.data()), 48);
        out << "FRAME\n";
        out.write(reinterpret_cast<const char*>(part.data()), 20);
    }
    Y4mSource src(p);
    GrayFrame f;
    ASSERT_TRUE(src.next(f));
    try {
        src.next(f);
        FAIL() << "expected FormatError";
    } catch (const FormatError& e) {
        EXPECT_NE(std::string(e.what()).find("frame 1"), std::string::npos);
    }
}

TEST(RawPlanar, ReadsWholeFramesAndStopsAtEof) {
    TempDir tmp("raw_ok");
    fs::path p = tmp.path() / "clip.gray";
    {
        std::ofstream out(p, std::ios::binary);
        for (int k = 0; k < 3; ++k) {
            std::vector<char> buf(5 * 6, static_cast<char>(10 * k + 1));
            out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
        }
    }
    RawPlanarSource src(p, 5, 6, Fps{25, 1});
    GrayFrame f;
    int n = 0;
    while (src.next(f)) {
        EXPECT_EQ(f.pixels.at(0, 0), 10 * n + 1);
        EXPECT_DOUBLE_EQ(f.timestamp_ms, 40.0 * n);
        ++n;
    }
    EXPECT_EQ(n, 3);
}

TEST(RawPlanar, PartialTrailingFrameIsAnError) {
    TempDir tmp("raw_part");
    fs::path p = tmp.path() / "clip.gray";
    {
        std::ofstream out(p, std::ios::binary);
        std::vector<char> buf(5 * 6 + 7, 3);
        out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    }
    RawPlanarSource src(p, 5, 6, Fps{24, 1});
    GrayFrame f;
    ASSERT_TRUE(src.next(f));
    EXPECT_THROW(src.next(f), FormatError);
}

TEST(PgmDir, ReadsFramesInNameOrder) {
    TempDir tmp("dir_order");
    for (int i = 0; i < 48; ++i) {
        char name[16];
        std::snprintf(name, sizeof name, "%06d.pgm", i);
        write_pgm(tmp.path() / name, pattern_image(5, 5, i));
    }
    std::ofstream(tmp.path() / "notes.txt") << "ignored";

    PgmDirSource src(tmp.path(), Fps{24, 1});
    EXPECT_EQ(src.count(), 48u);
    GrayFrame f;
    for (int i = 0; i < 48; ++i) {
        ASSERT_TRUE(src.next(f));
        EXPECT_EQ(f.frame_index, i);
        EXPECT_EQ(f.pixels, pattern_image(5, 5, i));
    }
    EXPECT_FALSE(src.next(f));
}

TEST(PgmDir, DimensionMismatchNamesFile) {
    TempDir tmp("dir_dims");
    write_pgm(tmp.path() / "000000.pgm", pattern_image(8, 6));
    write_pgm(tmp.path() / "000001.pgm", pattern_image(6, 8));
    PgmDirSource src(tmp.path(), Fps{24, 1});
    GrayFrame f;
    ASSERT_TRUE(src.next(f));
    try {
        src.next(f);
        FAIL() << "expected FormatError";
    } catch (const FormatError& e) {
        EXPECT_NE(std::string(e.what()).find("000001.pgm"), std::string::npos);
    }
}

TEST(PgmDir, EmptyDirectoryThrows) {
    TempDir tmp("dir_empty");
    EXPECT_THROW(PgmDirSource(tmp.path(), Fps{24, 1}), InputError);
}

TEST(LoadSequence, MaterializesDirectory) {
    TempDir tmp("load_seq");
    for (int i = 0; i < 3; ++i) {
        char name[16];
        std::snprintf(name, sizeof name, "%06d.pgm", i);
        write_pgm(tmp.path() / name, pattern_image(7, 7, i));
    }
    FrameSequence seq = load_sequence(tmp.path(), SequenceFormat::PgmDir, Fps{25, 1});
    ASSERT_EQ(seq.frames.size(), 3u);
    EXPECT_EQ(seq.fps.num, 25);
    EXPECT_EQ(seq.frames[2].frame_index, 2);
}

TEST(FpsOf, SnapsIntegralRatesAndKeepsFractions) {
    Fps a = Fps::of(24.0);
    EXPECT_EQ(a.num, 24);
    EXPECT_EQ(a.den, 1);
    Fps b = Fps::of(29.97);
    EXPECT_EQ(b.den, 1000000);
    EXPECT_NEAR(b.value(), 29.97, 1e-6);
    EXPECT_THROW(Fps::of(0.0), ConfigError);
    EXPECT_THROW(Fps::of(-3.0), ConfigError);
    EXPECT_DOUBLE_EQ((Fps{24, 1}).frame_period_ms(), 1000.0 / 24.0);
}

TEST(OpenSource, DispatchesOnFormat) {
    TempDir tmp("dispatch");
    write_pgm(tmp.path() / "000000.pgm", pattern_image(5, 5));
    auto dir_src = open_source(tmp.path(), SequenceFormat::PgmDir, Fps{24, 1});
    GrayFrame f;
    EXPECT_TRUE(dir_src->next(f));

    fs::path clip = tmp.path() / "clip.y4m";
    write_y4m(clip, "YUV4MPEG2 W6 H6 F24:1 Cmono", {std::vector<std::uint8_t>(36, 5)});
    auto y4m_src = open_source(clip, SequenceFormat::Y4m, Fps{24, 1});
    EXPECT_TRUE(y4m_src->next(f));
    EXPECT_EQ(f.pixels.at(2, 2), 5);
}

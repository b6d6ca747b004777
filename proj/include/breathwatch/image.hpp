#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace breathwatch {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
// Unusable input data (wrong sizes, missing files).
struct InputError : Error {
    using Error::Error;
};
// Structurally broken container or track file.
struct FormatError : Error {
    using Error::Error;
};
// Invalid configuration values.
struct ConfigError : Error {
    using Error::Error;
};
// Stream consumed out of order.
struct SequencingError : Error {
    using Error::Error;
};
// Degenerate or invalid region of interest.
struct RoiError : Error {
    using Error::Error;
};

namespace detail {

inline int clampi(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }

}  // namespace detail

// Row-major 2-D pixel buffer.
template <class T>
class Image {
public:
    Image() = default;
    Image(int width, int height, T fill = T{})
        : w_(width), h_(height), data_(checked_len(width, height), fill) {}

    int width() const { return w_; }
    int height() const { return h_; }
    size_t size() const { return data_.size(); }

    T& at(int x, int y) { return data_[static_cast<size_t>(y) * w_ + x]; }
    const T& at(int x, int y) const { return data_[static_cast<size_t>(y) * w_ + x]; }

    T* row(int y) { return data_.data() + static_cast<size_t>(y) * w_; }
    const T* row(int y) const { return data_.data() + static_cast<size_t>(y) * w_; }

    std::vector<T>& data() { return data_; }
    const std::vector<T>& data() const { return data_; }

    bool operator==(const Image&) const = default;

private:
    static size_t checked_len(int width, int height) {
        if (width <= 0 || height <= 0)
            throw InputError("image dimensions must be positive");
        return static_cast<size_t>(width) * static_cast<size_t>(height);
    }

    int w_ = 0;
    int h_ = 0;
    std::vector<T> data_;
};

using GrayImage = Image<std::uint8_t>;
using RealImage = Image<double>;
using EdgeMap = Image<std::uint8_t>;  // entries are 0 or 1

// One grayscale video frame.
struct GrayFrame {
    GrayImage pixels;
    std::int64_t frame_index = 0;
    double timestamp_ms = 0.0;

    int width() const { return pixels.width(); }
    int height() const { return pixels.height(); }
};

// Frame rate kept as a rational so container headers round-trip exactly.
struct Fps {
    long num = 24;
    long den = 1;

    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
    double frame_period_ms() const { return 1000.0 * static_cast<double>(den) / static_cast<double>(num); }

    static Fps of(double fps) {
        if (!(fps > 0.0))
            throw ConfigError("fps must be positive");
        // Snap near-integral rates; otherwise keep micro-frame precision.
        double r = fps - static_cast<double>(static_cast<long>(fps + 0.5));
        if (r > -1e-9 && r < 1e-9)
            return Fps{static_cast<long>(fps + 0.5), 1};
        return Fps{static_cast<long>(fps * 1000000.0 + 0.5), 1000000};
    }
};

struct FrameSequence {
    std::vector<GrayFrame> frames;
    Fps fps;
};

}  // namespace breathwatch

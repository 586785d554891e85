#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace panda {

struct Extent {
    int width = 0;
    int height = 0;

    std::size_t area() const noexcept {
        return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    }
    bool operator==(const Extent&) const = default;
};

struct Point2i {
    int x = 0;
    int y = 0;
    bool operator==(const Point2i&) const = default;
};

struct Point2d {
    double x = 0.0;
    double y = 0.0;
    bool operator==(const Point2d&) const = default;
};

/// Interleaved 8-bit RGB raster, row-major.
struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;

    RgbImage() = default;
    RgbImage(int w, int h)
        : width(w), height(h), pixels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3, 0) {}

    Extent extent() const noexcept { return {width, height}; }
    bool empty() const noexcept { return pixels.empty(); }

    std::uint8_t* at(int x, int y) noexcept {
        return pixels.data() + (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)) * 3;
    }
    const std::uint8_t* at(int x, int y) const noexcept {
        return pixels.data() + (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)) * 3;
    }

    bool operator==(const RgbImage&) const = default;
};

/// Segment-id raster; 0 is void.
struct LabelMap {
    int width = 0;
    int height = 0;
    std::vector<std::uint32_t> ids;

    LabelMap() = default;
    LabelMap(int w, int h)
        : width(w), height(h), ids(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), 0) {}

    Extent extent() const noexcept { return {width, height}; }

    std::uint32_t& at(int x, int y) noexcept {
        return ids[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)];
    }
    std::uint32_t at(int x, int y) const noexcept {
        return ids[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)];
    }

    bool operator==(const LabelMap&) const = default;
};

/// One byte per pixel, 0 or 1.
struct Bitmap {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> bits;

    Bitmap() = default;
    Bitmap(int w, int h)
        : width(w), height(h), bits(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), 0) {}

    bool test(int x, int y) const noexcept {
        return bits[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)] != 0;
    }
    void set(int x, int y, bool v = true) noexcept {
        bits[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)] = v ? 1 : 0;
    }
    std::int64_t count() const noexcept {
        std::int64_t n = 0;
        for (auto b : bits) n += (b != 0);
        return n;
    }

    bool operator==(const Bitmap&) const = default;
};

}  // namespace panda

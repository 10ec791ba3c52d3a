#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace crackbench {

struct Rgb {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;

    friend bool operator==(const Rgb&, const Rgb&) = default;
};

struct Pixel {
    int x = 0;
    int y = 0;

    friend bool operator==(const Pixel&, const Pixel&) = default;
};

// Row-major 8-bit RGB image.
class Raster {
public:
    Raster() = default;
    Raster(int width, int height, Rgb fill = {});

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    bool empty() const noexcept { return width_ == 0 || height_ == 0; }

    bool contains(int x, int y) const noexcept {
        return x >= 0 && y >= 0 && x < width_ && y < height_;
    }

    Rgb at(int x, int y) const noexcept {
        const std::uint8_t* p = &pixels_[offset(x, y)];
        return {p[0], p[1], p[2]};
    }

    void set(int x, int y, Rgb c) noexcept {
        std::uint8_t* p = &pixels_[offset(x, y)];
        p[0] = c.r;
        p[1] = c.g;
        p[2] = c.b;
    }

    // width * height * 3 bytes, row-major RGB.
    const std::vector<std::uint8_t>& bytes() const noexcept { return pixels_; }
    std::vector<std::uint8_t>& bytes() noexcept { return pixels_; }

    const std::uint8_t* row(int y) const noexcept { return &pixels_[offset(0, y)]; }
    std::uint8_t* row(int y) noexcept { return &pixels_[offset(0, y)]; }

    // Copy of the w x h window with top-left (x0, y0). The window must lie
    // inside the raster.
    Raster crop(int x0, int y0, int w, int h) const;

    friend bool operator==(const Raster&, const Raster&) = default;

private:
    std::size_t offset(int x, int y) const noexcept {
        return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
                static_cast<std::size_t>(x)) * 3;
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> pixels_;
};

// Inclusive pixel-coordinate box.
struct BBox {
    int x_min = 0;
    int y_min = 0;
    int x_max = 0;
    int y_max = 0;

    int width() const noexcept { return x_max - x_min + 1; }
    int height() const noexcept { return y_max - y_min + 1; }
    long long area() const noexcept {
        return static_cast<long long>(width()) * height();
    }
    bool valid_in(int w, int h) const noexcept {
        return 0 <= x_min && x_min <= x_max && x_max < w &&
               0 <= y_min && y_min <= y_max && y_max < h;
    }

    friend bool operator==(const BBox&, const BBox&) = default;
};

inline bool intersects(const BBox& a, const BBox& b) noexcept {
    return a.x_min <= b.x_max && b.x_min <= a.x_max &&
           a.y_min <= b.y_max && b.y_min <= a.y_max;
}

}  // namespace crackbench

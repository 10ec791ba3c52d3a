#include "crackbench/raster.hpp"

#include <algorithm>
#include <cstring>

#include "crackbench/error.hpp"

namespace crackbench {

Raster::Raster(int width, int height, Rgb fill) : width_(width), height_(height) {
    if (width < 0 || height < 0) {
        throw InvalidArgument("raster dimensions must be non-negative");
    }
    pixels_.resize(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3);
    for (std::size_t i = 0; i < pixels_.size(); i += 3) {
        pixels_[i] = fill.r;
        pixels_[i + 1] = fill.g;
        pixels_[i + 2] = fill.b;
    }
}

Raster Raster::crop(int x0, int y0, int w, int h) const {
    if (x0 < 0 || y0 < 0 || w < 0 || h < 0 || x0 + w > width_ || y0 + h > height_) {
        throw InvalidArgument("crop window outside raster");
    }
    Raster out(w, h);
    for (int y = 0; y < h; ++y) {
        std::memcpy(out.row(y), row(y0 + y) + static_cast<std::size_t>(x0) * 3,
                    static_cast<std::size_t>(w) * 3);
    }
    return out;
}

}  // namespace crackbench

#pragma once

// Test-only helpers: scratch directories, tree hashing, and oracles that
// deliberately avoid the library's own code paths.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "crackbench/raster.hpp"

namespace testsupport {

class ScratchDir {
public:
    explicit ScratchDir(const std::string& tag) {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("crackbench_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~ScratchDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    ScratchDir(const ScratchDir&) = delete;
    ScratchDir& operator=(const ScratchDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

private:
    std::filesystem::path path_;
};

inline std::vector<std::uint8_t> read_bytes(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::string read_string(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// FNV-1a over every (relative path, contents) pair in sorted path order.
inline std::uint64_t tree_hash(const std::filesystem::path& root) {
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::recursive_directory_iterator(root)) {
        if (e.is_regular_file()) files.push_back(std::filesystem::relative(e.path(), root));
    }
    std::sort(files.begin(), files.end());
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto feed = [&h](const unsigned char* p, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) {
            h ^= p[i];
            h *= 0x100000001b3ULL;
        }
    };
    for (const auto& f : files) {
        const std::string name = f.generic_string();
        feed(reinterpret_cast<const unsigned char*>(name.data()), name.size() + 1);
        const auto bytes = read_bytes(root / f);
        feed(bytes.data(), bytes.size());
    }
    return h;
}

inline std::size_t count_files(const std::filesystem::path& dir, const std::string& ext) {
    if (!std::filesystem::exists(dir)) return 0;
    std::size_t n = 0;
    for (const auto& e : std::filesystem::directory_iterator(dir)) n += e.path().extension() == ext;
    return n;
}

// Pixel-difference mask, row-major.
inline std::vector<char> diff_mask(const crackbench::Raster& a, const crackbench::Raster& b) {
    std::vector<char> m(static_cast<std::size_t>(a.width()) * static_cast<std::size_t>(a.height()));
    for (int y = 0; y < a.height(); ++y) {
        for (int x = 0; x < a.width(); ++x) {
            m[static_cast<std::size_t>(y) * static_cast<std::size_t>(a.width()) + static_cast<std::size_t>(x)] =
                !(a.at(x, y) == b.at(x, y));
        }
    }
    return m;
}

// Number of 8-connected components in a mask (iterative flood fill).
inline int count_components8(const std::vector<char>& mask, int w, int h) {
    std::vector<char> seen(mask.size(), 0);
    std::vector<std::pair<int, int>> stack;
    int components = 0;
    for (int y0 = 0; y0 < h; ++y0) {
        for (int x0 = 0; x0 < w; ++x0) {
            const std::size_t i0 = static_cast<std::size_t>(y0) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x0);
            if (!mask[i0] || seen[i0]) continue;
            ++components;
            seen[i0] = 1;
            stack.push_back({x0, y0});
            while (!stack.empty()) {
                auto [x, y] = stack.back();
                stack.pop_back();
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int nx = x + dx, ny = y + dy;
                        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                        const std::size_t j = static_cast<std::size_t>(ny) * static_cast<std::size_t>(w) + static_cast<std::size_t>(nx);
                        if (mask[j] && !seen[j]) {
                            seen[j] = 1;
                            stack.push_back({nx, ny});
                        }
                    }
                }
            }
        }
    }
    return components;
}

inline crackbench::Raster random_raster(std::mt19937_64& gen, int w, int h) {
    crackbench::Raster r(w, h);
    for (auto& b : r.bytes()) b = static_cast<std::uint8_t>(gen());
    return r;
}

}  // namespace testsupport

#pragma once

// Detector-ready dataset emission: YOLO-style label records, seeded
// train/val/test splits and the on-disk layout
//
//   <root>/images/{train,val,test}/<stem>.png
//   <root>/labels/{train,val,test}/<stem>.txt
//   <root>/manifest.txt

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "crackbench/crack.hpp"
#include "crackbench/raster.hpp"
#include "crackbench/rng.hpp"

namespace crackbench {

// Normalized center-size box.
struct NormBox {
    double cx = 0;
    double cy = 0;
    double w = 0;
    double h = 0;

    friend bool operator==(const NormBox&, const NormBox&) = default;
};

struct LabelRecord {
    int class_id = 0;
    NormBox box;

    friend bool operator==(const LabelRecord&, const LabelRecord&) = default;
};

// Pixel-inclusive convention: a box covering columns x_min..x_max spans
// [x_min, x_max + 1) in continuous coordinates.
LabelRecord to_label_record(const BBox& b, int width, int height, int class_id = kCrackClass);

// Inverse of to_label_record, rounding to the nearest pixel edge.
BBox to_pixel_box(const NormBox& b, int width, int height);

// "class cx cy w h" with six decimals, newline-terminated.
std::string format_label_line(const LabelRecord& r);

// One record per non-blank line. Throws InvalidArgument naming the line.
std::vector<LabelRecord> parse_labels(std::string_view text);

struct SplitRatios {
    double train = 0.8;
    double val = 0.1;
    double test = 0.1;

    // Throws InvalidArgument unless nonnegative and summing to 1 (1e-9).
    void validate() const;
    // "train,val,test", e.g. "0.8,0.1,0.1".
    static SplitRatios parse(std::string_view text);
};

enum class SplitName { Train, Val, Test };
inline constexpr std::array<SplitName, 3> kSplits = {SplitName::Train, SplitName::Val, SplitName::Test};
std::string_view split_dir(SplitName s) noexcept;

template <typename T>
struct SplitSets {
    std::vector<T> train;
    std::vector<T> val;
    std::vector<T> test;

    std::vector<T>& operator[](SplitName s) {
        return s == SplitName::Train ? train : s == SplitName::Val ? val : test;
    }
    const std::vector<T>& operator[](SplitName s) const {
        return s == SplitName::Train ? train : s == SplitName::Val ? val : test;
    }
};

// Split sizes for n items: round(n*train), round(n*(train+val)) - that,
// remainder to test.
std::array<std::size_t, 3> split_sizes(std::size_t n, const SplitRatios& ratios);

// Seeded Fisher-Yates permutation of [0, n), cut at split_sizes.
SplitSets<std::size_t> split_indices(std::size_t n, const SplitRatios& ratios, RandomStream& rng);

template <typename T>
SplitSets<T> split(const std::vector<T>& items, const SplitRatios& ratios, RandomStream& rng) {
    const auto idx = split_indices(items.size(), ratios, rng);
    SplitSets<T> out;
    for (SplitName s : kSplits) {
        for (std::size_t i : idx[s]) out[s].push_back(items[i]);
    }
    return out;
}

struct DatasetLayout {
    std::filesystem::path root;

    std::filesystem::path images_dir(SplitName s) const { return root / "images" / split_dir(s); }
    std::filesystem::path labels_dir(SplitName s) const { return root / "labels" / split_dir(s); }
    std::filesystem::path manifest_path() const { return root / "manifest.txt"; }

    // Throws IoError when a directory cannot be created.
    void create() const;
};

std::string image_stem(std::uint64_t index);

struct EmitOptions {
    Seed seed;
    std::size_t count = 0;
    SplitRatios ratios;
    ParamOverrides overrides;
    std::filesystem::path root;
};

struct DatasetSummary {
    std::array<std::size_t, 3> counts{};  // train, val, test
    std::string manifest;
};

// Writes a labeled image's PNG and label file under `split`.
void write_labeled_image(const DatasetLayout& layout, SplitName split, const std::string& stem,
                         const LabeledImage& image);

// Generates `count` crack images with generate(seed, i), splits them with
// the stream "split" and writes the full layout. Images are produced and
// written one at a time.
DatasetSummary write_dataset(const EmitOptions& options);

}  // namespace crackbench

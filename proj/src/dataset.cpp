#include "crackbench/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "crackbench/error.hpp"
#include "crackbench/png.hpp"
#include "crackbench/textio.hpp"

namespace crackbench {

LabelRecord to_label_record(const BBox& b, int width, int height, int class_id) {
    if (!b.valid_in(width, height)) throw InvalidArgument("bbox outside image in to_label_record");
    const double w = width, h = height;
    return {class_id,
            {(b.x_min + b.x_max + 1) / (2.0 * w), (b.y_min + b.y_max + 1) / (2.0 * h),
             (b.x_max - b.x_min + 1) / w, (b.y_max - b.y_min + 1) / h}};
}

BBox to_pixel_box(const NormBox& b, int width, int height) {
    const double x0 = (b.cx - b.w / 2) * width, x1 = (b.cx + b.w / 2) * width;
    const double y0 = (b.cy - b.h / 2) * height, y1 = (b.cy + b.h / 2) * height;
    BBox out{static_cast<int>(std::lround(x0)), static_cast<int>(std::lround(y0)),
             static_cast<int>(std::lround(x1)) - 1, static_cast<int>(std::lround(y1)) - 1};
    out.x_min = std::clamp(out.x_min, 0, width - 1);
    out.y_min = std::clamp(out.y_min, 0, height - 1);
    out.x_max = std::clamp(out.x_max, out.x_min, width - 1);
    out.y_max = std::clamp(out.y_max, out.y_min, height - 1);
    return out;
}

std::string format_label_line(const LabelRecord& r) {
    return std::to_string(r.class_id) + " " + textio::fixed6(r.box.cx) + " " + textio::fixed6(r.box.cy) +
           " " + textio::fixed6(r.box.w) + " " + textio::fixed6(r.box.h) + "\n";
}

std::vector<LabelRecord> parse_labels(std::string_view text) {
    std::vector<LabelRecord> out;
    std::size_t line_no = 0;
    while (!text.empty()) {
        ++line_no;
        const auto nl = text.find('\n');
        const std::string_view line = textio::trim(text.substr(0, nl));
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        if (line.empty()) continue;
        const auto f = textio::split_ws(line);
        const std::string where = "label line " + std::to_string(line_no);
        if (f.size() != 5) throw InvalidArgument(where + ": expected 5 fields");
        LabelRecord r;
        r.class_id = textio::parse_int(f[0], where);
        r.box = {textio::parse_double(f[1], where), textio::parse_double(f[2], where),
                 textio::parse_double(f[3], where), textio::parse_double(f[4], where)};
        out.push_back(r);
    }
    return out;
}

void SplitRatios::validate() const {
    if (train < 0 || val < 0 || test < 0) throw InvalidArgument("split ratios must be nonnegative");
    if (std::abs(train + val + test - 1.0) > 1e-9) throw InvalidArgument("split ratios must sum to 1");
}

SplitRatios SplitRatios::parse(std::string_view text) {
    double v[3];
    for (int i = 0; i < 3; ++i) {
        const auto comma = text.find(',');
        if ((i < 2) == (comma == std::string_view::npos)) {
            throw InvalidArgument("ratios must be written train,val,test");
        }
        v[i] = textio::parse_double(text.substr(0, comma), "ratios");
        if (comma != std::string_view::npos) text = text.substr(comma + 1);
    }
    SplitRatios r{v[0], v[1], v[2]};
    r.validate();
    return r;
}

std::string_view split_dir(SplitName s) noexcept {
    switch (s) {
        case SplitName::Train: return "train";
        case SplitName::Val: return "val";
        case SplitName::Test: return "test";
    }
    return "test";
}

std::array<std::size_t, 3> split_sizes(std::size_t n, const SplitRatios& ratios) {
    ratios.validate();
    const double dn = static_cast<double>(n);
    const auto cut1 = static_cast<std::size_t>(std::llround(dn * ratios.train));
    const auto cut2 = std::max(cut1, static_cast<std::size_t>(std::llround(dn * (ratios.train + ratios.val))));
    const std::size_t a = std::min(cut1, n), b = std::min(cut2, n);
    return {a, b - a, n - b};
}

SplitSets<std::size_t> split_indices(std::size_t n, const SplitRatios& ratios, RandomStream& rng) {
    const auto sizes = split_sizes(n, ratios);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = n; i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.next_int_range(0, static_cast<std::int64_t>(i) - 1));
        std::swap(perm[i - 1], perm[j]);
    }
    SplitSets<std::size_t> out;
    out.train.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(sizes[0]));
    out.val.assign(perm.begin() + static_cast<std::ptrdiff_t>(sizes[0]),
                   perm.begin() + static_cast<std::ptrdiff_t>(sizes[0] + sizes[1]));
    out.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(sizes[0] + sizes[1]), perm.end());
    return out;
}

void DatasetLayout::create() const {
    for (SplitName s : kSplits) {
        for (const auto& dir : {images_dir(s), labels_dir(s)}) {
            std::error_code ec;
            std::filesystem::create_directories(dir, ec);
            if (ec) throw IoError(dir, "io-failure: cannot create directory (" + ec.message() + ")");
        }
    }
}

std::string image_stem(std::uint64_t index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "crack_%06llu", static_cast<unsigned long long>(index));
    return buf;
}

void write_labeled_image(const DatasetLayout& layout, SplitName split, const std::string& stem,
                         const LabeledImage& image) {
    png::write_file(layout.images_dir(split) / (stem + ".png"), image.raster);
    std::string labels;
    for (const auto& b : image.boxes) {
        labels += format_label_line(to_label_record(b.box, image.raster.width(), image.raster.height(), b.class_id));
    }
    textio::write_text(layout.labels_dir(split) / (stem + ".txt"), labels);
}

DatasetSummary write_dataset(const EmitOptions& options) {
    options.ratios.validate();
    const DatasetLayout layout{options.root};
    layout.create();

    RandomStream split_rng = derive_stream(options.seed, "split");
    const auto sets = split_indices(options.count, options.ratios, split_rng);

    std::vector<SplitName> assignment(options.count, SplitName::Train);
    for (SplitName s : kSplits) {
        for (std::size_t i : sets[s]) assignment[i] = s;
    }

    DatasetSummary summary;
    for (SplitName s : kSplits) summary.counts[static_cast<std::size_t>(s)] = sets[s].size();

    std::ostringstream m;
    m << "# crack dataset manifest\n"
      << "format=crackbench-dataset-1\n"
      << "seed=" << options.seed.value << "\n"
      << "count=" << options.count << "\n"
      << "ratios=" << textio::fixed6(options.ratios.train) << "," << textio::fixed6(options.ratios.val) << ","
      << textio::fixed6(options.ratios.test) << "\n"
      << "classes=crack\n"
      << "label_format=class cx cy w h (normalized, pixel-inclusive)\n";
    for (SplitName s : kSplits) {
        m << split_dir(s) << "_count=" << sets[s].size() << "\n"
          << split_dir(s) << "_images=images/" << split_dir(s) << "\n"
          << split_dir(s) << "_labels=labels/" << split_dir(s) << "\n";
    }
    for (const auto& [key, value] : options.overrides.values) m << "override." << key << "=" << value << "\n";

    for (std::size_t i = 0; i < options.count; ++i) {
        const LabeledImage img = generate(options.seed, i, options.overrides);
        const std::string stem = image_stem(i);
        write_labeled_image(layout, assignment[i], stem, img);
        m << "image=" << stem << " split=" << split_dir(assignment[i]) << " stream=" << img.label
          << " bbox=" << textio::bbox_text(img.boxes.front().box) << " " << describe(img.params) << "\n";
    }

    summary.manifest = m.str();
    textio::write_text(layout.manifest_path(), summary.manifest);
    return summary;
}

}  // namespace crackbench

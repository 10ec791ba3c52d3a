#pragma once

// Procedural hairline-crack images with exact bounding-box labels.
//
// Pipeline: sample_params -> render_background -> walk_trunk ->
// add_branches -> rasterize -> apply_weathering -> compute_bbox.

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "crackbench/error.hpp"
#include "crackbench/raster.hpp"
#include "crackbench/rng.hpp"

namespace crackbench {

// Eight compass headings in 45 degree steps, counter-clockwise in image
// coordinates starting from east. y grows downward.
enum class Heading : std::uint8_t { E, NE, N, NW, W, SW, S, SE };

inline constexpr int kHeadingCount = 8;

Pixel step_of(Heading h) noexcept;

// Rotate by `octants` * 45 degrees (positive = counter-clockwise).
Heading rotate(Heading h, int octants) noexcept;

struct CrackParams {
    int canvas_width = 640;
    int canvas_height = 640;
    int thickness_px = 3;
    int target_length_px = 240;
    double perturbation_prob = 0.15;
    double direction_change_prob = 0.05;
    double branch_prob = 0.5;
    int max_branches = 2;
    double branch_length_frac = 0.3;
    Rgb crack_color{35, 35, 35};
    Rgb background_base{150, 150, 150};
    int background_noise_amp = 8;
    int weathering_width_px = 2;

    // Throws InvalidArgument naming the first violated constraint.
    void validate() const;

    friend bool operator==(const CrackParams&, const CrackParams&) = default;
};

// Fixed values replacing sampled ones, parsed from key=value text. Keys are
// the CrackParams field names; colors are written "r,g,b".
struct ParamOverrides {
    std::map<std::string, std::string> values;

    // Throws InvalidArgument on an unknown key or an unparsable value.
    void set(const std::string& key, const std::string& value);
    void apply(CrackParams& params) const;
    bool empty() const noexcept { return values.empty(); }

    static ParamOverrides parse(const std::string& text);
    static ParamOverrides load(const std::filesystem::path& path);
};

struct Branch {
    std::size_t attachment = 0;  // index into CrackPath::trunk
    std::vector<Pixel> pixels;
};

struct CrackPath {
    std::vector<Pixel> trunk;
    std::vector<Heading> heading_history;  // one entry per trunk pixel
    std::vector<Branch> branches;
};

struct LabeledBox {
    int class_id = 0;
    BBox box;

    friend bool operator==(const LabeledBox&, const LabeledBox&) = default;
};

inline constexpr int kCrackClass = 0;

struct LabeledImage {
    Raster raster;
    std::vector<LabeledBox> boxes;
    Seed seed;
    std::string label;  // stream label the image was derived from
    CrackParams params;
    // Generation by-products kept for compositing and verification.
    Raster background;
    CrackPath path;
};

CrackParams sample_params(RandomStream& rng);

// Random interior start and heading, then walk_from.
CrackPath walk_trunk(const CrackParams& params, RandomStream& rng);

// Deterministic-start variant: the first pixel is `start`, which must lie
// inside the canvas. At most `length` pixels.
std::vector<Pixel> walk_from(const CrackParams& params, Pixel start, Heading heading,
                             int length, RandomStream& rng,
                             std::vector<Heading>* headings = nullptr);

CrackPath add_branches(CrackPath path, const CrackParams& params, RandomStream& rng);

Raster render_background(const CrackParams& params, RandomStream& rng);

// Stamps a thickness_px square brush (top-left anchored) at every path pixel.
Raster rasterize(const CrackPath& path, const CrackParams& params, const Raster& background);

// Halo of linear blends around the core (pixels differing from background).
// Throws InvalidArgument on a dimension mismatch.
Raster apply_weathering(const Raster& raster, const Raster& background,
                        const CrackParams& params);

// Minimal box around every pixel where final differs from background.
// Throws EmptyCrack when nothing differs, InvalidArgument on mismatch.
BBox compute_bbox(const Raster& final_image, const Raster& background);

class EmptyCrack : public Error {
public:
    EmptyCrack() : Error("empty-crack: no pixel differs from the background") {}
};

// Full pipeline on a caller-supplied stream.
LabeledImage generate_from(RandomStream rng, Seed seed = {},
                           const ParamOverrides& overrides = {});

// Training image `index`, drawn from the stream "crack/<index>".
LabeledImage generate(Seed seed, std::uint64_t index, const ParamOverrides& overrides = {});

// Space-separated key=value rendering, as recorded in manifests.
std::string describe(const CrackParams& params);

std::string crack_label(std::uint64_t index);

}  // namespace crackbench

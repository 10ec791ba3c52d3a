#pragma once

// Fly-By wall scenarios: a procedurally textured wall with placed cracks and
// distractions, swept by an orthographic 1920x1080 camera moving laterally.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "crackbench/crack.hpp"
#include "crackbench/dataset.hpp"
#include "crackbench/error.hpp"
#include "crackbench/raster.hpp"
#include "crackbench/rng.hpp"

namespace crackbench {

enum class WallMaterial { BrownTerracotta, DarkConcrete, LightConcrete, SeamedConcrete };

inline constexpr std::array<WallMaterial, 4> kMaterials = {
    WallMaterial::BrownTerracotta, WallMaterial::DarkConcrete, WallMaterial::LightConcrete,
    WallMaterial::SeamedConcrete};

std::string_view material_name(WallMaterial m) noexcept;
// Accepts the snake_case names ("dark_concrete"); throws InvalidArgument.
WallMaterial parse_material(std::string_view name);

inline constexpr int kViewportWidth = 1920;
inline constexpr int kViewportHeight = 1080;
inline constexpr int kWallHeight = kViewportHeight;
inline constexpr int kDefaultWallWidth = 4 * kViewportWidth;
inline constexpr int kDefaultFrames = 100;
inline constexpr double kDefaultVisibility = 0.25;
inline constexpr int kPlacementRetryCap = 1000;

struct ScenarioSpec {
    std::string name = "custom";
    WallMaterial material = WallMaterial::LightConcrete;
    int n_defects = 2;
    int n_distractions = 0;
    Seed seed;
    bool hard_mode = false;

    int wall_width = kDefaultWallWidth;
    int n_frames = kDefaultFrames;
    // When set, the wall width becomes viewport + step * (frames - 1).
    std::optional<int> step_px;
    double visibility_threshold = kDefaultVisibility;
    // PNG distraction sources; procedural distractions when empty.
    std::filesystem::path distraction_dir;

    void validate() const;
};

struct Placement {
    enum class Kind { Defect, Distraction };
    Kind kind = Kind::Defect;
    std::string source;  // crack stream label or distraction file/label
    Pixel position;      // wall-space top-left of the scaled sprite
    double scale = 1.0;
    BBox wall_bbox;      // extent in wall space
    std::optional<CrackParams> crack_params;
};

struct ShadowBand {
    int center_x = 0;      // wall space, at y = 0
    int half_width = 0;
    double slope = 0;      // wall-x shift per row
    double darkness = 0;   // peak multiplicative attenuation
};

struct Lighting {
    bool enabled = false;
    double ramp_left = 1.0;   // frame-space multiplier at x = 0
    double ramp_right = 1.0;  // at x = viewport width - 1
    std::vector<ShadowBand> bands;
};

struct WallCanvas {
    Raster raster;
    std::vector<Placement> placements;
    Raster background_reference;
    Lighting lighting;
};

struct CameraSweep {
    int viewport_width = kViewportWidth;
    int viewport_height = kViewportHeight;
    int n_frames = 1;
    int step_px = 0;
    double visibility_threshold = kDefaultVisibility;

    // Left edge of frame t, clamped so the window ends at the wall end.
    int window_x(int t, int wall_width) const noexcept;
};

struct FrameSample {
    int index = 0;
    Raster raster;
    std::vector<LabelRecord> labels;
};

class PlacementFailure : public Error {
public:
    using Error::Error;
};

class FrameOutOfRange : public Error {
public:
    using Error::Error;
};

// Throws InvalidArgument when the frames cannot cover the wall.
CameraSweep make_sweep(int wall_width, int n_frames, std::optional<int> step_px,
                       double visibility_threshold = kDefaultVisibility);

Raster synthesize_texture(WallMaterial material, int width, RandomStream& rng);

// Poster/graffiti stand-in: saturated rectangles with thick stroke doodles.
Raster procedural_distraction(RandomStream& rng);

// Cracks are composited through their difference mask against their own
// background; distractions are pasted opaquely. Throws PlacementFailure when
// an item cannot be placed within kPlacementRetryCap draws.
WallCanvas place_items(const Raster& texture, const std::vector<LabeledImage>& cracks,
                       const std::vector<Raster>& distractions, RandomStream& rng,
                       const std::vector<std::string>& distraction_sources = {});

Lighting make_lighting(int wall_width, RandomStream& rng);

// Labels only: every defect with visible fraction >= threshold.
std::vector<LabelRecord> frame_labels(const WallCanvas& canvas, const CameraSweep& sweep, int t);

// Throws FrameOutOfRange when t is not in [0, n_frames).
FrameSample render_frame(const WallCanvas& canvas, const CameraSweep& sweep, int t);

struct Scenario {
    ScenarioSpec spec;
    WallCanvas canvas;
    CameraSweep sweep;
    std::string metadata;

    // Frames render on demand; a full 1080p sweep would not fit in memory.
    FrameSample frame(int t) const { return render_frame(canvas, sweep, t); }
};

Scenario generate_scenario(const ScenarioSpec& spec);

// Writes frames/frame_%05d.png, labels/frame_%05d.txt and metadata.txt.
void write_scenario(const Scenario& scenario, const std::filesystem::path& dir);

// Four materials x {2 defects/0 distractions, 3 defects/2 distractions}.
std::vector<ScenarioSpec> pregen_suite(Seed master_seed);

}  // namespace crackbench

#include "crackbench/scene.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "crackbench/png.hpp"
#include "crackbench/textio.hpp"

namespace crackbench {

namespace {

constexpr int kScaleUnits = 1000000;  // placement scales are multiples of 1e-6
constexpr int kMaxDistractionSide = 640;

struct Palette {
    Rgb base;
    const char* name;
};

constexpr Palette kPalettes[] = {
    {{160, 92, 64}, "brown_terracotta"},
    {{92, 92, 96}, "dark_concrete"},
    {{196, 194, 188}, "light_concrete"},
    {{150, 148, 144}, "seamed_concrete"},
};

constexpr int kMottleCell = 96;
constexpr int kMottleAmp = 12;
constexpr int kGrainAmp = 6;
constexpr int kTintAmp = 2;
constexpr int kSeamWidth = 3;
constexpr int kSeamDarkening = 55;

std::uint8_t clamp8(long v) noexcept { return static_cast<std::uint8_t>(std::clamp(v, 0L, 255L)); }

int scaled_extent(int size, int scale_units) {
    return static_cast<int>((static_cast<long long>(size) * scale_units + kScaleUnits - 1) / kScaleUnits);
}

// Nearest-neighbor source index for destination index i at the given scale.
int source_index(int i, int scale_units, int source_size) {
    const long long s = (static_cast<long long>(2 * i + 1) * kScaleUnits) / (2LL * scale_units);
    return static_cast<int>(std::min<long long>(s, source_size - 1));
}

Raster resample_nearest(const Raster& src, int w, int h) {
    Raster out(w, h);
    for (int y = 0; y < h; ++y) {
        const int sy = static_cast<int>((static_cast<long long>(2 * y + 1) * src.height()) / (2LL * h));
        for (int x = 0; x < w; ++x) {
            const int sx = static_cast<int>((static_cast<long long>(2 * x + 1) * src.width()) / (2LL * w));
            out.set(x, y, src.at(sx, sy));
        }
    }
    return out;
}

Rgb saturated_color(RandomStream& rng) {
    // One channel high, one low, one anywhere: vivid poster colors.
    const int hi = static_cast<int>(rng.next_int_range(200, 255));
    const int lo = static_cast<int>(rng.next_int_range(0, 50));
    const int mid = static_cast<int>(rng.next_int_range(0, 255));
    int c[3];
    const int order = static_cast<int>(rng.next_int_range(0, 5));
    static constexpr int kPerm[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    c[kPerm[order][0]] = hi;
    c[kPerm[order][1]] = lo;
    c[kPerm[order][2]] = mid;
    return {static_cast<std::uint8_t>(c[0]), static_cast<std::uint8_t>(c[1]), static_cast<std::uint8_t>(c[2])};
}

double smoothstep(double t) noexcept {
    t = std::clamp(t, 0.0, 1.0);
    return t * t * (3.0 - 2.0 * t);
}

void apply_lighting(Raster& frame, const Lighting& light, int x0) {
    const int w = frame.width();
    std::vector<double> factor(static_cast<std::size_t>(w));
    for (int y = 0; y < frame.height(); ++y) {
        for (int x = 0; x < w; ++x) {
            const double t = w > 1 ? static_cast<double>(x) / (w - 1) : 0.0;
            factor[static_cast<std::size_t>(x)] = light.ramp_left + (light.ramp_right - light.ramp_left) * t;
        }
        for (const ShadowBand& b : light.bands) {
            const double center = b.center_x + b.slope * y - x0;
            const int lo = std::max(0, static_cast<int>(std::floor(center - b.half_width)));
            const int hi = std::min(w - 1, static_cast<int>(std::ceil(center + b.half_width)));
            for (int x = lo; x <= hi; ++x) {
                const double u = std::abs(x - center) / b.half_width;
                factor[static_cast<std::size_t>(x)] *= 1.0 - b.darkness * smoothstep(1.0 - u);
            }
        }
        std::uint8_t* row = frame.row(y);
        for (int x = 0; x < w; ++x) {
            const double f = factor[static_cast<std::size_t>(x)];
            for (int c = 0; c < 3; ++c) {
                std::uint8_t& v = row[3 * x + c];
                v = clamp8(std::lround(v * f));
            }
        }
    }
}

std::string placement_text(std::size_t i, const Placement& p) {
    std::ostringstream os;
    os << "placement=" << i << " kind=" << (p.kind == Placement::Kind::Defect ? "defect" : "distraction")
       << " source=" << p.source << " x=" << p.position.x << " y=" << p.position.y
       << " scale=" << textio::fixed6(p.scale) << " bbox=" << textio::bbox_text(p.wall_bbox);
    if (p.crack_params) os << " " << describe(*p.crack_params);
    return os.str();
}

}  // namespace

std::string_view material_name(WallMaterial m) noexcept {
    return kPalettes[static_cast<int>(m)].name;
}

WallMaterial parse_material(std::string_view name) {
    for (WallMaterial m : kMaterials) {
        if (material_name(m) == name) return m;
    }
    throw InvalidArgument("unknown material '" + std::string(name) +
                          "' (expected brown_terracotta, dark_concrete, light_concrete or seamed_concrete)");
}

void ScenarioSpec::validate() const {
    if (name.empty() || name.find('/') != std::string::npos) {
        throw InvalidArgument("scenario name must be non-empty and contain no '/'");
    }
    if (n_defects < 0 || n_distractions < 0) throw InvalidArgument("item counts must be nonnegative");
    if (n_frames < 1) throw InvalidArgument("a sweep needs at least one frame");
    if (!step_px && wall_width < kViewportWidth) throw InvalidArgument("wall must be at least one viewport wide");
    if (step_px && (*step_px < 0 || *step_px > kViewportWidth)) {
        throw InvalidArgument("step must be in [0, viewport width]");
    }
    if (!(visibility_threshold > 0.0 && visibility_threshold <= 1.0)) {
        throw InvalidArgument("visibility threshold must be in (0,1]");
    }
}

int CameraSweep::window_x(int t, int wall_width) const noexcept {
    const long long x = static_cast<long long>(t) * step_px;
    return static_cast<int>(std::min<long long>(x, wall_width - viewport_width));
}

CameraSweep make_sweep(int wall_width, int n_frames, std::optional<int> step_px, double visibility_threshold) {
    if (n_frames < 1) throw InvalidArgument("a sweep needs at least one frame");
    if (wall_width < kViewportWidth) throw InvalidArgument("wall narrower than the viewport");
    CameraSweep sweep;
    sweep.n_frames = n_frames;
    sweep.visibility_threshold = visibility_threshold;
    const int travel = wall_width - kViewportWidth;
    if (step_px) {
        sweep.step_px = *step_px;
    } else if (n_frames > 1) {
        sweep.step_px = (travel + n_frames - 2) / (n_frames - 1);
    }
    if (sweep.step_px < 0 || sweep.step_px > kViewportWidth) {
        throw InvalidArgument("sweep step would leave gaps between frames; use more frames");
    }
    if (static_cast<long long>(sweep.step_px) * (n_frames - 1) < travel) {
        throw InvalidArgument("sweep does not reach the end of the wall; use more frames or a larger step");
    }
    return sweep;
}

Raster synthesize_texture(WallMaterial material, int width, RandomStream& rng) {
    if (width < kViewportWidth) throw InvalidArgument("texture must be at least one viewport wide");
    const int height = kWallHeight;
    const Rgb base = kPalettes[static_cast<int>(material)].base;

    const int nx = width / kMottleCell + 2, ny = height / kMottleCell + 2;
    std::vector<int> lattice(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny));
    for (int& v : lattice) v = static_cast<int>(rng.next_int_range(-kMottleAmp, kMottleAmp));
    auto node = [&](int gx, int gy) { return lattice[static_cast<std::size_t>(gy) * static_cast<std::size_t>(nx) + static_cast<std::size_t>(gx)]; };

    Raster out(width, height);
    for (int y = 0; y < height; ++y) {
        const int gy = y / kMottleCell;
        const double ty = smoothstep(static_cast<double>(y % kMottleCell) / kMottleCell);
        std::uint8_t* row = out.row(y);
        for (int x = 0; x < width; ++x) {
            const int gx = x / kMottleCell;
            const double tx = smoothstep(static_cast<double>(x % kMottleCell) / kMottleCell);
            const double top = node(gx, gy) + (node(gx + 1, gy) - node(gx, gy)) * tx;
            const double bottom = node(gx, gy + 1) + (node(gx + 1, gy + 1) - node(gx, gy + 1)) * tx;
            const long shade = std::lround(top + (bottom - top) * ty) + static_cast<long>(rng.next_int_range(-kGrainAmp, kGrainAmp));
            row[3 * x] = clamp8(base.r + shade + static_cast<long>(rng.next_int_range(-kTintAmp, kTintAmp)));
            row[3 * x + 1] = clamp8(base.g + shade + static_cast<long>(rng.next_int_range(-kTintAmp, kTintAmp)));
            row[3 * x + 2] = clamp8(base.b + shade + static_cast<long>(rng.next_int_range(-kTintAmp, kTintAmp)));
        }
    }

    if (material == WallMaterial::SeamedConcrete) {
        // Formwork seams at quasi-regular intervals.
        for (int x = static_cast<int>(rng.next_int_range(200, 479)); x + kSeamWidth <= width;
             x += 480 + static_cast<int>(rng.next_int_range(-40, 40))) {
            for (int y = 0; y < height; ++y) {
                std::uint8_t* p = out.row(y) + 3 * static_cast<std::size_t>(x);
                for (int i = 0; i < 3 * kSeamWidth; ++i) p[i] = clamp8(static_cast<long>(p[i]) - kSeamDarkening);
            }
        }
    }
    return out;
}

Raster procedural_distraction(RandomStream& rng) {
    const int w = static_cast<int>(rng.next_int_range(220, 520));
    const int h = static_cast<int>(rng.next_int_range(160, 420));
    Raster out(w, h, saturated_color(rng));

    const int rects = static_cast<int>(rng.next_int_range(2, 5));
    for (int i = 0; i < rects; ++i) {
        const int rw = static_cast<int>(rng.next_int_range(w / 8, w / 2));
        const int rh = static_cast<int>(rng.next_int_range(h / 8, h / 2));
        const int rx = static_cast<int>(rng.next_int_range(0, w - rw));
        const int ry = static_cast<int>(rng.next_int_range(0, h - rh));
        const Rgb c = saturated_color(rng);
        for (int y = ry; y < ry + rh; ++y) {
            for (int x = rx; x < rx + rw; ++x) out.set(x, y, c);
        }
    }

    // Graffiti-like strokes: wandering thick lines.
    const int strokes = static_cast<int>(rng.next_int_range(3, 6));
    for (int i = 0; i < strokes; ++i) {
        const Rgb c = saturated_color(rng);
        const int brush = static_cast<int>(rng.next_int_range(4, 9));
        int x = static_cast<int>(rng.next_int_range(0, w - 1));
        int y = static_cast<int>(rng.next_int_range(0, h - 1));
        auto heading = static_cast<Heading>(rng.next_int_range(0, kHeadingCount - 1));
        const int length = static_cast<int>(rng.next_int_range(60, 260));
        for (int s = 0; s < length; ++s) {
            for (int yy = y; yy < y + brush; ++yy) {
                for (int xx = x; xx < x + brush; ++xx) {
                    if (out.contains(xx, yy)) out.set(xx, yy, c);
                }
            }
            if (rng.next_bernoulli(0.2)) heading = rotate(heading, rng.next_int_range(0, 1) ? 1 : -1);
            const Pixel step = step_of(heading);
            x = std::clamp(x + step.x, 0, w - 1);
            y = std::clamp(y + step.y, 0, h - 1);
        }
    }
    return out;
}

WallCanvas place_items(const Raster& texture, const std::vector<LabeledImage>& cracks,
                       const std::vector<Raster>& distractions, RandomStream& rng,
                       const std::vector<std::string>& distraction_sources) {
    WallCanvas canvas;
    canvas.raster = texture;
    canvas.background_reference = texture;
    const int wall_w = texture.width(), wall_h = texture.height();
    std::vector<BBox> defect_boxes;

    for (std::size_t k = 0; k < cracks.size(); ++k) {
        const LabeledImage& crack = cracks[k];
        if (crack.boxes.empty()) throw InvalidArgument("crack image without a bounding box");
        const BBox src = crack.boxes.front().box;
        const int scale = static_cast<int>(rng.next_int_range(kScaleUnits / 2, kScaleUnits));
        const int sw = scaled_extent(src.width(), scale), sh = scaled_extent(src.height(), scale);
        if (sw > wall_w || sh > wall_h) throw PlacementFailure("placement-failure: crack larger than the wall");

        std::optional<BBox> placed;
        for (int attempt = 0; attempt < kPlacementRetryCap && !placed; ++attempt) {
            const int x = static_cast<int>(rng.next_int_range(0, wall_w - sw));
            const int y = static_cast<int>(rng.next_int_range(0, wall_h - sh));
            const BBox box{x, y, x + sw - 1, y + sh - 1};
            if (std::none_of(defect_boxes.begin(), defect_boxes.end(),
                             [&](const BBox& b) { return intersects(b, box); })) {
                placed = box;
            }
        }
        if (!placed) {
            throw PlacementFailure("placement-failure: could not place defect " + std::to_string(k) + " after " +
                                   std::to_string(kPlacementRetryCap) + " attempts (canvas overcrowded)");
        }

        for (int j = 0; j < sh; ++j) {
            const int sy = src.y_min + source_index(j, scale, src.height());
            for (int i = 0; i < sw; ++i) {
                const int sx = src.x_min + source_index(i, scale, src.width());
                const Rgb c = crack.raster.at(sx, sy);
                if (c != crack.background.at(sx, sy)) canvas.raster.set(placed->x_min + i, placed->y_min + j, c);
            }
        }
        defect_boxes.push_back(*placed);
        canvas.placements.push_back({Placement::Kind::Defect, crack.label, {placed->x_min, placed->y_min},
                                     static_cast<double>(scale) / kScaleUnits, *placed, crack.params});
    }

    for (std::size_t k = 0; k < distractions.size(); ++k) {
        const Raster& d = distractions[k];
        if (d.width() > wall_w || d.height() > wall_h) {
            throw PlacementFailure("placement-failure: distraction larger than the wall");
        }
        std::optional<BBox> placed;
        for (int attempt = 0; attempt < kPlacementRetryCap && !placed; ++attempt) {
            const int x = static_cast<int>(rng.next_int_range(0, wall_w - d.width()));
            const int y = static_cast<int>(rng.next_int_range(0, wall_h - d.height()));
            const BBox box{x, y, x + d.width() - 1, y + d.height() - 1};
            if (std::none_of(defect_boxes.begin(), defect_boxes.end(),
                             [&](const BBox& b) { return intersects(b, box); })) {
                placed = box;
            }
        }
        if (!placed) {
            throw PlacementFailure("placement-failure: could not place distraction " + std::to_string(k) +
                                   " after " + std::to_string(kPlacementRetryCap) + " attempts (canvas overcrowded)");
        }
        for (int y = 0; y < d.height(); ++y) {
            for (int x = 0; x < d.width(); ++x) canvas.raster.set(placed->x_min + x, placed->y_min + y, d.at(x, y));
        }
        const std::string source =
            k < distraction_sources.size() ? distraction_sources[k] : "distraction/" + std::to_string(k);
        canvas.placements.push_back({Placement::Kind::Distraction, source, {placed->x_min, placed->y_min}, 1.0,
                                     *placed, std::nullopt});
    }
    return canvas;
}

Lighting make_lighting(int wall_width, RandomStream& rng) {
    Lighting light;
    light.enabled = true;
    const double dim = static_cast<double>(rng.next_int_range(60, 85)) / 100.0;
    if (rng.next_int_range(0, 1) == 0) {
        light.ramp_right = dim;
    } else {
        light.ramp_left = dim;
    }
    // Spacing in [560, 700] puts between 2 and 4 band centers in any
    // 1920-wide window.
    for (long long x = rng.next_int_range(0, 559); x < wall_width + 700; x += rng.next_int_range(560, 700)) {
        ShadowBand b;
        b.center_x = static_cast<int>(x);
        b.half_width = static_cast<int>(rng.next_int_range(40, 160));
        b.slope = static_cast<double>(rng.next_int_range(-40, 40)) / 100.0;
        b.darkness = static_cast<double>(rng.next_int_range(25, 55)) / 100.0;
        light.bands.push_back(b);
    }
    return light;
}

std::vector<LabelRecord> frame_labels(const WallCanvas& canvas, const CameraSweep& sweep, int t) {
    const int wall_w = canvas.raster.width();
    const int x0 = sweep.window_x(t, wall_w);
    const BBox window{x0, 0, x0 + sweep.viewport_width - 1, sweep.viewport_height - 1};
    std::vector<LabelRecord> labels;
    for (const Placement& p : canvas.placements) {
        if (p.kind != Placement::Kind::Defect || !intersects(p.wall_bbox, window)) continue;
        const BBox inter{std::max(p.wall_bbox.x_min, window.x_min), std::max(p.wall_bbox.y_min, window.y_min),
                         std::min(p.wall_bbox.x_max, window.x_max), std::min(p.wall_bbox.y_max, window.y_max)};
        const double visible = static_cast<double>(inter.area()) / static_cast<double>(p.wall_bbox.area());
        if (visible < sweep.visibility_threshold) continue;
        const BBox local{inter.x_min - x0, inter.y_min, inter.x_max - x0, inter.y_max};
        labels.push_back(to_label_record(local, sweep.viewport_width, sweep.viewport_height, kCrackClass));
    }
    return labels;
}

FrameSample render_frame(const WallCanvas& canvas, const CameraSweep& sweep, int t) {
    if (t < 0 || t >= sweep.n_frames) {
        throw FrameOutOfRange("frame-out-of-range: " + std::to_string(t) + " not in [0, " +
                              std::to_string(sweep.n_frames) + ")");
    }
    FrameSample f;
    f.index = t;
    const int x0 = sweep.window_x(t, canvas.raster.width());
    f.raster = canvas.raster.crop(x0, 0, sweep.viewport_width, sweep.viewport_height);
    if (canvas.lighting.enabled) apply_lighting(f.raster, canvas.lighting, x0);
    f.labels = frame_labels(canvas, sweep, t);
    return f;
}

Scenario generate_scenario(const ScenarioSpec& spec) {
    spec.validate();
    Scenario sc;
    sc.spec = spec;
    const int wall_w = spec.step_px ? kViewportWidth + *spec.step_px * (spec.n_frames - 1) : spec.wall_width;
    sc.spec.wall_width = wall_w;
    sc.sweep = make_sweep(wall_w, spec.n_frames, spec.step_px, spec.visibility_threshold);

    const std::string prefix = "scenario/" + spec.name;
    RandomStream tex_rng = derive_stream(spec.seed, prefix + "/texture");
    const Raster texture = synthesize_texture(spec.material, wall_w, tex_rng);

    std::vector<LabeledImage> cracks;
    for (int k = 0; k < spec.n_defects; ++k) {
        cracks.push_back(generate_from(derive_stream(spec.seed, prefix + "/crack/" + std::to_string(k)), spec.seed));
    }

    std::vector<Raster> distractions;
    std::vector<std::string> sources;
    std::vector<std::filesystem::path> files;
    if (!spec.distraction_dir.empty()) {
        std::error_code ec;
        for (const auto& e : std::filesystem::directory_iterator(spec.distraction_dir, ec)) {
            if (e.is_regular_file() && e.path().extension() == ".png") files.push_back(e.path());
        }
        if (ec) throw IoError(spec.distraction_dir, "io-failure: cannot list distraction directory");
        if (files.empty() && spec.n_distractions > 0) {
            throw IoError(spec.distraction_dir, "no .png files in distraction directory");
        }
        std::sort(files.begin(), files.end());
    }
    for (int k = 0; k < spec.n_distractions; ++k) {
        RandomStream rng = derive_stream(spec.seed, prefix + "/distraction/" + std::to_string(k));
        if (files.empty()) {
            distractions.push_back(procedural_distraction(rng));
            sources.push_back("procedural/" + std::to_string(k));
            continue;
        }
        const auto& file = files[static_cast<std::size_t>(rng.next_int_range(0, static_cast<std::int64_t>(files.size()) - 1))];
        Raster img = png::read_file(file);
        const int side = std::max(img.width(), img.height());
        if (side > kMaxDistractionSide) {
            const auto fit = [&](int v) { return std::max(1, static_cast<int>(static_cast<long long>(v) * kMaxDistractionSide / side)); };
            img = resample_nearest(img, fit(img.width()), fit(img.height()));
        }
        distractions.push_back(std::move(img));
        sources.push_back(file.filename().string());
    }

    RandomStream place_rng = derive_stream(spec.seed, prefix + "/placement");
    sc.canvas = place_items(texture, cracks, distractions, place_rng, sources);
    if (spec.hard_mode) {
        RandomStream light_rng = derive_stream(spec.seed, prefix + "/lighting");
        sc.canvas.lighting = make_lighting(wall_w, light_rng);
    }

    std::ostringstream m;
    m << "# fly-by scenario metadata\n"
      << "format=crackbench-scenario-1\n"
      << "name=" << spec.name << "\n"
      << "seed=" << spec.seed.value << "\n"
      << "material=" << material_name(spec.material) << "\n"
      << "n_defects=" << spec.n_defects << "\n"
      << "n_distractions=" << spec.n_distractions << "\n"
      << "hard_mode=" << (spec.hard_mode ? 1 : 0) << "\n"
      << "wall_width=" << wall_w << "\n"
      << "wall_height=" << kWallHeight << "\n"
      << "viewport=" << sc.sweep.viewport_width << "x" << sc.sweep.viewport_height << "\n"
      << "n_frames=" << sc.sweep.n_frames << "\n"
      << "step_px=" << sc.sweep.step_px << "\n"
      << "visibility_threshold=" << textio::fixed6(sc.sweep.visibility_threshold) << "\n"
      << "label_classes=crack\n";
    for (std::size_t i = 0; i < sc.canvas.placements.size(); ++i) m << placement_text(i, sc.canvas.placements[i]) << "\n";
    if (sc.canvas.lighting.enabled) {
        const Lighting& l = sc.canvas.lighting;
        m << "lighting.ramp=" << textio::fixed6(l.ramp_left) << "," << textio::fixed6(l.ramp_right) << "\n";
        for (const auto& b : l.bands) {
            m << "lighting.band=" << b.center_x << "," << b.half_width << "," << textio::fixed6(b.slope) << ","
              << textio::fixed6(b.darkness) << "\n";
        }
    }
    sc.metadata = m.str();
    return sc;
}

void write_scenario(const Scenario& scenario, const std::filesystem::path& dir) {
    for (const auto& sub : {dir / "frames", dir / "labels"}) {
        std::error_code ec;
        std::filesystem::create_directories(sub, ec);
        if (ec) throw IoError(sub, "io-failure: cannot create directory (" + ec.message() + ")");
    }
    for (int t = 0; t < scenario.sweep.n_frames; ++t) {
        const FrameSample f = scenario.frame(t);
        char stem[32];
        std::snprintf(stem, sizeof stem, "frame_%05d", t);
        png::write_file(dir / "frames" / (std::string(stem) + ".png"), f.raster);
        std::string labels;
        for (const auto& r : f.labels) labels += format_label_line(r);
        textio::write_text(dir / "labels" / (std::string(stem) + ".txt"), labels);
    }
    textio::write_text(dir / "metadata.txt", scenario.metadata);
}

std::vector<ScenarioSpec> pregen_suite(Seed master_seed) {
    std::vector<ScenarioSpec> suite;
    int id = 1;
    for (WallMaterial m : kMaterials) {
        for (auto [defects, distractions] : {std::pair{2, 0}, std::pair{3, 2}}) {
            ScenarioSpec s;
            char name[64];
            std::snprintf(name, sizeof name, "flyby_%02d_%s", id++, std::string(material_name(m)).c_str());
            s.name = name;
            s.material = m;
            s.n_defects = defects;
            s.n_distractions = distractions;
            s.seed = master_seed;
            suite.push_back(std::move(s));
        }
    }
    return suite;
}

}  // namespace crackbench

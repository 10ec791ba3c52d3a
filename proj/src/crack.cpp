#include "crackbench/crack.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "crackbench/error.hpp"
#include "crackbench/textio.hpp"

namespace crackbench {

namespace {

constexpr Pixel kSteps[kHeadingCount] = {{1, 0},  {1, -1}, {0, -1}, {-1, -1},
                                        {-1, 0}, {-1, 1}, {0, 1},  {1, 1}};

std::uint8_t clamp_channel(int v) noexcept {
    return static_cast<std::uint8_t>(std::clamp(v, 0, 255));
}

int signed_unit(RandomStream& rng) {
    return rng.next_int_range(0, 1) == 0 ? -1 : 1;
}

}  // namespace

Pixel step_of(Heading h) noexcept {
    return kSteps[static_cast<int>(h)];
}

Heading rotate(Heading h, int octants) noexcept {
    const int v = ((static_cast<int>(h) + octants) % kHeadingCount + kHeadingCount) % kHeadingCount;
    return static_cast<Heading>(v);
}

void CrackParams::validate() const {
    auto fail = [](const std::string& what) { throw InvalidArgument("invalid crack params: " + what); };
    auto probability = [&](double p, const char* name) {
        if (!(p >= 0.0 && p <= 1.0)) fail(std::string(name) + " must be in [0,1]");
    };
    if (canvas_width < 1 || canvas_height < 1) fail("canvas must be at least 1x1");
    if (thickness_px < 2 || thickness_px > 4) fail("thickness_px must be in [2,4]");
    if (target_length_px < thickness_px) fail("target_length_px must be >= thickness_px");
    probability(perturbation_prob, "perturbation_prob");
    probability(direction_change_prob, "direction_change_prob");
    probability(branch_prob, "branch_prob");
    if (max_branches < 0) fail("max_branches must be >= 0");
    if (!(branch_length_frac > 0.0 && branch_length_frac <= 1.0)) fail("branch_length_frac must be in (0,1]");
    if (background_noise_amp < 0 || background_noise_amp > 255) fail("background_noise_amp must be in [0,255]");
    if (weathering_width_px < 1) fail("weathering_width_px must be >= 1");
}

void ParamOverrides::set(const std::string& key, const std::string& value) {
    static const char* const kKeys[] = {
        "canvas_width",          "canvas_height", "thickness_px",         "target_length_px",
        "perturbation_prob",     "direction_change_prob", "branch_prob",  "max_branches",
        "branch_length_frac",    "crack_color",   "background_base",      "background_noise_amp",
        "weathering_width_px"};
    if (std::find(std::begin(kKeys), std::end(kKeys), key) == std::end(kKeys)) {
        throw InvalidArgument("unknown crack parameter '" + key + "'");
    }
    // Parse eagerly so errors surface at load time.
    ParamOverrides single;
    single.values[key] = value;
    CrackParams probe;
    single.apply(probe);
    values[key] = value;
}

void ParamOverrides::apply(CrackParams& p) const {
    for (const auto& [key, value] : values) {
        if (key == "canvas_width") p.canvas_width = textio::parse_int(value, key);
        else if (key == "canvas_height") p.canvas_height = textio::parse_int(value, key);
        else if (key == "thickness_px") p.thickness_px = textio::parse_int(value, key);
        else if (key == "target_length_px") p.target_length_px = textio::parse_int(value, key);
        else if (key == "perturbation_prob") p.perturbation_prob = textio::parse_double(value, key);
        else if (key == "direction_change_prob") p.direction_change_prob = textio::parse_double(value, key);
        else if (key == "branch_prob") p.branch_prob = textio::parse_double(value, key);
        else if (key == "max_branches") p.max_branches = textio::parse_int(value, key);
        else if (key == "branch_length_frac") p.branch_length_frac = textio::parse_double(value, key);
        else if (key == "crack_color") p.crack_color = textio::parse_rgb(value, key);
        else if (key == "background_base") p.background_base = textio::parse_rgb(value, key);
        else if (key == "background_noise_amp") p.background_noise_amp = textio::parse_int(value, key);
        else if (key == "weathering_width_px") p.weathering_width_px = textio::parse_int(value, key);
    }
}

ParamOverrides ParamOverrides::parse(const std::string& text) {
    ParamOverrides out;
    for (const auto& [key, value] : textio::parse_key_values(text)) out.set(key, value);
    return out;
}

ParamOverrides ParamOverrides::load(const std::filesystem::path& path) {
    return parse(textio::read_text(path));
}

CrackParams sample_params(RandomStream& rng) {
    CrackParams p;
    p.thickness_px = static_cast<int>(rng.next_int_range(2, 4));
    p.target_length_px = static_cast<int>(rng.next_int_range(120, 480));
    p.perturbation_prob = 0.15;
    p.direction_change_prob = 0.05;
    p.branch_prob = 0.5;
    p.max_branches = static_cast<int>(rng.next_int_range(0, 3));
    // Quantized to 1e-6 so the manifest's 6-decimal value reproduces it.
    p.branch_length_frac = static_cast<double>(rng.next_int_range(200000, 500000)) / 1e6;
    p.weathering_width_px = static_cast<int>(rng.next_int_range(1, 3));
    // Dark gray with a slight per-channel tint, every channel in [10, 60].
    const int gray = static_cast<int>(rng.next_int_range(10, 60));
    auto tinted = [&] { return static_cast<std::uint8_t>(std::clamp(gray + static_cast<int>(rng.next_int_range(-4, 4)), 10, 60)); };
    const std::uint8_t r = tinted(), g = tinted(), b = tinted();
    p.crack_color = {r, g, b};
    // Gray level shifted toward red and away from blue for warm tones.
    const int level = static_cast<int>(rng.next_int_range(100, 200));
    const int warmth = static_cast<int>(rng.next_int_range(0, 30));
    p.background_base = {static_cast<std::uint8_t>(std::min(200, level + warmth)),
                         static_cast<std::uint8_t>(level),
                         static_cast<std::uint8_t>(std::max(100, level - warmth))};
    p.background_noise_amp = static_cast<int>(rng.next_int_range(4, 16));
    return p;
}

std::vector<Pixel> walk_from(const CrackParams& params, Pixel start, Heading heading, int length,
                             RandomStream& rng, std::vector<Heading>* headings) {
    std::vector<Pixel> out;
    if (length <= 0 || start.x < 0 || start.y < 0 || start.x >= params.canvas_width ||
        start.y >= params.canvas_height) {
        return out;
    }
    out.reserve(static_cast<std::size_t>(length));
    out.push_back(start);
    if (headings) headings->push_back(heading);

    Pixel cur = start;
    while (static_cast<int>(out.size()) < length) {
        if (rng.next_bernoulli(params.direction_change_prob)) {
            heading = rotate(heading, signed_unit(rng));
        }
        // A perturbation swings only this step by 45 degrees: a one-pixel
        // sideways offset for axis headings, a purely horizontal or vertical
        // move for diagonal ones. The heading itself is kept.
        Pixel step = step_of(heading);
        if (rng.next_bernoulli(params.perturbation_prob)) {
            step = step_of(rotate(heading, signed_unit(rng)));
        }
        const Pixel next{cur.x + step.x, cur.y + step.y};
        if (next.x < 0 || next.y < 0 || next.x >= params.canvas_width || next.y >= params.canvas_height) {
            break;
        }
        out.push_back(next);
        if (headings) headings->push_back(heading);
        cur = next;
    }
    return out;
}

CrackPath walk_trunk(const CrackParams& params, RandomStream& rng) {
    // Interior: not on the canvas border (degenerates to the border for
    // canvases narrower than 3 pixels).
    const int x_hi = std::max(0, params.canvas_width - 2);
    const int y_hi = std::max(0, params.canvas_height - 2);
    const Pixel start{static_cast<int>(rng.next_int_range(std::min(1, x_hi), x_hi)),
                      static_cast<int>(rng.next_int_range(std::min(1, y_hi), y_hi))};
    const auto heading = static_cast<Heading>(rng.next_int_range(0, kHeadingCount - 1));

    CrackPath path;
    path.trunk = walk_from(params, start, heading, params.target_length_px, rng, &path.heading_history);
    return path;
}

CrackPath add_branches(CrackPath path, const CrackParams& params, RandomStream& rng) {
    if (path.trunk.empty()) return path;
    const auto trunk_len = static_cast<double>(path.trunk.size());
    const int length = std::max(1, static_cast<int>(std::lround(params.branch_length_frac * trunk_len)));

    for (int k = 0; k < params.max_branches; ++k) {
        if (!rng.next_bernoulli(params.branch_prob)) continue;
        const auto attach = static_cast<std::size_t>(
            rng.next_int_range(0, static_cast<std::int64_t>(path.trunk.size()) - 1));
        const Heading base = path.heading_history[attach];
        const int magnitude = static_cast<int>(rng.next_int_range(1, 2));  // 45 or 90 degrees
        const int sign = signed_unit(rng);
        // Fall back through the other 45-90 degree offsets when the drawn one
        // leaves the canvas immediately.
        const int candidates[4] = {sign * magnitude, -sign * magnitude, sign * (3 - magnitude),
                                   -sign * (3 - magnitude)};
        const Pixel at = path.trunk[attach];
        for (int octants : candidates) {
            const Heading h = rotate(base, octants);
            const Pixel s = step_of(h);
            const Pixel first{at.x + s.x, at.y + s.y};
            if (first.x < 0 || first.y < 0 || first.x >= params.canvas_width ||
                first.y >= params.canvas_height) {
                continue;
            }
            path.branches.push_back({attach, walk_from(params, first, h, length, rng)});
            break;
        }
    }
    return path;
}

Raster render_background(const CrackParams& params, RandomStream& rng) {
    Raster out(params.canvas_width, params.canvas_height);
    const int amp = params.background_noise_amp;
    const int base[3] = {params.background_base.r, params.background_base.g, params.background_base.b};
    auto& bytes = out.bytes();
    for (std::size_t i = 0; i < bytes.size(); i += 3) {
        for (int c = 0; c < 3; ++c) {
            const int noise = amp == 0 ? 0 : static_cast<int>(rng.next_int_range(-amp, amp));
            bytes[i + static_cast<std::size_t>(c)] = clamp_channel(base[c] + noise);
        }
    }
    return out;
}

namespace {

void stamp(Raster& out, Pixel p, int size, Rgb color) {
    for (int y = p.y; y < p.y + size; ++y) {
        for (int x = p.x; x < p.x + size; ++x) {
            if (out.contains(x, y)) out.set(x, y, color);
        }
    }
}

void require_same_dims(const Raster& a, const Raster& b, const char* op) {
    if (a.width() != b.width() || a.height() != b.height()) {
        throw InvalidArgument(std::string("dimension-mismatch in ") + op);
    }
}

}  // namespace

Raster rasterize(const CrackPath& path, const CrackParams& params, const Raster& background) {
    Raster out = background;
    for (const Pixel& p : path.trunk) stamp(out, p, params.thickness_px, params.crack_color);
    for (const Branch& b : path.branches) {
        for (const Pixel& p : b.pixels) stamp(out, p, params.thickness_px, params.crack_color);
    }
    return out;
}

Raster apply_weathering(const Raster& raster, const Raster& background, const CrackParams& params) {
    require_same_dims(raster, background, "apply_weathering");
    const int w = raster.width(), h = raster.height();
    const int halo = params.weathering_width_px;
    constexpr int kFar = std::numeric_limits<int>::max();

    // Chebyshev distance to the nearest core pixel, exact up to `halo`.
    std::vector<int> dist(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), kFar);
    auto idx = [w](int x, int y) { return static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x); };
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (raster.at(x, y) == background.at(x, y)) continue;
            for (int yy = std::max(0, y - halo); yy <= std::min(h - 1, y + halo); ++yy) {
                for (int xx = std::max(0, x - halo); xx <= std::min(w - 1, x + halo); ++xx) {
                    const int d = std::max(std::abs(xx - x), std::abs(yy - y));
                    int& slot = dist[idx(xx, yy)];
                    slot = std::min(slot, d);
                }
            }
        }
    }

    Raster out = raster;
    const int den = halo + 1;
    const Rgb crack = params.crack_color;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const int d = dist[idx(x, y)];
            if (d == 0 || d == kFar) continue;
            // weight = 1 - d / (halo + 1), rounded to nearest.
            const int num = den - d;
            const Rgb bg = background.at(x, y);
            auto blend = [&](int c, int b) {
                return static_cast<std::uint8_t>((num * c + (den - num) * b + den / 2) / den);
            };
            out.set(x, y, {blend(crack.r, bg.r), blend(crack.g, bg.g), blend(crack.b, bg.b)});
        }
    }
    return out;
}

BBox compute_bbox(const Raster& final_image, const Raster& background) {
    require_same_dims(final_image, background, "compute_bbox");
    BBox box{final_image.width(), final_image.height(), -1, -1};
    for (int y = 0; y < final_image.height(); ++y) {
        const std::uint8_t* a = final_image.row(y);
        const std::uint8_t* b = background.row(y);
        for (int x = 0; x < final_image.width(); ++x) {
            if (a[3 * x] == b[3 * x] && a[3 * x + 1] == b[3 * x + 1] && a[3 * x + 2] == b[3 * x + 2]) continue;
            box.x_min = std::min(box.x_min, x);
            box.x_max = std::max(box.x_max, x);
            box.y_min = std::min(box.y_min, y);
            box.y_max = std::max(box.y_max, y);
        }
    }
    if (box.x_max < 0) throw EmptyCrack();
    return box;
}

LabeledImage generate_from(RandomStream rng, Seed seed, const ParamOverrides& overrides) {
    LabeledImage img;
    img.seed = seed;
    img.label = rng.origin();
    img.params = sample_params(rng);
    overrides.apply(img.params);
    img.params.validate();

    img.background = render_background(img.params, rng);
    img.path = add_branches(walk_trunk(img.params, rng), img.params, rng);
    Raster core = rasterize(img.path, img.params, img.background);
    img.raster = apply_weathering(core, img.background, img.params);
    img.boxes.push_back({kCrackClass, compute_bbox(img.raster, img.background)});
    return img;
}

std::string describe(const CrackParams& p) {
    std::ostringstream os;
    os << "canvas=" << p.canvas_width << "x" << p.canvas_height << " thickness_px=" << p.thickness_px
       << " target_length_px=" << p.target_length_px
       << " perturbation_prob=" << textio::fixed6(p.perturbation_prob)
       << " direction_change_prob=" << textio::fixed6(p.direction_change_prob)
       << " branch_prob=" << textio::fixed6(p.branch_prob) << " max_branches=" << p.max_branches
       << " branch_length_frac=" << textio::fixed6(p.branch_length_frac)
       << " crack_color=" << textio::rgb_text(p.crack_color)
       << " background_base=" << textio::rgb_text(p.background_base)
       << " background_noise_amp=" << p.background_noise_amp
       << " weathering_width_px=" << p.weathering_width_px;
    return os.str();
}

std::string crack_label(std::uint64_t index) {
    return "crack/" + std::to_string(index);
}

LabeledImage generate(Seed seed, std::uint64_t index, const ParamOverrides& overrides) {
    return generate_from(derive_stream(seed, crack_label(index)), seed, overrides);
}

}  // namespace crackbench

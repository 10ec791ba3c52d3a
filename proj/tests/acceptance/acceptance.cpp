// Runs each acceptance criterion and prints one PASS/FAIL line per
// criterion. Exit status is nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "crackbench/commands.hpp"
#include "crackbench/png.hpp"
#include "crackbench/textio.hpp"
#include "../libpng_oracle.hpp"
#include "../support.hpp"

using namespace crackbench;
namespace fs = std::filesystem;

namespace {

// Tree hash of `gen-cracks --count 100 --seed 42`, recorded on x86-64 Linux.
// A mismatch on another platform means the output is not portable.
constexpr std::uint64_t kGoldenDatasetHash = 0xc02474d3afd76fb7ULL;

class Failure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

template <typename... Args>
std::string fmt(const char* f, Args... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

void expect(bool ok, const std::string& what) {
    if (!ok) throw Failure(what);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int run_cli(std::vector<std::string> args, std::string* out_text = nullptr) {
    args.insert(args.begin(), "crackbench");
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    if (out_text) *out_text = out.str();
    if (code != 0) std::cerr << err.str();
    return code;
}

std::set<std::pair<int, int>> stamp_set(const CrackPath& path, int t, int w, int h) {
    std::vector<Pixel> all = path.trunk;
    for (const auto& b : path.branches) all.insert(all.end(), b.pixels.begin(), b.pixels.end());
    std::set<std::pair<int, int>> out;
    for (const Pixel& p : all) {
        for (int dy = 0; dy < t; ++dy) {
            for (int dx = 0; dx < t; ++dx) {
                if (p.x + dx < w && p.y + dy < h) out.insert({p.x + dx, p.y + dy});
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------- 1

std::string criterion1(const fs::path& scratch) {
    const fs::path a = scratch / "c1_a", b = scratch / "c1_b";
    double worst = 0;
    for (const fs::path& d : {a, b}) {
        const auto t0 = std::chrono::steady_clock::now();
        expect(run_cli({"gen-cracks", "--count", "100", "--seed", "42", "--out", d.string()}) == 0, "gen-cracks failed");
        worst = std::max(worst, seconds_since(t0));
    }
    const std::uint64_t ha = testsupport::tree_hash(a), hb = testsupport::tree_hash(b);
    fs::remove_all(a);
    fs::remove_all(b);
    expect(ha == hb, fmt("tree hashes differ: %016llx vs %016llx", (unsigned long long)ha, (unsigned long long)hb));
    expect(worst < 30.0, fmt("slowest run took %.1f s", worst));
    if (kGoldenDatasetHash != 0) {
        expect(ha == kGoldenDatasetHash, fmt("tree hash %016llx differs from the recorded %016llx",
                                             (unsigned long long)ha, (unsigned long long)kGoldenDatasetHash));
    }
    return fmt("hash %016llx, slowest run %.1f s", (unsigned long long)ha, worst);
}

// ---------------------------------------------------------------- 2

std::string criterion2() {
    constexpr int kImages = 1000;
    for (std::uint64_t i = 0; i < kImages; ++i) {
        const LabeledImage img = generate(Seed{2}, i);
        const int w = img.raster.width(), h = img.raster.height();
        const auto mask = testsupport::diff_mask(img.raster, img.background);

        // (a) connectivity
        const int comps = testsupport::count_components8(mask, w, h);
        expect(comps == 1, fmt("image %llu: %d components", (unsigned long long)i, comps));

        // (b) minimality against a direct scan of the diff mask
        BBox scan{w, h, -1, -1};
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                if (!mask[static_cast<std::size_t>(y) * w + x]) continue;
                scan.x_min = std::min(scan.x_min, x);
                scan.y_min = std::min(scan.y_min, y);
                scan.x_max = std::max(scan.x_max, x);
                scan.y_max = std::max(scan.y_max, y);
            }
        }
        expect(img.boxes.size() == 1 && img.boxes[0].box == scan, fmt("image %llu: bbox is not minimal", (unsigned long long)i));

        // (d) every affected pixel is within the halo of a stamped pixel
        const auto core = stamp_set(img.path, img.params.thickness_px, w, h);
        const int halo = img.params.weathering_width_px;
        std::vector<char> reach(mask.size(), 0);
        for (auto [x, y] : core) {
            for (int dy = -halo; dy <= halo; ++dy) {
                for (int dx = -halo; dx <= halo; ++dx) {
                    const int xx = x + dx, yy = y + dy;
                    if (xx >= 0 && yy >= 0 && xx < w && yy < h) reach[static_cast<std::size_t>(yy) * w + xx] = 1;
                }
            }
        }
        for (std::size_t k = 0; k < mask.size(); ++k) {
            expect(!mask[k] || reach[k], fmt("image %llu: pixel beyond the weathering halo", (unsigned long long)i));
        }
    }

    // (c) cross-section of straight trunks
    for (int t : {2, 3, 4}) {
        CrackParams p;
        p.perturbation_prob = 0;
        p.direction_change_prob = 0;
        p.branch_prob = 0;
        p.thickness_px = t;
        const Raster bg(640, 640, {150, 150, 150});
        auto rng = derive_stream(Seed{0}, "straight");
        for (Heading hd : {Heading::E, Heading::S}) {
            CrackPath path;
            path.trunk = walk_from(p, {100, 100}, hd, 300, rng);
            const Raster core = rasterize(path, p, bg);
            for (int k = 0; k < 300; ++k) {
                int width = 0;
                for (int j = 0; j < 640; ++j) {
                    const Pixel q = hd == Heading::E ? Pixel{100 + k, j} : Pixel{j, 100 + k};
                    width += core.at(q.x, q.y) != bg.at(q.x, q.y);
                }
                expect(width == t, fmt("thickness %d: cross-section %d at step %d", t, width, k));
            }
        }
    }
    return fmt("%d images, 0 violations", kImages);
}

// ---------------------------------------------------------------- 3

std::string criterion3() {
    std::mt19937_64 gen(3);
    for (int i = 0; i < 100; ++i) {
        const int w = 1 + static_cast<int>(gen() % 400), h = 1 + static_cast<int>(gen() % 400);
        const Raster r = testsupport::random_raster(gen, w, h);
        const auto file = png::encode(r);
        expect(png::decode(file) == r, fmt("raster %d (%dx%d): round trip differs", i, w, h));
        const auto ref = testsupport::libpng_decode(file);
        expect(ref.ok && ref.width == w && ref.height == h, fmt("raster %d: rejected by libpng", i));
        expect(std::equal(ref.rgb.begin(), ref.rgb.end(), r.bytes().begin()), fmt("raster %d: libpng pixels differ", i));
    }
    return "100 rasters, round trip exact, libpng accepts all";
}

// ---------------------------------------------------------------- 4

std::string criterion4() {
    int cases = 0;
    for (std::size_t n : {10u, 100u, 180u, 1000u}) {
        const std::size_t train = static_cast<std::size_t>(std::llround(0.8 * static_cast<double>(n)));
        const std::size_t val = static_cast<std::size_t>(std::llround(0.1 * static_cast<double>(n)));
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            auto rng = derive_stream(Seed{seed}, "split");
            const auto sets = split_indices(n, {}, rng);
            expect(sets.train.size() == train && sets.val.size() == val && sets.test.size() == n - train - val,
                   fmt("n=%zu seed=%llu: sizes %zu/%zu/%zu", n, (unsigned long long)seed, sets.train.size(),
                       sets.val.size(), sets.test.size()));
            std::vector<int> seen(n, 0);
            for (SplitName s : kSplits) {
                for (std::size_t k : sets[s]) {
                    expect(k < n, "index out of range");
                    ++seen[k];
                }
            }
            expect(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }),
                   fmt("n=%zu seed=%llu: not a partition", n, (unsigned long long)seed));
            ++cases;
        }
    }
    return fmt("%d (n, seed) cases", cases);
}

// ---------------------------------------------------------------- 5

std::string criterion5(const fs::path& suite_dir) {
    const auto t0 = std::chrono::steady_clock::now();
    expect(run_cli({"suite", "--seed", "2025", "--out", suite_dir.string()}) == 0, "suite command failed");
    const double secs = seconds_since(t0);

    std::map<std::string, int> materials;
    int scenarios = 0, frames = 0;
    for (const auto& e : fs::directory_iterator(suite_dir)) {
        if (!e.is_directory()) continue;
        ++scenarios;
        const auto meta = textio::parse_key_values(textio::read_text(e.path() / "metadata.txt"));
        std::map<std::string, std::string> kv;
        for (const auto& [k, v] : meta) kv[k] = v;
        materials[kv["material"]]++;
        const int d = textio::parse_int(kv["n_defects"], "n_defects"), x = textio::parse_int(kv["n_distractions"], "n_distractions");
        expect(d == 2 || d == 3, e.path().filename().string() + ": defect count");
        expect(x == 0 || x == 2, e.path().filename().string() + ": distraction count");
        int n = 0;
        for (const auto& f : fs::directory_iterator(e.path() / "frames")) {
            const Raster r = png::read_file(f.path());
            expect(r.width() == 1920 && r.height() == 1080, f.path().string() + ": frame size");
            ++n;
        }
        expect(n == kDefaultFrames, fmt("%s: %d frames", e.path().filename().string().c_str(), n));
        frames += n;
    }
    expect(scenarios == 8, fmt("%d scenarios", scenarios));
    expect(materials.size() == 4, fmt("%zu materials", materials.size()));
    for (const auto& [m, c] : materials) expect(c == 2, m + " appears " + std::to_string(c) + " times");
    expect(secs < 300.0, fmt("suite took %.1f s", secs));
    return fmt("8 scenarios, %d frames of 1920x1080, %.1f s", frames, secs);
}

// ---------------------------------------------------------------- 6

std::string criterion6(const fs::path& suite_dir) {
    std::size_t labels_checked = 0, frames_checked = 0;
    for (const ScenarioSpec& spec : pregen_suite(Seed{2025})) {
        const Scenario sc = generate_scenario(spec);
        const int wall_w = sc.canvas.raster.width();
        const Raster& wall = sc.canvas.raster;
        const Raster& ref = sc.canvas.background_reference;

        // Recompute every defect's wall extent from its source crack.
        std::vector<BBox> defects;
        std::vector<BBox> distractions;
        for (const Placement& p : sc.canvas.placements) {
            if (p.kind == Placement::Kind::Distraction) {
                distractions.push_back(p.wall_bbox);
                continue;
            }
            const LabeledImage crack = generate_from(derive_stream(spec.seed, p.source), spec.seed);
            const BBox src = crack.boxes.at(0).box;
            const long long units = std::llround(p.scale * 1e6);
            const int sw = static_cast<int>((src.width() * units + 999999) / 1000000);
            const int sh = static_cast<int>((src.height() * units + 999999) / 1000000);
            const BBox expect_box{p.position.x, p.position.y, p.position.x + sw - 1, p.position.y + sh - 1};
            expect(p.wall_bbox == expect_box, spec.name + ": " + p.source + " wall box disagrees with its source");
            BBox scan{wall_w, kWallHeight, -1, -1};
            for (int y = expect_box.y_min; y <= expect_box.y_max; ++y) {
                for (int x = expect_box.x_min; x <= expect_box.x_max; ++x) {
                    if (wall.at(x, y) == ref.at(x, y)) continue;
                    scan.x_min = std::min(scan.x_min, x);
                    scan.y_min = std::min(scan.y_min, y);
                    scan.x_max = std::max(scan.x_max, x);
                    scan.y_max = std::max(scan.y_max, y);
                }
            }
            expect(scan == expect_box, spec.name + ": " + p.source + " pixels do not fill its box");
            defects.push_back(expect_box);
        }
        expect(static_cast<int>(defects.size()) == spec.n_defects, spec.name + ": defect count");
        // No crack pixel escapes the defect boxes.
        for (int y = 0; y < kWallHeight; ++y) {
            for (int x = 0; x < wall_w; ++x) {
                if (wall.at(x, y) == ref.at(x, y)) continue;
                const auto inside = [&](const BBox& b) { return x >= b.x_min && x <= b.x_max && y >= b.y_min && y <= b.y_max; };
                expect(std::any_of(defects.begin(), defects.end(), inside) ||
                           std::any_of(distractions.begin(), distractions.end(), inside),
                       fmt("%s: modified pixel (%d,%d) outside every placement", spec.name.c_str(), x, y));
            }
        }

        const int step = sc.sweep.step_px;
        for (int t = 0; t < spec.n_frames; ++t) {
            const int x0 = std::min(t * step, wall_w - 1920);
            const fs::path frame_png = suite_dir / spec.name / "frames" / fmt("frame_%05d.png", t);
            const fs::path label_txt = suite_dir / spec.name / "labels" / fmt("frame_%05d.txt", t);
            const Raster frame = png::read_file(frame_png);
            const auto labels = parse_labels(textio::read_text(label_txt));

            std::vector<BBox> got;
            for (const LabelRecord& l : labels) {
                expect(l.class_id == kCrackClass, "label class");
                const BBox b = to_pixel_box(l.box, 1920, 1080);
                got.push_back(b);
                // Soundness: crack-modified pixels inside the box.
                bool modified = false;
                for (int y = b.y_min; y <= b.y_max && !modified; ++y) {
                    for (int x = b.x_min; x <= b.x_max && !modified; ++x) {
                        modified = frame.at(x, y) != ref.at(x0 + x, y);
                    }
                }
                expect(modified, fmt("%s frame %d: label without crack pixels", spec.name.c_str(), t));
                ++labels_checked;
            }

            // Completeness and exactness from integer window geometry.
            std::vector<BBox> want;
            for (const BBox& d : defects) {
                const int ix0 = std::max(d.x_min, x0), ix1 = std::min(d.x_max, x0 + 1919);
                if (ix0 > ix1) continue;
                const long long visible = static_cast<long long>(ix1 - ix0 + 1) * d.height();
                if (4 * visible < d.area()) continue;
                want.push_back({ix0 - x0, d.y_min, ix1 - x0, d.y_max});
            }
            auto order = [](const BBox& a, const BBox& b) {
                return std::tie(a.x_min, a.y_min, a.x_max, a.y_max) < std::tie(b.x_min, b.y_min, b.x_max, b.y_max);
            };
            std::sort(got.begin(), got.end(), order);
            std::sort(want.begin(), want.end(), order);
            expect(got == want, fmt("%s frame %d: %zu labels, expected %zu", spec.name.c_str(), t, got.size(), want.size()));
            ++frames_checked;
        }
    }
    return fmt("%zu frames, %zu labels, 0 violations", frames_checked, labels_checked);
}

// ---------------------------------------------------------------- 7

struct Corners {
    double x0, y0, x1, y1;
};

Corners corners(const NormBox& b) { return {b.cx - b.w / 2, b.cy - b.h / 2, b.cx + b.w / 2, b.cy + b.h / 2}; }

double oracle_iou(const NormBox& a, const NormBox& b) {
    const Corners p = corners(a), q = corners(b);
    const double iw = std::max(0.0, std::min(p.x1, q.x1) - std::max(p.x0, q.x0));
    const double ih = std::max(0.0, std::min(p.y1, q.y1) - std::max(p.y0, q.y0));
    const double inter = iw * ih;
    const double uni = (p.x1 - p.x0) * (p.y1 - p.y0) + (q.x1 - q.x0) * (q.y1 - q.y0) - inter;
    return uni > 0 ? inter / uni : 0.0;
}

// mAP from scratch: rank, match per image, then integrate the PR curve by
// taking, at each recall step, the best precision at or beyond that recall.
std::optional<double> oracle_map(const GroundTruthSet& gt, const std::vector<Detection>& dets, double thr) {
    std::set<int> classes;
    for (const auto& [id, recs] : gt.images) {
        for (const auto& r : recs) classes.insert(r.class_id);
    }
    if (classes.empty()) return std::nullopt;
    double sum = 0;
    for (int c : classes) {
        std::vector<std::size_t> order;
        for (std::size_t i = 0; i < dets.size(); ++i) {
            if (dets[i].class_id == c) order.push_back(i);
        }
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return dets[a].confidence > dets[b].confidence; });
        std::map<std::string, std::vector<bool>> used;
        std::size_t n_gt = 0;
        for (const auto& [id, recs] : gt.images) {
            used[id].assign(recs.size(), false);
            for (const auto& r : recs) n_gt += r.class_id == c;
        }
        std::vector<bool> hit;
        for (std::size_t i : order) {
            const auto& recs = gt.images.at(dets[i].image_id);
            int best = -1;
            double best_iou = -1;
            for (std::size_t g = 0; g < recs.size(); ++g) {
                if (recs[g].class_id != c || used[dets[i].image_id][g]) continue;
                const double v = oracle_iou(dets[i].box, recs[g].box);
                if (v > best_iou) {
                    best_iou = v;
                    best = static_cast<int>(g);
                }
            }
            const bool tp = best >= 0 && best_iou >= thr;
            if (tp) used[dets[i].image_id][static_cast<std::size_t>(best)] = true;
            hit.push_back(tp);
        }
        std::vector<double> rec, prec;
        std::size_t tp = 0;
        for (std::size_t k = 0; k < hit.size(); ++k) {
            tp += hit[k];
            rec.push_back(static_cast<double>(tp) / static_cast<double>(n_gt));
            prec.push_back(static_cast<double>(tp) / static_cast<double>(k + 1));
        }
        double ap = 0, prev = 0;
        for (std::size_t k = 0; k < hit.size(); ++k) {
            if (rec[k] <= prev) continue;
            double best = 0;
            for (std::size_t j = k; j < hit.size(); ++j) best = std::max(best, prec[j]);
            ap += (rec[k] - prev) * best;
            prev = rec[k];
        }
        sum += ap;
    }
    return sum / static_cast<double>(classes.size());
}

std::string criterion7() {
    std::mt19937_64 gen(7);
    auto uni = [&](double lo, double hi) { return lo + (hi - lo) * static_cast<double>(gen() >> 11) * 0x1.0p-53; };
    double worst = 0;
    for (int f = 0; f < 200; ++f) {
        GroundTruthSet gt;
        std::vector<Detection> dets;
        const int images = 1 + static_cast<int>(gen() % 4);
        for (int im = 0; im < images; ++im) {
            const std::string id = "img" + std::to_string(im);
            auto& recs = gt.images[id];
            const int n = static_cast<int>(gen() % 11);
            for (int k = 0; k < n; ++k) {
                const double w = uni(0.05, 0.3), h = uni(0.05, 0.3);
                const NormBox b{uni(w / 2, 1 - w / 2), uni(h / 2, 1 - h / 2), w, h};
                const int cls = static_cast<int>(gen() % 2);
                recs.push_back({cls, b});
                const int copies = static_cast<int>(gen() % 3);
                for (int c = 0; c < copies; ++c) {
                    NormBox d = b;
                    d.cx += uni(-0.5, 0.5) * w;
                    d.cy += uni(-0.5, 0.5) * h;
                    // Coarse confidences produce ties on purpose.
                    dets.push_back({id, gen() % 8 ? cls : 1 - cls, static_cast<double>(gen() % 10) / 10.0, d});
                }
            }
            const int noise = static_cast<int>(gen() % 4);
            for (int k = 0; k < noise; ++k) {
                dets.push_back({id, static_cast<int>(gen() % 2), uni(0, 1), {uni(0.1, 0.9), uni(0.1, 0.9), 0.1, 0.1}});
            }
        }
        for (double thr : {0.3, 0.5, 0.75}) {
            const auto want = oracle_map(gt, dets, thr);
            const auto got = evaluate(gt, dets, thr).map;
            expect(want.has_value() == got.has_value(), fmt("fixture %d: mAP definedness differs", f));
            if (want) {
                const double diff = std::abs(*want - *got);
                worst = std::max(worst, diff);
                expect(diff <= 1e-9, fmt("fixture %d thr %.2f: mAP %.12f vs oracle %.12f", f, thr, *got, *want));
            }
        }

        std::vector<Detection> perfect;
        for (const auto& [id, recs] : gt.images) {
            for (const auto& r : recs) perfect.push_back({id, r.class_id, 1.0, r.box});
        }
        const EvalReport p = evaluate(gt, perfect, 0.5);
        if (p.map) expect(*p.map == 1.0, fmt("fixture %d: ground truth as predictions gives mAP %.12f", f, *p.map));
        const EvalReport e = evaluate(gt, {}, 0.5);
        expect(e.recall() == 0.0, fmt("fixture %d: empty predictions give nonzero recall", f));
    }
    return fmt("200 fixtures, max |mAP - oracle| = %.3g", worst);
}

// ---------------------------------------------------------------- 8

double recall_line(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind("recall ", 0) == 0) return textio::parse_double(line.substr(7), "recall");
    }
    throw Failure("eval output has no recall line");
}

std::string criterion8(const fs::path& suite_dir, const fs::path& scratch) {
    const fs::path pred = scratch / "oracle_pred.txt";
    expect(run_cli({"oracle-detect", "--gt", suite_dir.string(), "--out", pred.string(), "--iou", "0.6"}) == 0,
           "oracle-detect failed");
    std::string lo, hi;
    expect(run_cli({"eval", "--gt", suite_dir.string(), "--pred", pred.string(), "--iou", "0.5"}, &lo) == 0, "eval 0.5 failed");
    expect(run_cli({"eval", "--gt", suite_dir.string(), "--pred", pred.string(), "--iou", "0.7"}, &hi) == 0, "eval 0.7 failed");
    const double r5 = recall_line(lo), r7 = recall_line(hi);
    expect(r5 == 1.0, fmt("recall at 0.5 is %.6f", r5));
    expect(r7 == 0.0, fmt("recall at 0.7 is %.6f", r7));
    return fmt("recall %.3f at IoU 0.5, %.3f at IoU 0.7", r5, r7);
}

}  // namespace

int main() {
    testsupport::ScratchDir scratch("acceptance");
    const fs::path suite_dir = scratch / "suite";
    bool suite_ok = false;

    const std::vector<std::pair<std::string, std::function<std::string()>>> criteria = {
        {"determinism", [&] { return criterion1(scratch.path()); }},
        {"crack structure", criterion2},
        {"png validity", criterion3},
        {"split correctness", criterion4},
        {"suite shape",
         [&] {
             const std::string r = criterion5(suite_dir);
             suite_ok = true;
             return r;
         }},
        {"frame label soundness and completeness",
         [&] {
             expect(suite_ok, "suite was not generated");
             return criterion6(suite_dir);
         }},
        {"evaluation harness", criterion7},
        {"end-to-end oracle detector",
         [&] {
             expect(suite_ok, "suite was not generated");
             return criterion8(suite_dir, scratch.path());
         }},
    };

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        std::string status = "PASS", detail;
        try {
            detail = criteria[i].second();
        } catch (const std::exception& ex) {
            status = "FAIL";
            detail = ex.what();
            ++failures;
        }
        std::cout << "criterion " << (i + 1) << " [" << criteria[i].first << "]: " << status << " - " << detail
                  << fmt(" (%.1f s)", seconds_since(t0)) << std::endl;
    }
    return failures == 0 ? 0 : 1;
}

#include "crackbench/eval.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

#include "crackbench/textio.hpp"

namespace crackbench {

double iou(const NormBox& a, const NormBox& b) noexcept {
    const double ix = std::min(a.cx + a.w / 2, b.cx + b.w / 2) - std::max(a.cx - a.w / 2, b.cx - b.w / 2);
    const double iy = std::min(a.cy + a.h / 2, b.cy + b.h / 2) - std::max(a.cy - a.h / 2, b.cy - b.h / 2);
    if (ix <= 0 || iy <= 0) return 0.0;
    const double inter = ix * iy;
    const double uni = a.w * a.h + b.w * b.h - inter;
    if (uni <= 0) return 0.0;
    return std::clamp(inter / uni, 0.0, 1.0);
}

namespace {

std::vector<std::size_t> rank_by_confidence(std::size_t n, auto&& confidence_of) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return confidence_of(a) > confidence_of(b);
    });
    return order;
}

}  // namespace

MatchResult greedy_match(std::span<const Detection> dets, std::span<const NormBox> gts, double iou_threshold) {
    MatchResult r;
    r.det_to_gt.assign(dets.size(), -1);
    r.gt_to_det.assign(gts.size(), -1);
    const auto order = rank_by_confidence(dets.size(), [&](std::size_t i) { return dets[i].confidence; });
    for (std::size_t d : order) {
        int best = -1;
        double best_iou = -1;
        for (std::size_t g = 0; g < gts.size(); ++g) {
            if (r.gt_to_det[g] != -1) continue;
            const double v = iou(dets[d].box, gts[g]);
            if (v > best_iou) {
                best_iou = v;
                best = static_cast<int>(g);
            }
        }
        if (best >= 0 && best_iou >= iou_threshold) {
            r.det_to_gt[d] = best;
            r.gt_to_det[static_cast<std::size_t>(best)] = static_cast<int>(d);
            ++r.tp;
        } else {
            ++r.fp;
        }
    }
    r.fn = gts.size() - r.tp;
    return r;
}

std::vector<PrPoint> pr_curve(std::span<const ScoredDetection> dets, std::size_t n_gt) {
    const auto order = rank_by_confidence(dets.size(), [&](std::size_t i) { return dets[i].confidence; });
    std::vector<PrPoint> curve;
    curve.reserve(dets.size());
    std::size_t tp = 0;
    for (std::size_t k = 0; k < order.size(); ++k) {
        if (dets[order[k]].true_positive) ++tp;
        curve.push_back({n_gt ? static_cast<double>(tp) / static_cast<double>(n_gt) : 0.0,
                         static_cast<double>(tp) / static_cast<double>(k + 1)});
    }
    return curve;
}

double average_precision(std::span<const ScoredDetection> dets, std::size_t n_gt) {
    if (n_gt == 0) throw NoGroundTruth();
    auto curve = pr_curve(dets, n_gt);
    // Precision envelope: best precision at this or any higher recall.
    for (std::size_t k = curve.size(); k-- > 1;) {
        curve[k - 1].precision = std::max(curve[k - 1].precision, curve[k].precision);
    }
    double ap = 0, prev_recall = 0;
    for (const auto& p : curve) {
        if (p.recall > prev_recall) {
            ap += (p.recall - prev_recall) * p.precision;
            prev_recall = p.recall;
        }
    }
    return ap;
}

EvalReport evaluate(const GroundTruthSet& gt, std::span<const Detection> dets, double iou_threshold) {
    EvalReport report;
    report.iou_threshold = iou_threshold;

    std::map<std::string, std::vector<std::size_t>> dets_by_image;
    for (std::size_t i = 0; i < dets.size(); ++i) {
        if (!gt.images.contains(dets[i].image_id)) {
            throw EvalError("unknown-image-id '" + dets[i].image_id + "'");
        }
        dets_by_image[dets[i].image_id].push_back(i);
    }

    std::set<int> classes;
    for (const auto& [id, recs] : gt.images) {
        for (const auto& r : recs) classes.insert(r.class_id);
    }
    for (const auto& d : dets) classes.insert(d.class_id);

    std::map<int, ClassReport> per_class;
    std::map<int, std::vector<std::pair<std::size_t, ScoredDetection>>> scored;  // keyed by det index
    for (int c : classes) per_class[c].class_id = c;

    for (const auto& [id, recs] : gt.images) {
        ImageMatches im;
        im.image_id = id;
        const auto it = dets_by_image.find(id);
        for (int c : classes) {
            std::vector<NormBox> boxes;
            std::vector<std::size_t> gt_index;
            for (std::size_t g = 0; g < recs.size(); ++g) {
                if (recs[g].class_id == c) {
                    boxes.push_back(recs[g].box);
                    gt_index.push_back(g);
                }
            }
            std::vector<Detection> cls_dets;
            std::vector<std::size_t> det_index;
            if (it != dets_by_image.end()) {
                for (std::size_t i : it->second) {
                    if (dets[i].class_id == c) {
                        cls_dets.push_back(dets[i]);
                        det_index.push_back(i);
                    }
                }
            }
            if (boxes.empty() && cls_dets.empty()) continue;
            const MatchResult m = greedy_match(cls_dets, boxes, iou_threshold);
            ClassReport& cr = per_class[c];
            cr.n_gt += boxes.size();
            cr.n_det += cls_dets.size();
            cr.tp += m.tp;
            cr.fp += m.fp;
            cr.fn += m.fn;
            for (std::size_t k = 0; k < cls_dets.size(); ++k) {
                const bool tp = m.det_to_gt[k] >= 0;
                (tp ? im.true_positives : im.false_positives).push_back(det_index[k]);
                scored[c].push_back({det_index[k], {cls_dets[k].confidence, tp}});
            }
            for (std::size_t g = 0; g < boxes.size(); ++g) {
                if (m.gt_to_det[g] < 0) im.false_negatives.push_back(gt_index[g]);
            }
        }
        std::sort(im.true_positives.begin(), im.true_positives.end());
        std::sort(im.false_positives.begin(), im.false_positives.end());
        std::sort(im.false_negatives.begin(), im.false_negatives.end());
        report.images.push_back(std::move(im));
    }

    double ap_sum = 0;
    std::size_t ap_count = 0;
    for (auto& [c, cr] : per_class) {
        // Ranking ties fall back to prediction-file order.
        auto& s = scored[c];
        std::sort(s.begin(), s.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        std::vector<ScoredDetection> ranked;
        ranked.reserve(s.size());
        for (const auto& [idx, sd] : s) ranked.push_back(sd);
        cr.curve = pr_curve(ranked, cr.n_gt);
        cr.recall = cr.n_gt ? static_cast<double>(cr.tp) / static_cast<double>(cr.n_gt) : 0.0;
        cr.precision = cr.n_det ? static_cast<double>(cr.tp) / static_cast<double>(cr.n_det) : 0.0;
        if (cr.n_gt > 0) {
            cr.ap = average_precision(ranked, cr.n_gt);
            ap_sum += *cr.ap;
            ++ap_count;
        }
        report.total_gt += cr.n_gt;
        report.total_det += cr.n_det;
        report.tp += cr.tp;
        report.fp += cr.fp;
        report.fn += cr.fn;
        report.classes.push_back(cr);
    }
    if (ap_count > 0) report.map = ap_sum / static_cast<double>(ap_count);
    return report;
}

std::optional<double> map_sweep(const GroundTruthSet& gt, std::span<const Detection> dets) {
    double sum = 0;
    for (int i = 0; i < 10; ++i) {
        const auto r = evaluate(gt, dets, 0.5 + 0.05 * i);
        if (!r.map) return std::nullopt;
        sum += *r.map;
    }
    return sum / 10.0;
}

std::vector<Detection> parse_predictions(std::string_view text) {
    std::vector<Detection> out;
    std::size_t line_no = 0;
    while (!text.empty()) {
        ++line_no;
        const auto nl = text.find('\n');
        const std::string_view line = textio::trim(text.substr(0, nl));
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        if (line.empty() || line.front() == '#') continue;
        const auto f = textio::split_ws(line);
        if (f.size() != 7) throw EvalError("malformed prediction: expected 7 fields", line_no);
        Detection d;
        try {
            d.image_id = std::string(f[0]);
            d.class_id = textio::parse_int(f[1], "class_id");
            d.confidence = textio::parse_double(f[2], "confidence");
            d.box = {textio::parse_double(f[3], "cx"), textio::parse_double(f[4], "cy"),
                     textio::parse_double(f[5], "w"), textio::parse_double(f[6], "h")};
        } catch (const InvalidArgument& e) {
            throw EvalError(std::string("malformed prediction: ") + e.what(), line_no);
        }
        constexpr double kTol = 1e-6;
        if (d.confidence < 0 || d.confidence > 1) throw EvalError("confidence outside [0,1]", line_no);
        const NormBox& b = d.box;
        if (b.w <= 0 || b.h <= 0 || b.cx - b.w / 2 < -kTol || b.cx + b.w / 2 > 1 + kTol ||
            b.cy - b.h / 2 < -kTol || b.cy + b.h / 2 > 1 + kTol) {
            throw EvalError("box outside the unit square", line_no);
        }
        out.push_back(std::move(d));
    }
    return out;
}

std::string format_prediction_line(const Detection& d) {
    return d.image_id + " " + std::to_string(d.class_id) + " " + textio::fixed6(d.confidence) + " " +
           textio::fixed6(d.box.cx) + " " + textio::fixed6(d.box.cy) + " " + textio::fixed6(d.box.w) + " " +
           textio::fixed6(d.box.h) + "\n";
}

GroundTruthSet load_ground_truth(const std::filesystem::path& root) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(root)) throw IoError(root, "io-failure: ground-truth root is not a directory");
    GroundTruthSet gt;
    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
        const fs::path rel = fs::relative(entry.path(), root);
        bool in_labels = false;
        for (const auto& part : rel.parent_path()) in_labels |= part == "labels";
        if (in_labels) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
        fs::path rel = fs::relative(file, root);
        rel.replace_extension();
        fs::path id;
        for (const auto& part : rel) {
            if (part != "labels") id /= part;
        }
        const std::string key = id.generic_string();
        if (gt.images.contains(key)) throw EvalError("duplicate ground-truth image id '" + key + "'");
        try {
            gt.images[key] = parse_labels(textio::read_text(file));
        } catch (const InvalidArgument& e) {
            throw EvalError(file.string() + ": " + e.what());
        }
    }
    return gt;
}

EvalReport evaluate_run(const std::filesystem::path& pred_file, const std::filesystem::path& gt_root,
                        double iou_threshold) {
    const auto dets = parse_predictions(textio::read_text(pred_file));
    const auto gt = load_ground_truth(gt_root);
    return evaluate(gt, dets, iou_threshold);
}

std::string format_report_text(const EvalReport& r) {
    std::ostringstream os;
    os << "iou_threshold " << textio::fixed6(r.iou_threshold) << "\n"
       << "images " << r.images.size() << "\n"
       << "ground_truth " << r.total_gt << "\n"
       << "detections " << r.total_det << "\n";
    for (const auto& c : r.classes) {
        os << "class " << c.class_id << " AP " << (c.ap ? textio::fixed6(*c.ap) : std::string("undefined"))
           << " TP " << c.tp << " FP " << c.fp << " FN " << c.fn << " precision " << textio::fixed6(c.precision)
           << " recall " << textio::fixed6(c.recall) << "\n";
    }
    os << "TP " << r.tp << " FP " << r.fp << " FN " << r.fn << "\n"
       << "recall " << textio::fixed6(r.recall()) << "\n"
       << "mAP " << (r.map ? textio::fixed6(*r.map) : std::string("undefined")) << "\n";
    return os.str();
}

std::string format_report_csv(const EvalReport& r) {
    std::ostringstream os;
    os << "class,AP,TP,FP,FN\n";
    for (const auto& c : r.classes) {
        os << c.class_id << "," << (c.ap ? textio::fixed6(*c.ap) : std::string("undefined")) << "," << c.tp << ","
           << c.fp << "," << c.fn << "\n";
    }
    return os.str();
}

}  // namespace crackbench

#pragma once

// Detection scoring: IoU, greedy matching, all-point interpolated AP.
//
// Prediction files hold one detection per line:
//
//   image_id class_id confidence cx cy w h
//
// with normalized center-size boxes. Ground truth is a tree of label files;
// an image id is the label path relative to the root, without ".txt" and
// without any "labels" directory component (for example
// "train/crack_000012" or "flyby_01_dark_concrete/frame_00042").

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "crackbench/dataset.hpp"
#include "crackbench/error.hpp"

namespace crackbench {

struct Detection {
    std::string image_id;
    int class_id = 0;
    double confidence = 0;
    NormBox box;
};

struct GroundTruthSet {
    std::map<std::string, std::vector<LabelRecord>> images;
};

class EvalError : public Error {
public:
    // line is 1-based; 0 when the error is not tied to a line.
    EvalError(const std::string& what, std::size_t line = 0)
        : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class NoGroundTruth : public Error {
public:
    NoGroundTruth() : Error("no-ground-truth: AP undefined for a class without ground-truth boxes") {}
};

double iou(const NormBox& a, const NormBox& b) noexcept;

struct MatchResult {
    std::vector<int> det_to_gt;  // per input detection: matched gt index or -1
    std::vector<int> gt_to_det;  // per gt: matched detection index or -1
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
};

// Detections are visited by descending confidence (stable: ties keep input
// order). Each takes the unmatched ground truth of highest IoU (lowest
// index on ties) when that IoU reaches the threshold.
MatchResult greedy_match(std::span<const Detection> dets, std::span<const NormBox> gts,
                         double iou_threshold);

struct ScoredDetection {
    double confidence = 0;
    bool true_positive = false;
};

struct PrPoint {
    double recall = 0;
    double precision = 0;
};

// Raw precision/recall after each detection in ranked order (descending
// confidence, stable).
std::vector<PrPoint> pr_curve(std::span<const ScoredDetection> dets, std::size_t n_gt);

// All-point interpolated AP. Throws NoGroundTruth when n_gt == 0.
double average_precision(std::span<const ScoredDetection> dets, std::size_t n_gt);

struct ClassReport {
    int class_id = 0;
    std::size_t n_gt = 0;
    std::size_t n_det = 0;
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    std::optional<double> ap;  // empty when the class has no ground truth
    double precision = 0;      // at the full detection list; 0 with no detections
    double recall = 0;
    std::vector<PrPoint> curve;
};

struct ImageMatches {
    std::string image_id;
    std::vector<std::size_t> true_positives;   // indices into the detection list
    std::vector<std::size_t> false_positives;
    std::vector<std::size_t> false_negatives;  // indices into the image's ground truth
};

struct EvalReport {
    double iou_threshold = 0.5;
    std::vector<ClassReport> classes;  // ascending class id
    std::optional<double> map;         // mean AP over classes with ground truth
    std::vector<ImageMatches> images;  // ascending image id
    std::size_t total_gt = 0;
    std::size_t total_det = 0;
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;

    double recall() const noexcept { return total_gt ? static_cast<double>(tp) / static_cast<double>(total_gt) : 0.0; }
};

// Throws EvalError for a detection naming an unknown image.
EvalReport evaluate(const GroundTruthSet& gt, std::span<const Detection> dets, double iou_threshold = 0.5);

// Mean of mAP over IoU thresholds 0.50, 0.55, ..., 0.95.
std::optional<double> map_sweep(const GroundTruthSet& gt, std::span<const Detection> dets);

// Throws EvalError with the line number on malformed input.
std::vector<Detection> parse_predictions(std::string_view text);
std::string format_prediction_line(const Detection& d);

GroundTruthSet load_ground_truth(const std::filesystem::path& root);

EvalReport evaluate_run(const std::filesystem::path& pred_file, const std::filesystem::path& gt_root,
                        double iou_threshold = 0.5);

std::string format_report_text(const EvalReport& report);
// Header "class,AP,TP,FP,FN"; AP is "undefined" for classes without ground truth.
std::string format_report_csv(const EvalReport& report);

}  // namespace crackbench

#pragma once

// Subcommand implementations behind the command-line tool. Each returns the
// process exit status; library errors are reported on `err`.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "crackbench/dataset.hpp"
#include "crackbench/eval.hpp"
#include "crackbench/scene.hpp"

namespace crackbench::cli {

struct GenCracksOptions {
    Seed seed;
    std::size_t count = 0;
    std::filesystem::path out;
    SplitRatios ratios;
    std::filesystem::path config;      // optional key=value parameter file
    std::vector<std::string> sets;     // key=value overrides, applied after config
};

struct SuiteOptions {
    Seed seed;
    std::filesystem::path out;
    int frames = kDefaultFrames;
    std::optional<int> step;
    bool hard_mode = false;
    std::filesystem::path distraction_dir;
};

struct EvalOptions {
    std::filesystem::path gt_root;
    std::filesystem::path predictions;
    double iou = 0.5;
    std::filesystem::path csv;  // optional
    bool sweep = false;         // also report mAP@[.5:.95]
};

struct OracleOptions {
    std::filesystem::path gt_root;
    std::filesystem::path out;
    double target_iou = 0.6;
    double confidence = 0.9;
};

int cmd_gen_cracks(const GenCracksOptions& o, std::ostream& out, std::ostream& err);
int cmd_scenario(const ScenarioSpec& spec, const std::filesystem::path& dir, std::ostream& out, std::ostream& err);
int cmd_suite(const SuiteOptions& o, std::ostream& out, std::ostream& err);
int cmd_eval(const EvalOptions& o, std::ostream& out, std::ostream& err);
int cmd_oracle_detect(const OracleOptions& o, std::ostream& out, std::ostream& err);

// Detections that overlap each ground-truth box with IoU exactly target_iou
// (before six-decimal rounding): the box shrunk about its center by
// sqrt(target_iou) in both dimensions.
std::vector<Detection> oracle_detections(const GroundTruthSet& gt, double target_iou, double confidence);

// Parses argv-style arguments (args[0] is the program name) and dispatches.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace crackbench::cli

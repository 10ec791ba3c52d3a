#include "crackbench/commands.hpp"

#include <cmath>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "crackbench/eval.hpp"
#include "crackbench/textio.hpp"

namespace crackbench::cli {

namespace fs = std::filesystem;

int cmd_gen_cracks(const GenCracksOptions& o, std::ostream& out, std::ostream& err) {
    try {
        EmitOptions e;
        e.seed = o.seed;
        e.count = o.count;
        e.ratios = o.ratios;
        e.root = o.out;
        if (!o.config.empty()) e.overrides = ParamOverrides::load(o.config);
        for (const auto& kv : o.sets) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) throw InvalidArgument("--set expects key=value, got '" + kv + "'");
            e.overrides.set(std::string(textio::trim(kv.substr(0, eq))), std::string(textio::trim(kv.substr(eq + 1))));
        }
        const DatasetSummary s = write_dataset(e);
        out << "wrote " << o.count << " images to " << o.out.string() << " (train " << s.counts[0] << ", val "
            << s.counts[1] << ", test " << s.counts[2] << ")\n";
        return 0;
    } catch (const std::exception& ex) {
        err << "gen-cracks: " << ex.what() << "\n";
        return 1;
    }
}

int cmd_scenario(const ScenarioSpec& spec, const fs::path& dir, std::ostream& out, std::ostream& err) {
    try {
        const Scenario sc = generate_scenario(spec);
        write_scenario(sc, dir);
        out << "scenario " << spec.name << ": " << sc.sweep.n_frames << " frames, step " << sc.sweep.step_px
            << " px -> " << dir.string() << "\n";
        return 0;
    } catch (const std::exception& ex) {
        err << "scenario " << spec.name << ": " << ex.what() << "\n";
        return 1;
    }
}

int cmd_suite(const SuiteOptions& o, std::ostream& out, std::ostream& err) {
    int status = 0;
    std::ostringstream index;
    index << "# fly-by suite\nseed=" << o.seed.value << "\n";
    for (ScenarioSpec spec : pregen_suite(o.seed)) {
        spec.n_frames = o.frames;
        spec.step_px = o.step;
        spec.hard_mode = o.hard_mode;
        spec.distraction_dir = o.distraction_dir;
        if (cmd_scenario(spec, o.out / spec.name, out, err) != 0) {
            status = 1;
            continue;
        }
        index << "scenario=" << spec.name << " material=" << material_name(spec.material)
              << " n_defects=" << spec.n_defects << " n_distractions=" << spec.n_distractions << "\n";
    }
    try {
        textio::write_text(o.out / "suite.txt", index.str());
    } catch (const std::exception& ex) {
        err << "suite: " << ex.what() << "\n";
        status = 1;
    }
    return status;
}

int cmd_eval(const EvalOptions& o, std::ostream& out, std::ostream& err) {
    try {
        const auto dets = parse_predictions(textio::read_text(o.predictions));
        const auto gt = load_ground_truth(o.gt_root);
        const EvalReport report = evaluate(gt, dets, o.iou);
        std::string text = format_report_text(report);
        if (o.sweep) {
            const auto m = map_sweep(gt, dets);
            text += "mAP@[.5:.95] " + (m ? textio::fixed6(*m) : std::string("undefined")) + "\n";
        }
        if (!o.csv.empty()) textio::write_text(o.csv, format_report_csv(report));
        out << text;
        return 0;
    } catch (const std::exception& ex) {
        err << "eval: " << ex.what() << "\n";
        return 1;
    }
}

std::vector<Detection> oracle_detections(const GroundTruthSet& gt, double target_iou, double confidence) {
    if (!(target_iou > 0 && target_iou <= 1)) throw InvalidArgument("target IoU must be in (0,1]");
    const double k = std::sqrt(target_iou);
    std::vector<Detection> dets;
    for (const auto& [id, records] : gt.images) {
        for (const auto& r : records) {
            dets.push_back({id, r.class_id, confidence, {r.box.cx, r.box.cy, r.box.w * k, r.box.h * k}});
        }
    }
    return dets;
}

int cmd_oracle_detect(const OracleOptions& o, std::ostream& out, std::ostream& err) {
    try {
        const auto gt = load_ground_truth(o.gt_root);
        std::string text;
        for (const auto& d : oracle_detections(gt, o.target_iou, o.confidence)) text += format_prediction_line(d);
        textio::write_text(o.out, text);
        out << "wrote oracle detections to " << o.out.string() << "\n";
        return 0;
    } catch (const std::exception& ex) {
        err << "oracle-detect: " << ex.what() << "\n";
        return 1;
    }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Synthetic crack imagery, Fly-By scenarios and detector scoring"};
    app.require_subcommand(1);

    std::uint64_t seed = 0;
    std::string out_path;

    GenCracksOptions gen;
    std::string ratios = "0.8,0.1,0.1";
    auto* g = app.add_subcommand("gen-cracks", "Generate a labeled crack dataset with train/val/test splits");
    g->alias("emit-dataset");
    g->add_option("--seed", seed, "Master seed");
    g->add_option("--out", out_path, "Dataset root")->required();
    g->add_option("--count", gen.count, "Number of images")->required();
    g->add_option("--ratios", ratios, "Split ratios train,val,test");
    g->add_option("--config", gen.config, "key=value crack parameter overrides");
    g->add_option("--set", gen.sets, "Single override key=value (repeatable)");

    ScenarioSpec spec;
    std::string material = "light_concrete";
    int frames = kDefaultFrames;
    std::optional<int> step;
    bool hard_mode = false;
    std::string distraction_dir;
    double visibility = kDefaultVisibility;
    auto* s = app.add_subcommand("scenario", "Build and render one custom Fly-By scenario");
    s->add_option("--seed", seed, "Master seed");
    s->add_option("--out", out_path, "Scenario directory")->required();
    s->add_option("--name", spec.name, "Scenario name (stream namespace)");
    s->add_option("--material", material, "brown_terracotta|dark_concrete|light_concrete|seamed_concrete");
    s->add_option("--defects", spec.n_defects, "Number of cracks");
    s->add_option("--distractions", spec.n_distractions, "Number of distractions");
    s->add_option("--frames", frames, "Frames in the sweep");
    s->add_option("--step", step, "Wall pixels per frame (sets the wall width)");
    s->add_option("--wall-width", spec.wall_width, "Wall width in pixels when --step is not given");
    s->add_option("--visibility", visibility, "Minimum visible bbox fraction for a label");
    s->add_flag("--hard-mode", hard_mode, "Lighting ramp and shadow bands");
    s->add_option("--distraction-dir", distraction_dir, "Directory of PNG distraction images");

    SuiteOptions suite;
    auto* u = app.add_subcommand("suite", "Render the eight pre-generated Fly-By scenarios");
    u->add_option("--seed", seed, "Master seed");
    u->add_option("--out", out_path, "Suite root")->required();
    u->add_option("--frames", frames, "Frames per scenario");
    u->add_option("--step", step, "Wall pixels per frame");
    u->add_flag("--hard-mode", hard_mode, "Lighting ramp and shadow bands");
    u->add_option("--distraction-dir", distraction_dir, "Directory of PNG distraction images");

    EvalOptions ev;
    auto* e = app.add_subcommand("eval", "Score predictions against a ground-truth label tree");
    e->add_option("--gt", ev.gt_root, "Ground-truth root (dataset, scenario or suite directory)")->required();
    e->add_option("--pred", ev.predictions, "Prediction file")->required();
    e->add_option("--iou", ev.iou, "IoU threshold")->check(CLI::Range(0.0, 1.0));
    e->add_option("--out", ev.csv, "CSV report path");
    e->add_flag("--sweep", ev.sweep, "Also report mAP over IoU 0.50:0.95");

    OracleOptions oracle;
    auto* o = app.add_subcommand("oracle-detect", "Emit ground-truth boxes shrunk to a known IoU");
    o->add_option("--gt", oracle.gt_root, "Ground-truth root")->required();
    o->add_option("--out", oracle.out, "Prediction file to write")->required();
    o->add_option("--iou", oracle.target_iou, "IoU of every emitted box with its ground truth");
    o->add_option("--confidence", oracle.confidence, "Confidence assigned to every detection");

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& pe) {
        return app.exit(pe, out, err);
    }

    try {
        if (g->parsed()) {
            gen.seed = Seed{seed};
            gen.out = out_path;
            gen.ratios = SplitRatios::parse(ratios);
            return cmd_gen_cracks(gen, out, err);
        }
        if (s->parsed()) {
            spec.seed = Seed{seed};
            spec.material = parse_material(material);
            spec.n_frames = frames;
            spec.step_px = step;
            spec.hard_mode = hard_mode;
            spec.visibility_threshold = visibility;
            spec.distraction_dir = distraction_dir;
            return cmd_scenario(spec, out_path, out, err);
        }
        if (u->parsed()) {
            suite.seed = Seed{seed};
            suite.out = out_path;
            suite.frames = frames;
            suite.step = step;
            suite.hard_mode = hard_mode;
            suite.distraction_dir = distraction_dir;
            return cmd_suite(suite, out, err);
        }
        if (e->parsed()) return cmd_eval(ev, out, err);
        if (o->parsed()) return cmd_oracle_detect(oracle, out, err);
    } catch (const std::exception& ex) {
        err << ex.what() << "\n";
        return 1;
    }
    return 1;
}

}  // namespace crackbench::cli

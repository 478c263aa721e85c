// Command-line front end. One subcommand per pipeline stage plus synthetic
// fixture generation, full-pipeline, and batch modes.
//
// Exit codes: 0 success, 2 usage, 3 io, 4 parse, 5 validation,
// 6 algorithmic failure (degenerate geometry, no consensus, unsupported).

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rescu/rescu.hpp"

namespace {

using namespace rescu;

int exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::io: return 3;
        case ErrorCode::parse: return 4;
        case ErrorCode::validation: return 5;
        default: return 6;
    }
}

unsigned env_seed() {
    const char* s = std::getenv("RESCU_SEED");
    if (!s || !*s) return 0;
    return unsigned(std::strtoul(s, nullptr, 10));
}

void add_param_options(CLI::App* cmd, DiscoveryParams& p) {
    cmd->add_option("--pd,--p-d", p.p_d, "max pair distance, fraction of image diagonal");
    cmd->add_option("--ps,--p-s", p.p_s, "scale ratio tolerance");
    cmd->add_option("--ptheta,--p-theta", p.p_theta_deg, "max orientation difference, degrees");
    cmd->add_option("--sigma-s", p.sigma_s, "scale deformation tolerance");
    cmd->add_option("--sigma-theta", p.sigma_theta, "orientation deformation tolerance");
    cmd->add_flag("--wrapped-angles", p.wrapped_angles,
                  "use rotation-compensated orientation deviation");
    cmd->add_option("--initials,--n-initials", p.n_initials,
                    "seed patterns per discovery round");
    cmd->add_option("--u-min", p.u_min, "pattern acceptance threshold");
    cmd->add_option("--max-rps", p.max_rps, "maximum patterns to return");
    cmd->add_option("--dedup-iod", p.dedup_iod, "overlap above which a pattern is dropped");
    cmd->add_option("--seed", p.seed, "seed for tie-breaking randomness");
}

const RecurringPattern& pick_rp(const RpsFile& file, int rp_id) {
    if (file.rps.empty()) fail(ErrorCode::insufficient, "no patterns in file");
    if (rp_id < 0) return file.rps.front();
    for (const auto& rp : file.rps)
        if (rp.id == rp_id) return rp;
    fail(ErrorCode::validation, "no pattern with id " + std::to_string(rp_id));
}

std::vector<double> parse_csv_doubles(const std::string& s) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos < s.size()) {
        std::size_t next = s.find(',', pos);
        if (next == std::string::npos) next = s.size();
        out.push_back(std::strtod(s.substr(pos, next - pos).c_str(), nullptr));
        pos = next + 1;
    }
    return out;
}

// "0.1:0.9:0.1" (start:end:step) or "0.2,0.5,0.8"
std::vector<double> parse_sweep(const std::string& s) {
    if (s.find(':') != std::string::npos) {
        std::vector<double> parts;
        std::size_t pos = 0;
        while (pos < s.size()) {
            std::size_t next = s.find(':', pos);
            if (next == std::string::npos) next = s.size();
            parts.push_back(std::strtod(s.substr(pos, next - pos).c_str(), nullptr));
            pos = next + 1;
        }
        if (parts.size() != 3 || parts[2] <= 0)
            fail(ErrorCode::validation, "--sweep wants start:end:step with step > 0");
        std::vector<double> out;
        for (double h = parts[0]; h <= parts[1] + 1e-12; h += parts[2]) out.push_back(h);
        return out;
    }
    return parse_csv_doubles(s);
}

// ---- subcommand runners ----

struct FeatureArgs {
    std::string image, out = "features.json";
    DetectorConfig cfg;
    double word_dist = 0.0;  // optional clustering report
};

int run_features(const FeatureArgs& a) {
    Raster img = load_image(a.image);
    FeatureSet fs = detect_features(img, a.cfg);
    save_features(fs, a.out);
    std::cout << "detected " << fs.features.size() << " features -> " << a.out << "\n";
    if (a.word_dist > 0) {
        WordsConfig wc;
        wc.distance_threshold = a.word_dist;
        VisualWordIndex vw = build_visual_words(fs, wc);
        std::cout << "clustered into " << vw.words.size() << " visual words at distance "
                  << a.word_dist << "\n";
    }
    return 0;
}

struct DiscoverArgs {
    std::string features, out = "rps.json";
    DiscoveryParams params;
    WordsConfig words;
    bool grid = false;
};

int run_discover(const DiscoverArgs& a) {
    FeatureSet fs = load_features(a.features);
    VisualWordIndex vw = build_visual_words(fs, a.words);
    RpsFile rf;
    rf.width = fs.width;
    rf.height = fs.height;
    if (a.grid) {
        auto best = grid_search_params(fs, vw, default_parameter_grid(a.params));
        rf.params = best.params;
        rf.rps = std::move(best.patterns);
    } else {
        rf.params = a.params;
        rf.rps = discover_rps(fs, vw, a.params);
    }
    collect_positions(rf, fs);
    save_rps(rf, a.out);
    std::cout << "discovered " << rf.rps.size() << " pattern(s) -> " << a.out << "\n";
    return 0;
}

struct VpdArgs {
    std::string rps, features, out = "vp.json";
    std::string image_size;
    int rp_id = -1;
    double line_gate = 0.02;
    RansacConfig ransac;
};

int run_vpd(const VpdArgs& a) {
    RpsFile rf = load_rps(a.rps);
    if (!a.image_size.empty()) {
        std::size_t x = a.image_size.find('x');
        if (x == std::string::npos) fail(ErrorCode::validation, "--image-size wants WxH");
        rf.width = int(std::strtol(a.image_size.substr(0, x).c_str(), nullptr, 10));
        rf.height = int(std::strtol(a.image_size.substr(x + 1).c_str(), nullptr, 10));
    }
    FeatureSet fs = a.features.empty() ? positions_feature_set(rf) : load_features(a.features);
    const RecurringPattern& rp = pick_rp(rf, a.rp_id);
    auto lines = lines_from_rp(fs, rp.matrix, a.line_gate);
    VanishingPoint vp = ransac_vp(lines, rf.width, rf.height, a.ransac);
    save_vp(vp, lines, a.out);
    std::cout << "vanishing point (" << vp.point.x << ", " << vp.point.y << ") from "
              << vp.inliers.size() << "/" << lines.size() << " lines -> " << a.out << "\n";
    return 0;
}

struct SymmetryArgs {
    std::string rps, out = "ts.json";
    int rp_id = -1;
    double threshold = 0.06;
};

int run_symmetry(const SymmetryArgs& a) {
    RpsFile rf = load_rps(a.rps);
    const RecurringPattern& rp = pick_rp(rf, a.rp_id);
    TsResult ts = detect_translation_symmetry(rp, a.threshold);
    save_ts(ts, rp.id, a.out);
    std::cout << (ts.has_symmetry ? "translation symmetry detected"
                                  : (ts.tested ? "no translation symmetry" : "not testable"))
              << " (deviation " << ts.deviation << ") -> " << a.out << "\n";
    return 0;
}

struct RectifyArgs {
    std::string image, rps, vp, out = "rect.png";
    int rp_id = -1;
    RectifyConfig cfg;
};

int run_rectify(const RectifyArgs& a) {
    Raster img = load_image(a.image);
    RpsFile rf = load_rps(a.rps);
    VpFile vpf = load_vp(a.vp);
    const RecurringPattern& rp = pick_rp(rf, a.rp_id);
    RectifyResult res = rectify_rp(img, rp, vpf.vp, a.cfg);
    save_png(a.out, res.image);
    std::cout << "rectified " << res.image.width << "x" << res.image.height << " -> " << a.out
              << "\n";
    return 0;
}

struct CountArgs {
    std::string rps, out = "counts.json";
};

int run_count(const CountArgs& a) {
    RpsFile rf = load_rps(a.rps);
    CountReport counts = count_instances(rf.rps);
    save_counts(counts, a.out);
    std::cout << "counted " << counts.total << " instance(s) across " << rf.rps.size()
              << " pattern(s) -> " << a.out << "\n";
    return 0;
}

struct EvalArgs {
    std::string rps, gt, out = "report.json";
    std::string vp, ts, sweep;
    double h = 0.5;
};

int run_eval(const EvalArgs& a) {
    RpsFile rf = load_rps(a.rps);
    GroundTruth gt = load_gt(a.gt);
    std::optional<VanishingPoint> vp;
    if (!a.vp.empty()) vp = load_vp(a.vp).vp;
    std::optional<TsResult> ts;
    if (!a.ts.empty()) ts = load_ts(a.ts);
    std::vector<double> hs;
    if (!a.sweep.empty()) hs = parse_sweep(a.sweep);
    EvalReport rep = make_eval_report(rf.rps, gt, a.h, vp, ts, hs);
    save_report(rep, a.out);

    // curve CSV alongside the report
    std::filesystem::path csv = std::filesystem::path(a.out).replace_extension(".csv");
    {
        std::ofstream out(csv, std::ios::binary | std::ios::trunc);
        if (!out) fail(ErrorCode::io, "cannot write " + csv.string());
        out << "h,instance_precision,instance_recall,rp_precision,rp_recall\n";
        char line[160];
        for (const SweepPoint& s : rep.sweep) {
            std::snprintf(line, sizeof line, "%.9g,%.9g,%.9g,%.9g,%.9g\n", s.h,
                          s.instance_precision, s.instance_recall, s.rp_precision, s.rp_recall);
            out << line;
        }
    }
    std::cout << "instance P/R " << rep.instance.precision << "/" << rep.instance.recall
              << ", pattern P/R " << rep.rp.precision << "/" << rep.rp.recall << " -> " << a.out
              << "\n";
    return 0;
}

struct CaptionArgs {
    std::string base, out = "caption.json";
    int count = 0;
    bool ts = false;
    std::string vp;                    // "inside" | "outside"
    std::vector<std::string> regions;  // regions.json rps.json
    double min_overlap = 0.90;
};

int run_caption(const CaptionArgs& a) {
    CaptionContext ctx;
    ctx.count = a.count;
    ctx.ts_detected = a.ts;
    if (!a.vp.empty()) {
        if (a.vp == "inside")
            ctx.vp_status = VpStatus::inside;
        else if (a.vp == "outside")
            ctx.vp_status = VpStatus::outside;
        else
            fail(ErrorCode::validation, "--vp wants 'inside' or 'outside'");
    }
    CaptionFile cap;
    cap.caption = enhance_caption(a.base, ctx);
    cap.count = ctx.count;
    cap.ts_detected = ctx.ts_detected;
    cap.vp_status = ctx.vp_status == VpStatus::none
                        ? "none"
                        : (ctx.vp_status == VpStatus::inside ? "inside" : "outside");
    json j = caption_to_json(cap);

    if (!a.regions.empty()) {
        if (a.regions.size() != 2)
            fail(ErrorCode::validation, "--regions wants regions.json rps.json");
        auto regions = load_regions(a.regions[0]);
        RpsFile rf = load_rps(a.regions[1]);
        json assigned = json::array();
        for (std::size_t ri = 0; ri < regions.size(); ++ri) {
            json ids = json::array();
            for (const RecurringPattern& rp : rf.rps)
                if (rp_region_overlap(rp, regions[ri].box) >= a.min_overlap)
                    ids.push_back(rp.id);
            assigned.push_back({{"noun", regions[ri].noun}, {"rp_ids", std::move(ids)}});
        }
        j["regions"] = std::move(assigned);
    }
    write_json_atomic(j, a.out);
    std::cout << cap.caption << "\n";
    return 0;
}

struct SynthArgs {
    std::string preset = "row";
    std::string out = "scene";
    unsigned seed = 0;
    int cols = 0, rows = 0;
    double noise = 0.0;
    int motif = -1;
    int width = 0, height = 0;
    std::string counts = "3,5";
};

int run_synth(const SynthArgs& a) {
    Scene scene;
    if (a.preset == "two-motifs") {
        auto v = parse_csv_doubles(a.counts);
        if (v.size() != 2) fail(ErrorCode::validation, "--counts wants a,b");
        scene = render_two_motifs(int(v[0]), int(v[1]), a.seed);
    } else {
        SceneSpec spec;
        spec.seed = a.seed;
        spec.noise_px = a.noise;
        if (a.preset == "grid") {
            spec.rows = 3;
            spec.cols = 5;
            spec.spacing = 70;
            spec.row_spacing = 76;
            spec.depth = 300;
        } else if (a.preset == "row") {
            spec.rows = 1;
            spec.cols = 6;
            spec.spacing = 76;
            spec.depth = 300;
        } else if (a.preset == "row-nonuniform") {
            spec.rows = 1;
            spec.cols = 6;
            spec.spacings = {60, 85, 64, 96, 70};
            spec.depth = 300;
        } else if (a.preset == "perspective-row") {
            spec.rows = 1;
            spec.cols = 6;
            spec.perspective = true;
            spec.tilt = 0.45;
            spec.depth = 420;
            spec.spacing = 86;
        } else if (a.preset == "tower") {
            spec.rows = 1;
            spec.cols = 7;
            spec.motif = 2;
            spec.perspective = true;
            spec.tilt = 0.6;
            spec.depth = 480;
            spec.spacing = 58;
        } else {
            fail(ErrorCode::validation, "unknown preset: " + a.preset);
        }
        if (a.cols > 0) spec.cols = a.cols;
        if (a.rows > 0) spec.rows = a.rows;
        if (a.motif >= 0) spec.motif = a.motif;
        if (a.width > 0) spec.width = a.width;
        if (a.height > 0) spec.height = a.height;
        if (a.noise > 0) spec.noise_px = a.noise;
        scene = render_scene(spec);
    }
    std::filesystem::create_directories(a.out);
    save_png((std::filesystem::path(a.out) / "image.png").string(), scene.image);
    save_features(scene.features, std::filesystem::path(a.out) / "features.json");
    save_gt(scene.gt, std::filesystem::path(a.out) / "gt.json");
    if (scene.vp) save_vp_gt(*scene.vp, std::filesystem::path(a.out) / "vp_gt.json");
    std::cout << "scene '" << a.preset << "' with " << scene.features.features.size()
              << " features -> " << a.out << "/\n";
    return 0;
}

struct PipelineArgs {
    std::string image, features;
    std::string out = "out";
    bool eval = false;
    std::string gt;  // default: gt.json next to the input
    double h = 0.5;
    PipelineConfig cfg;
};

int run_pipeline_cmd(const PipelineArgs& a, const std::string& command) {
    if (a.image.empty() && a.features.empty())
        fail(ErrorCode::validation, "pipeline needs an image or --features");

    // resolve ground truth up front so a missing file aborts before any output
    std::optional<GroundTruth> gt;
    if (a.eval) {
        std::filesystem::path gt_path = a.gt;
        if (gt_path.empty()) {
            std::filesystem::path anchor = a.image.empty() ? a.features : a.image;
            gt_path = anchor.parent_path() / "gt.json";
        }
        gt = load_gt(gt_path);
    }

    std::optional<Raster> img;
    if (!a.image.empty()) img = load_image(a.image);
    std::optional<FeatureSet> fs;
    if (!a.features.empty()) fs = load_features(a.features);

    std::vector<std::string> inputs;
    if (!a.image.empty()) inputs.push_back(a.image);
    if (!a.features.empty()) inputs.push_back(a.features);

    PipelineResult res = run_pipeline(img ? &*img : nullptr, std::move(fs), a.cfg);
    auto written =
        write_pipeline_outputs(res, a.cfg, a.out, img ? &*img : nullptr, command, inputs);
    if (gt) {
        EvalReport rep = make_eval_report(res.rps, *gt, a.h, res.vp, res.ts);
        save_report(rep, std::filesystem::path(a.out) / "report.json");
        written.push_back("report.json");
    }
    std::cout << "pipeline wrote " << written.size() << " file(s) to " << a.out << "/ ("
              << res.rps.size() << " pattern(s))\n";
    return 0;
}

struct BatchArgs {
    std::string root;
    BatchOptions opt;
};

int run_batch_cmd(const BatchArgs& a) {
    auto results = run_batch(a.root, a.opt);
    json j = batch_to_json(results, a.opt.h);
    write_json_atomic(j, std::filesystem::path(a.root) / "batch_report.json");
    int ok = 0;
    for (const auto& r : results) ok += r.ok ? 1 : 0;
    std::cout << "batch: " << ok << "/" << results.size() << " scene(s) ok -> "
              << (std::filesystem::path(a.root) / "batch_report.json").string() << "\n";
    return ok > 0 ? 0 : 6;  // partial failures are listed, not fatal
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Recurring-pattern discovery and single-view geometry toolkit"};
    app.require_subcommand(1);
    unsigned default_seed = env_seed();

    FeatureArgs fa;
    auto* c_feat = app.add_subcommand("features", "detect keypoints in an image");
    c_feat->add_option("image", fa.image, "input image (png/jpeg)")->required();
    c_feat->add_option("-o,--out", fa.out, "output features.json");
    c_feat->add_option("--contrast", fa.cfg.contrast_threshold, "DoG contrast threshold");
    c_feat->add_option("--word-dist", fa.word_dist,
                       "also report the visual-word count at this clustering distance");
    c_feat->add_option("--octaves", fa.cfg.octaves, "scale-space octaves");
    c_feat->add_option("--edge-ratio", fa.cfg.edge_ratio, "edge response suppression ratio");

    DiscoverArgs da;
    da.params.seed = default_seed;
    auto* c_disc = app.add_subcommand("discover", "find recurring patterns in a feature set");
    c_disc->add_option("features", da.features, "input features.json")->required();
    c_disc->add_option("-o,--out", da.out, "output rps.json");
    c_disc->add_flag("--grid", da.grid, "grid-search cache parameters");
    c_disc->add_option("--word-threshold", da.words.distance_threshold,
                       "descriptor distance for word clustering");
    add_param_options(c_disc, da.params);

    VpdArgs va;
    va.ransac.seed = default_seed;
    auto* c_vpd = app.add_subcommand("vpd", "estimate the vanishing point of a pattern");
    c_vpd->add_option("rps", va.rps, "input rps.json (with embedded cell positions)")
        ->required();
    c_vpd->add_option("--image-size", va.image_size, "override frame size, WxH");
    c_vpd->add_option("--features", va.features, "features.json (overrides embedded positions)");
    c_vpd->add_option("-o,--out", va.out, "output vp.json");
    c_vpd->add_option("--rp", va.rp_id, "pattern id (default: best)");
    c_vpd->add_option("--line-gate", va.line_gate, "rms/length gate for word lines");
    c_vpd->add_option("--ac-deg,--angular-constraint", va.ransac.angular_constraint_deg,
                      "min angle between sampled line pairs, degrees");
    c_vpd->add_option("--inlier-px", va.ransac.inlier_px, "consensus distance, px");
    c_vpd->add_option("--iterations", va.ransac.iterations, "RANSAC iterations");
    c_vpd->add_option("--min-lines", va.ransac.min_lines, "minimum consensus size");
    c_vpd->add_option("--focal", va.ransac.focal, "nominal focal length, px");
    c_vpd->add_option("--seed", va.ransac.seed, "RANSAC seed");

    SymmetryArgs sa;
    auto* c_sym = app.add_subcommand("symmetry", "cross-ratio translation-symmetry test");
    c_sym->add_option("rps", sa.rps, "input rps.json")->required();
    c_sym->add_option("-o,--out", sa.out, "output ts.json");
    c_sym->add_option("--rp", sa.rp_id, "pattern id (default: best)");
    c_sym->add_option("--t,--threshold", sa.threshold, "max median cross-ratio deviation");

    RectifyArgs ra;
    auto* c_rect = app.add_subcommand("rectify", "warp the pattern region toward frontal view");
    c_rect->add_option("image", ra.image, "input image")->required();
    c_rect->add_option("rps", ra.rps, "input rps.json")->required();
    c_rect->add_option("vp", ra.vp, "input vp.json")->required();
    c_rect->add_option("-o,--out", ra.out, "output png");
    c_rect->add_option("--rp", ra.rp_id, "pattern id (default: best)");
    c_rect->add_option("--pad", ra.cfg.pad, "padding around the warped region, px");
    c_rect->add_option("--max-side", ra.cfg.max_side, "output size cap, px");

    CountArgs ca;
    auto* c_count = app.add_subcommand("count", "count instances per pattern");
    c_count->add_option("rps", ca.rps, "input rps.json")->required();
    c_count->add_option("-o,--out", ca.out, "output counts.json");

    EvalArgs ea;
    auto* c_eval = app.add_subcommand("eval", "score detections against ground truth");
    c_eval->set_help_flag("--help", "print help");  // frees -h for the --h threshold
    c_eval->add_option("rps", ea.rps, "input rps.json")->required();
    c_eval->add_option("gt", ea.gt, "ground-truth gt.json")->required();
    c_eval->add_option("-o,--out", ea.out, "output report.json (+ .csv curves)");
    c_eval->add_option("--h", ea.h, "IoD acceptance threshold");
    c_eval->add_option("--sweep", ea.sweep, "h values: start:end:step or comma list");
    c_eval->add_option("--vp", ea.vp, "vp.json to grade against gt vp");
    c_eval->add_option("--ts", ea.ts, "ts.json to grade against gt ts flag");

    CaptionArgs cpa;
    auto* c_cap = app.add_subcommand("caption", "enhance a caption with count and geometry");
    c_cap->add_option("--base", cpa.base, "base caption text")->required();
    c_cap->add_option("--count", cpa.count, "instance count (>= 2)")->required();
    c_cap->add_flag("--ts", cpa.ts, "append the translation-symmetry clause");
    c_cap->add_option("--vp", cpa.vp, "append the vanishing-point clause: inside|outside");
    c_cap->add_option("--regions", cpa.regions,
                      "regions.json rps.json: assign patterns to noun regions")
        ->expected(2);
    c_cap->add_option("--min-overlap", cpa.min_overlap, "required pattern/region overlap");
    c_cap->add_option("-o,--out", cpa.out, "output caption.json");

    SynthArgs sya;
    sya.seed = default_seed;
    auto* c_synth = app.add_subcommand("synth", "generate a synthetic scene with ground truth");
    c_synth->add_option("--preset", sya.preset,
                        "grid|row|row-nonuniform|perspective-row|tower|two-motifs");
    c_synth->add_option("-o,--out", sya.out, "output scene directory");
    c_synth->add_option("--seed", sya.seed, "generator seed");
    c_synth->add_option("--cols", sya.cols, "instances per row");
    c_synth->add_option("--rows", sya.rows, "instance rows");
    c_synth->add_option("--noise", sya.noise, "feature jitter sigma, px");
    c_synth->add_option("--motif", sya.motif, "marker motif index");
    c_synth->add_option("--width", sya.width, "canvas width");
    c_synth->add_option("--height", sya.height, "canvas height");
    c_synth->add_option("--counts", sya.counts, "two-motifs instance counts a,b");

    PipelineArgs pa;
    pa.cfg.params.seed = default_seed;
    pa.cfg.ransac.seed = default_seed;
    auto* c_pipe = app.add_subcommand("pipeline", "run every stage and write all artifacts");
    c_pipe->set_help_flag("--help", "print help");  // frees -h for the --h threshold
    c_pipe->add_option("image", pa.image, "input image (optional with --features)");
    c_pipe->add_option("--features", pa.features, "precomputed features.json");
    c_pipe->add_option("-o,--out", pa.out, "output directory");
    c_pipe->add_flag("--grid", pa.cfg.grid_search, "grid-search cache parameters");
    c_pipe->add_flag("--eval", pa.eval, "grade against ground truth and write report.json");
    c_pipe->add_option("--gt", pa.gt, "ground-truth path (default: gt.json next to input)");
    c_pipe->add_option("--h", pa.h, "IoD threshold for --eval");
    c_pipe->add_option("--caption-base", pa.cfg.caption_base, "caption to enhance");
    c_pipe->add_option("--ts-threshold", pa.cfg.ts_threshold, "symmetry deviation threshold");
    c_pipe->add_option("--word-threshold", pa.cfg.words.distance_threshold,
                       "descriptor distance for word clustering");
    c_pipe->add_option("--ac-deg,--angular-constraint", pa.cfg.ransac.angular_constraint_deg,
                       "min angle between sampled line pairs, degrees");
    add_param_options(c_pipe, pa.cfg.params);

    BatchArgs ba;
    ba.opt.pipeline.params.seed = default_seed;
    ba.opt.pipeline.ransac.seed = default_seed;
    auto* c_batch = app.add_subcommand("batch", "run the pipeline over scene subdirectories");
    c_batch->set_help_flag("--help", "print help");  // frees -h for the --h threshold
    c_batch->add_option("root", ba.root, "directory of scene subdirectories")->required();
    c_batch->add_option("--workers", ba.opt.workers, "max concurrent scenes");
    c_batch->add_option("--h", ba.opt.h, "IoD threshold for evaluation");
    c_batch->add_option("--ac-deg,--angular-constraint",
                        ba.opt.pipeline.ransac.angular_constraint_deg,
                        "min angle between sampled line pairs, degrees");
    add_param_options(c_batch, ba.opt.pipeline.params);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);   // prints help or the usage message
        return rc == 0 ? 0 : 2;  // every usage error maps to exit code 2
    }

    std::string command;
    for (int i = 0; i < argc; ++i) command += (i ? " " : "") + std::string(argv[i]);

    try {
        if (app.got_subcommand(c_feat)) return run_features(fa);
        if (app.got_subcommand(c_disc)) return run_discover(da);
        if (app.got_subcommand(c_vpd)) return run_vpd(va);
        if (app.got_subcommand(c_sym)) return run_symmetry(sa);
        if (app.got_subcommand(c_rect)) return run_rectify(ra);
        if (app.got_subcommand(c_count)) return run_count(ca);
        if (app.got_subcommand(c_eval)) return run_eval(ea);
        if (app.got_subcommand(c_cap)) return run_caption(cpa);
        if (app.got_subcommand(c_synth)) return run_synth(sya);
        if (app.got_subcommand(c_pipe)) return run_pipeline_cmd(pa, command);
        if (app.got_subcommand(c_batch)) return run_batch_cmd(ba);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 6;
    }
    return 2;
}

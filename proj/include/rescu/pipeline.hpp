#pragma once

// End-to-end orchestration: detect (or ingest) features, build words,
// discover patterns, run the geometry stages, and write every artifact with
// a run manifest. Batch mode fans the same pipeline over scene directories.

#include <atomic>
#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "rescu/caption.hpp"
#include "rescu/crossratio.hpp"
#include "rescu/detect.hpp"
#include "rescu/discover.hpp"
#include "rescu/image.hpp"
#include "rescu/json_io.hpp"
#include "rescu/lines.hpp"
#include "rescu/metrics.hpp"
#include "rescu/overlay.hpp"
#include "rescu/vanishing.hpp"
#include "rescu/words.hpp"

namespace rescu {

inline constexpr const char* kToolVersion = "1.0.0";

struct PipelineConfig {
    DiscoveryParams params;
    bool grid_search = false;  // sweep the cache-parameter grid, keep the best
    WordsConfig words;
    DetectorConfig detector;
    RansacConfig ransac;
    double ts_threshold = 0.06;
    double line_gate = 0.02;   // rms <= gate * length keeps a word line
    std::string caption_base;  // non-empty: run caption enhancement
    bool overlay = true;       // write overlay.png when an image is available
};

struct StageTiming {
    std::string name;
    double wall_ms = 0.0;
};

struct PipelineResult {
    FeatureSet features;
    VisualWordIndex words;
    DiscoveryParams params_used;
    std::vector<RecurringPattern> rps;
    std::vector<LineEstimate> lines;  // fitted on the best pattern
    std::optional<VanishingPoint> vp;
    std::optional<TsResult> ts;  // best pattern
    CountReport counts;
    std::optional<CaptionFile> caption;
    std::vector<StageTiming> stages;
};

namespace detail {

class Stopwatch {
  public:
    explicit Stopwatch(std::vector<StageTiming>& sink) : sink_(sink) {}
    template <class Fn>
    void stage(const char* name, Fn&& fn) {
        auto t0 = std::chrono::steady_clock::now();
        fn();
        auto t1 = std::chrono::steady_clock::now();
        double ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        sink_.push_back({name, ms});
    }

  private:
    std::vector<StageTiming>& sink_;
};

}  // namespace detail

// `image` may be null when `features` is provided; `features` may be empty
// when an image is given (the detector fills them in).
inline PipelineResult run_pipeline(const Raster* image, std::optional<FeatureSet> features,
                                   const PipelineConfig& cfg) {
    PipelineResult res;
    detail::Stopwatch watch(res.stages);

    watch.stage("features", [&] {
        if (features) {
            res.features = std::move(*features);
        } else {
            if (!image || image->empty())
                fail(ErrorCode::validation, "pipeline needs an image or a feature set");
            res.features = detect_features(*image, cfg.detector);
        }
        if (auto probs = validate_feature_set(res.features); !probs.empty())
            fail(ErrorCode::validation, "invalid feature set: " + probs.front());
    });

    watch.stage("words", [&] { res.words = build_visual_words(res.features, cfg.words); });

    watch.stage("discover", [&] {
        if (cfg.grid_search) {
            auto grid = default_parameter_grid(cfg.params);
            auto best = grid_search_params(res.features, res.words, grid);
            res.rps = std::move(best.patterns);
            res.params_used = best.params;
        } else {
            res.rps = discover_rps(res.features, res.words, cfg.params);
            res.params_used = cfg.params;
        }
    });

    if (!res.rps.empty()) {
        const RecurringPattern& best = res.rps.front();
        watch.stage("lines", [&] {
            res.lines = lines_from_rp(res.features, best.matrix, cfg.line_gate);
        });
        watch.stage("vanishing_point", [&] {
            try {
                res.vp = ransac_vp(res.lines, res.features.width, res.features.height,
                                   cfg.ransac);
            } catch (const Error& e) {
                if (e.code() != ErrorCode::insufficient && e.code() != ErrorCode::no_consensus)
                    throw;
            }
        });
        watch.stage("translation_symmetry",
                    [&] { res.ts = detect_translation_symmetry(best, cfg.ts_threshold); });
    }

    watch.stage("count", [&] { res.counts = count_instances(res.rps); });

    if (!cfg.caption_base.empty() && !res.rps.empty()) {
        watch.stage("caption", [&] {
            CaptionContext ctx;
            ctx.count = int(res.rps.front().instances.size());
            ctx.ts_detected = res.ts && res.ts->has_symmetry;
            if (res.vp) {
                bool inside = res.vp->point.x >= 0 && res.vp->point.y >= 0 &&
                              res.vp->point.x < res.features.width &&
                              res.vp->point.y < res.features.height;
                ctx.vp_status = inside ? VpStatus::inside : VpStatus::outside;
            }
            CaptionFile cap;
            cap.caption = enhance_caption(cfg.caption_base, ctx);
            cap.count = ctx.count;
            cap.ts_detected = ctx.ts_detected;
            cap.vp_status = ctx.vp_status == VpStatus::none
                                ? "none"
                                : (ctx.vp_status == VpStatus::inside ? "inside" : "outside");
            res.caption = std::move(cap);
        });
    }
    return res;
}

inline json manifest_to_json(const PipelineResult& res, const PipelineConfig& cfg,
                             const std::string& command,
                             const std::vector<std::string>& inputs,
                             const std::vector<std::string>& outputs) {
    json j = detail::header("run_manifest");
    j["tool_version"] = kToolVersion;
    j["command"] = command;
    j["inputs"] = inputs;
    j["params"] = params_to_json(res.params_used);
    j["ransac_seed"] = cfg.ransac.seed;
    json stages = json::array();
    for (const StageTiming& s : res.stages)
        stages.push_back({{"name", s.name}, {"wall_ms", detail::jnum(s.wall_ms)}});
    j["stages"] = std::move(stages);
    j["outputs"] = outputs;
    return j;
}

// Writes every produced artifact into `dir`. The manifest records timings and
// is the only file whose bytes vary between identical runs.
inline std::vector<std::string> write_pipeline_outputs(const PipelineResult& res,
                                                       const PipelineConfig& cfg,
                                                       const std::filesystem::path& dir,
                                                       const Raster* image,
                                                       const std::string& command,
                                                       const std::vector<std::string>& inputs = {}) {
    std::filesystem::create_directories(dir);
    std::vector<std::string> written;
    auto mark = [&](const char* name) { written.push_back(name); };

    save_features(res.features, dir / "features.json");
    mark("features.json");

    RpsFile rf;
    rf.width = res.features.width;
    rf.height = res.features.height;
    rf.params = res.params_used;
    rf.rps = res.rps;
    collect_positions(rf, res.features);
    save_rps(rf, dir / "rps.json");
    mark("rps.json");

    if (res.vp) {
        save_vp(*res.vp, res.lines, dir / "vp.json");
        mark("vp.json");
    }
    if (res.ts) {
        save_ts(*res.ts, res.rps.empty() ? -1 : res.rps.front().id, dir / "ts.json");
        mark("ts.json");
    }
    save_counts(res.counts, dir / "counts.json");
    mark("counts.json");
    if (res.caption) {
        std::filesystem::path tmp = dir / "caption.txt.tmp";
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) fail(ErrorCode::io, "cannot write " + tmp.string());
            out << res.caption->caption << "\n";
        }
        std::error_code ec;
        std::filesystem::rename(tmp, dir / "caption.txt", ec);
        if (ec) fail(ErrorCode::io, "rename failed for caption.txt: " + ec.message());
        mark("caption.txt");
    }
    if (cfg.overlay && image && !image->empty()) {
        std::optional<Vec2> vp_pt;
        if (res.vp) vp_pt = res.vp->point;
        Raster ov = render_overlay(*image, res.rps, res.lines, vp_pt);
        save_png((dir / "overlay.png").string(), ov);
        mark("overlay.png");
    }
    write_json_atomic(manifest_to_json(res, cfg, command, inputs, written),
                      dir / "run_manifest.json");
    written.push_back("run_manifest.json");
    return written;
}

// Builds the evaluation report for one scene given its ground truth.
inline EvalReport make_eval_report(const std::vector<RecurringPattern>& rps,
                                   const GroundTruth& gt, double h,
                                   const std::optional<VanishingPoint>& vp,
                                   const std::optional<TsResult>& ts,
                                   std::vector<double> sweep_hs = {}) {
    EvalReport r;
    r.h = h;
    r.instance = instance_pr(rps, gt.rps, h);
    r.rp = rp_pr(rps, gt.rps, h);
    if (sweep_hs.empty())
        for (int i = 1; i <= 9; ++i) sweep_hs.push_back(i / 10.0);
    r.sweep = sweep_h(rps, gt.rps, sweep_hs);
    r.counts = count_instances(rps);
    if (vp && gt.vp_point) {
        VpdEntry e;
        e.predicted = vp->point;
        e.truth = *gt.vp_point;
        e.width = gt.width;
        e.height = gt.height;
        e.focal = vp->focal;
        r.vp_error_px = vp_point_error(e);
        r.vp_error_deg = vp_angle_error_deg(e);
    }
    if (ts) {
        r.ts_detected = ts->has_symmetry;
        if (gt.ts_uniform) r.ts_expected = *gt.ts_uniform;
    }
    return r;
}

// ---- batch ----

struct BatchOptions {
    PipelineConfig pipeline;
    double h = 0.5;   // IoD acceptance threshold for evaluation
    int workers = 4;  // upper bound on concurrent scenes
};

struct BatchSceneResult {
    std::string name;
    bool ok = false;
    std::string error;
    int n_rps = 0;
    std::optional<EvalReport> report;  // present when the scene has gt.json
};

// A scene is any direct subdirectory holding features.json or image.png.
inline std::vector<std::filesystem::path> find_scenes(const std::filesystem::path& root) {
    if (!std::filesystem::is_directory(root))
        fail(ErrorCode::io, "not a directory: " + root.string());
    std::vector<std::filesystem::path> scenes;
    for (const auto& entry : std::filesystem::directory_iterator(root)) {
        if (!entry.is_directory()) continue;
        if (std::filesystem::exists(entry.path() / "features.json") ||
            std::filesystem::exists(entry.path() / "image.png"))
            scenes.push_back(entry.path());
    }
    std::sort(scenes.begin(), scenes.end());
    return scenes;
}

inline BatchSceneResult run_batch_scene(const std::filesystem::path& scene,
                                        const BatchOptions& opt) {
    BatchSceneResult out;
    out.name = scene.filename().string();
    try {
        std::optional<Raster> image;
        std::optional<FeatureSet> features;
        if (std::filesystem::exists(scene / "image.png")) image = load_image(scene / "image.png");
        if (std::filesystem::exists(scene / "features.json"))
            features = load_features(scene / "features.json");

        std::vector<std::string> inputs;
        if (image) inputs.push_back((scene / "image.png").string());
        if (features) inputs.push_back((scene / "features.json").string());
        PipelineResult res = run_pipeline(image ? &*image : nullptr, std::move(features),
                                          opt.pipeline);
        write_pipeline_outputs(res, opt.pipeline, scene / "out", image ? &*image : nullptr,
                               "batch", inputs);
        out.n_rps = int(res.rps.size());

        if (std::filesystem::exists(scene / "gt.json")) {
            GroundTruth gt = load_gt(scene / "gt.json");
            EvalReport rep = make_eval_report(res.rps, gt, opt.h, res.vp, res.ts);
            save_report(rep, scene / "out" / "report.json");
            out.report = std::move(rep);
        }
        out.ok = true;
    } catch (const std::exception& e) {
        out.error = e.what();
    }
    return out;
}

inline std::vector<BatchSceneResult> run_batch(const std::filesystem::path& root,
                                               const BatchOptions& opt) {
    auto scenes = find_scenes(root);
    if (scenes.empty()) fail(ErrorCode::insufficient, "no scenes under " + root.string());

    std::vector<BatchSceneResult> results(scenes.size());
    unsigned hw = std::thread::hardware_concurrency();
    int workers = std::max(1, std::min({opt.workers, int(scenes.size()),
                                        int(hw == 0 ? 1 : hw)}));
    std::atomic<std::size_t> cursor{0};
    auto worker = [&] {
        for (;;) {
            std::size_t i = cursor.fetch_add(1);
            if (i >= scenes.size()) return;
            results[i] = run_batch_scene(scenes[i], opt);
        }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    return results;
}

inline json batch_to_json(const std::vector<BatchSceneResult>& results, double h) {
    json j = detail::header("batch_report");
    j["h"] = detail::jnum(h);
    json arr = json::array();
    int n_eval = 0, ts_match = 0, ts_graded = 0;
    double sum_ip = 0, sum_ir = 0, sum_rp = 0, sum_rr = 0;
    std::vector<double> vp_errors;
    for (const BatchSceneResult& r : results) {
        json e;
        e["name"] = r.name;
        e["ok"] = r.ok;
        if (!r.ok) e["error"] = r.error;
        e["n_rps"] = r.n_rps;
        if (r.report) {
            e["instance_precision"] = detail::jnum(r.report->instance.precision);
            e["instance_recall"] = detail::jnum(r.report->instance.recall);
            e["rp_precision"] = detail::jnum(r.report->rp.precision);
            e["rp_recall"] = detail::jnum(r.report->rp.recall);
            sum_ip += r.report->instance.precision;
            sum_ir += r.report->instance.recall;
            sum_rp += r.report->rp.precision;
            sum_rr += r.report->rp.recall;
            ++n_eval;
            if (r.report->vp_error_px) {
                e["vp_error_px"] = detail::jnum(*r.report->vp_error_px);
                vp_errors.push_back(*r.report->vp_error_px);
            }
            if (r.report->ts_detected && r.report->ts_expected) {
                bool match = *r.report->ts_detected == *r.report->ts_expected;
                e["ts_match"] = match;
                ++ts_graded;
                if (match) ++ts_match;
            }
        }
        arr.push_back(std::move(e));
    }
    j["scenes"] = std::move(arr);
    if (n_eval > 0) {
        json agg;
        agg["scenes_evaluated"] = n_eval;
        agg["mean_instance_precision"] = detail::jnum(sum_ip / n_eval);
        agg["mean_instance_recall"] = detail::jnum(sum_ir / n_eval);
        agg["mean_rp_precision"] = detail::jnum(sum_rp / n_eval);
        agg["mean_rp_recall"] = detail::jnum(sum_rr / n_eval);
        if (!vp_errors.empty()) {
            double s = 0;
            for (double v : vp_errors) s += v;
            agg["mean_vp_error_px"] = detail::jnum(s / double(vp_errors.size()));
        }
        if (ts_graded > 0)
            agg["ts_match_rate"] = detail::jnum(double(ts_match) / double(ts_graded));
        j["aggregate"] = std::move(agg);

        // mean precision/recall curves over the shared h grid
        std::size_t grid = 0;
        bool same_grid = true;
        for (const BatchSceneResult& r : results) {
            if (!r.report) continue;
            if (grid == 0) grid = r.report->sweep.size();
            same_grid = same_grid && r.report->sweep.size() == grid;
        }
        if (same_grid && grid > 0) {
            json curves = json::array();
            for (std::size_t k = 0; k < grid; ++k) {
                double ip = 0, ir = 0, rpp = 0, rpr = 0, hk = 0;
                for (const BatchSceneResult& r : results) {
                    if (!r.report) continue;
                    const SweepPoint& s = r.report->sweep[k];
                    hk = s.h;
                    ip += s.instance_precision;
                    ir += s.instance_recall;
                    rpp += s.rp_precision;
                    rpr += s.rp_recall;
                }
                curves.push_back({{"h", detail::jnum(hk)},
                                  {"instance_precision", detail::jnum(ip / n_eval)},
                                  {"instance_recall", detail::jnum(ir / n_eval)},
                                  {"rp_precision", detail::jnum(rpp / n_eval)},
                                  {"rp_recall", detail::jnum(rpr / n_eval)}});
            }
            j["curves"] = std::move(curves);
        }
    }
    return j;
}

}  // namespace rescu

// File formats and orchestration: JSON round-trips, byte-identical reruns,
// batch fault tolerance, and the command-line exit-code contract.

#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include "rescu/discover.hpp"
#include "rescu/json_io.hpp"
#include "rescu/pipeline.hpp"
#include "rescu/synth.hpp"
#include "rescu/words.hpp"

using namespace rescu;
using Catch::Approx;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        static std::atomic<int> counter{0};
        path = fs::temp_directory_path() / ("rescu-pipe-" + std::to_string(::getpid()) + "-" +
                                            std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    fs::path operator/(const char* name) const { return path / name; }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spill(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    REQUIRE(out.good());
    out << text;
}

int run_cli(const std::string& args) {
    std::string cmd = std::string(RESCU_CLI) + " " + args + " >/dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    if (rc == -1 || !WIFEXITED(rc)) return -1;
    return WEXITSTATUS(rc);
}

SceneSpec frontal_row(int cols) {
    SceneSpec spec;
    spec.rows = 1;
    spec.cols = cols;
    spec.spacing = 76;
    spec.depth = 300;
    return spec;
}

// Tall-strip markers under strong perspective: the word lines fan widely, so
// the vanishing point is recoverable at the default angular constraint.
SceneSpec tower_row() {
    SceneSpec spec;
    spec.rows = 1;
    spec.cols = 7;
    spec.motif = 2;
    spec.perspective = true;
    spec.tilt = 0.6;
    spec.depth = 480;
    spec.spacing = 58;
    return spec;
}

std::optional<ErrorCode> code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return std::nullopt;
}

}  // namespace

TEST_CASE("feature files round-trip byte-identically") {
    TempDir dir;
    SceneSpec spec = frontal_row(5);
    spec.noise_px = 0.35;
    spec.seed = 3;
    Scene scene = render_scene(spec);

    save_features(scene.features, dir / "f1.json");
    FeatureSet loaded = load_features(dir / "f1.json");
    REQUIRE(loaded.features.size() == scene.features.features.size());
    save_features(loaded, dir / "f2.json");
    REQUIRE(slurp(dir / "f1.json") == slurp(dir / "f2.json"));

    SECTION("a file of the wrong kind is rejected as a parse error") {
        save_gt(scene.gt, dir / "gt.json");
        REQUIRE(code_of([&] { load_features(dir / "gt.json"); }) == ErrorCode::parse);
    }
    SECTION("malformed JSON is a parse error, a missing file an io error") {
        spill(dir / "bad.json", "{ this is not json");
        REQUIRE(code_of([&] { load_features(dir / "bad.json"); }) == ErrorCode::parse);
        REQUIRE(code_of([&] { load_features(dir / "absent.json"); }) == ErrorCode::io);
    }
}

TEST_CASE("pattern files embed the positions later stages need") {
    TempDir dir;
    Scene scene = render_scene(frontal_row(4));
    VisualWordIndex words = build_visual_words(scene.features);
    DiscoveryParams params;
    std::vector<RecurringPattern> rps = discover_rps(scene.features, words, params);
    REQUIRE_FALSE(rps.empty());

    RpsFile rf;
    rf.width = scene.features.width;
    rf.height = scene.features.height;
    rf.params = params;
    rf.rps = rps;
    collect_positions(rf, scene.features);
    save_rps(rf, dir / "r1.json");

    RpsFile loaded = load_rps(dir / "r1.json");
    REQUIRE(loaded.rps.size() == rf.rps.size());
    REQUIRE(loaded.rps[0].score == Approx(rf.rps[0].score).epsilon(1e-8));
    save_rps(loaded, dir / "r2.json");
    REQUIRE(slurp(dir / "r1.json") == slurp(dir / "r2.json"));

    SECTION("embedded positions reconstruct a geometry-ready feature set") {
        FeatureSet pos = positions_feature_set(loaded);
        std::size_t cells = 0;
        for (const auto& col : loaded.rps[0].matrix.columns)
            for (int id : col)
                if (id >= 0) ++cells;
        REQUIRE(pos.features.size() == cells);

        RpsFile bare;
        REQUIRE(code_of([&] { positions_feature_set(bare); }) == ErrorCode::insufficient);
    }
    SECTION("structural damage is a parse error") {
        json j = load_json(dir / "r1.json");
        j["schema"] = "rescu/v2";
        write_json_atomic(j, dir / "tampered.json");
        REQUIRE(code_of([&] { load_rps(dir / "tampered.json"); }) == ErrorCode::parse);

        json k = load_json(dir / "r1.json");
        k["rps"][0]["words"].erase(0);  // cells no longer match the row count
        write_json_atomic(k, dir / "short.json");
        REQUIRE(code_of([&] { load_rps(dir / "short.json"); }) == ErrorCode::parse);
    }
}

TEST_CASE("ground-truth, vanishing-point, and symmetry files reload exactly") {
    TempDir dir;

    SECTION("ground truth with boxes, a polygon, vp, and the ts flag") {
        GroundTruth gt;
        gt.width = 640;
        gt.height = 480;
        GtRp rp0;
        rp0.id = 0;
        for (int i = 0; i < 2; ++i) {
            GtInstance gi;
            gi.id = i;
            gi.box = {10.0 + 70 * i, 20.0, 60.0 + 70 * i, 90.5};
            rp0.instances.push_back(gi);
        }
        GtRp rp1;
        rp1.id = 1;
        GtInstance tri;
        tri.id = 0;
        tri.polygon = {{300, 300}, {340, 300}, {320, 333.25}};
        rp1.instances.push_back(tri);
        gt.rps = {rp0, rp1};
        gt.vp_point = Vec2{711.5, 239.25};
        gt.ts_uniform = true;

        save_gt(gt, dir / "g1.json");
        GroundTruth loaded = load_gt(dir / "g1.json");
        REQUIRE(loaded.rps.size() == 2);
        REQUIRE(loaded.rps[1].instances[0].has_polygon());
        REQUIRE(loaded.rps[1].instances[0].polygon.size() == 3);
        REQUIRE(loaded.vp_point.has_value());
        REQUIRE(loaded.ts_uniform.has_value());
        REQUIRE(*loaded.ts_uniform);
        save_gt(loaded, dir / "g2.json");
        REQUIRE(slurp(dir / "g1.json") == slurp(dir / "g2.json"));
    }

    SECTION("vanishing point with its supporting lines") {
        VanishingPoint vp;
        vp.point = {832.123456789, 240.0};
        vp.direction = {1.0 / 3, 2.0 / 3, -2.0 / 3};
        vp.focal = 280;
        vp.inliers = {0, 2, 3};
        std::vector<LineEstimate> lines(2);
        lines[0] = {std::sqrt(0.5), -std::sqrt(0.5), 12.25, 0.0031, 150.5, 6, 0};
        lines[1] = {0.0, 1.0, -240.0, 0.0, 160.0, 7, 3};

        save_vp(vp, lines, dir / "v1.json");
        VpFile loaded = load_vp(dir / "v1.json");
        REQUIRE(loaded.vp.direction[0] == round9(1.0 / 3));
        REQUIRE(loaded.vp.inliers == vp.inliers);
        REQUIRE(loaded.lines.size() == 2);
        save_vp(loaded.vp, loaded.lines, dir / "v2.json");
        REQUIRE(slurp(dir / "v1.json") == slurp(dir / "v2.json"));
    }

    SECTION("symmetry verdict with its cross-ratio evidence") {
        TsResult ts;
        ts.tested = true;
        ts.n_instances = 6;
        ts.cross_ratios = {4.0 / 3, 1.3334, 1.331};
        ts.deviation = 0.0123456789;
        ts.threshold = 0.06;
        ts.has_symmetry = true;

        save_ts(ts, 4, dir / "t1.json");
        int rp_id = -1;
        TsResult loaded = load_ts(dir / "t1.json", &rp_id);
        REQUIRE(rp_id == 4);
        REQUIRE(loaded.cross_ratios.size() == 3);
        REQUIRE(loaded.has_symmetry);
        save_ts(loaded, rp_id, dir / "t2.json");
        REQUIRE(slurp(dir / "t1.json") == slurp(dir / "t2.json"));
    }
}

TEST_CASE("pipeline reruns produce byte-identical artifacts") {
    Scene scene = render_scene(tower_row());
    PipelineConfig cfg;
    // Tall strips: raise the instance-size cap so a whole tower fits in one
    // column (the granularity knob for large motifs).
    cfg.params.p_d = 0.5;
    cfg.caption_base = "A row of towers in the distance.";

    TempDir d1, d2;
    PipelineResult r1 = run_pipeline(&scene.image, scene.features, cfg);
    auto written = write_pipeline_outputs(r1, cfg, d1.path, &scene.image, "test");
    PipelineResult r2 = run_pipeline(&scene.image, scene.features, cfg);
    write_pipeline_outputs(r2, cfg, d2.path, &scene.image, "test");

    for (const char* name :
         {"features.json", "rps.json", "vp.json", "ts.json", "counts.json", "caption.txt",
          "overlay.png", "run_manifest.json"})
        REQUIRE(std::count(written.begin(), written.end(), name) == 1);

    for (const std::string& name : written) {
        if (name == "run_manifest.json") continue;  // carries wall-clock timings
        INFO("artifact " << name);
        REQUIRE(slurp(d1.path / name) == slurp(d2.path / name));
    }
    json manifest = load_json(d1.path / "run_manifest.json");
    REQUIRE(manifest.at("kind") == "run_manifest");
    REQUIRE(manifest.at("stages").size() >= 5);
    REQUIRE(manifest.at("outputs").get<std::vector<std::string>>().size() == written.size() - 1);

    // The strong-perspective scene exercises every stage for real.
    REQUIRE(r1.vp.has_value());
    REQUIRE(scene.vp.has_value());
    REQUIRE(r1.vp->point.x == Approx(scene.vp->x).margin(0.5));
    REQUIRE(r1.vp->point.y == Approx(scene.vp->y).margin(0.5));
    REQUIRE(r1.ts.has_value());
    REQUIRE(r1.ts->has_symmetry);
    REQUIRE(r1.counts.total == 7);
    REQUIRE(r1.caption.has_value());
    REQUIRE(r1.caption->caption ==
            "Seven similar towers in the distance. The towers have a potential translation "
            "symmetry in 3D and form a vanishing point outside of the image.");
}

TEST_CASE("evaluation report grades a clean run as perfect") {
    TempDir dir;
    Scene scene = render_scene(frontal_row(5));
    VisualWordIndex words = build_visual_words(scene.features);
    std::vector<RecurringPattern> rps = discover_rps(scene.features, words, {});
    REQUIRE_FALSE(rps.empty());
    std::optional<TsResult> ts = detect_translation_symmetry(rps.front());

    EvalReport rep = make_eval_report(rps, scene.gt, 0.5, std::nullopt, ts);
    REQUIRE(rep.instance.precision == 1.0);
    REQUIRE(rep.instance.recall == 1.0);
    REQUIRE(rep.instance.matches.size() == 5);
    REQUIRE(rep.rp.precision == 1.0);
    REQUIRE(rep.rp.recall == 1.0);
    REQUIRE(rep.counts.total == 5);
    REQUIRE(rep.ts_detected.has_value());
    REQUIRE(*rep.ts_detected);
    REQUIRE(rep.ts_expected.has_value());
    REQUIRE(*rep.ts_expected);

    // Detected regions sit inside the template extents, so the curves stay
    // flat across the whole threshold grid.
    REQUIRE(rep.sweep.size() == 9);
    for (const SweepPoint& s : rep.sweep) {
        REQUIRE(s.instance_precision == 1.0);
        REQUIRE(s.instance_recall == 1.0);
    }

    save_report(rep, dir / "rep1.json");
    save_report(make_eval_report(rps, scene.gt, 0.5, std::nullopt, ts), dir / "rep2.json");
    REQUIRE(slurp(dir / "rep1.json") == slurp(dir / "rep2.json"));
}

TEST_CASE("batch tolerates corrupt scenes and aggregates the rest") {
    TempDir root;
    auto make_scene = [&](const char* name, int cols, unsigned seed) {
        SceneSpec spec = frontal_row(cols);
        spec.seed = seed;
        Scene scene = render_scene(spec);
        fs::create_directories(root.path / name);
        save_features(scene.features, root.path / name / "features.json");
        save_gt(scene.gt, root.path / name / "gt.json");
    };
    make_scene("a", 4, 1);
    make_scene("b", 5, 2);
    fs::create_directories(root.path / "c");
    spill(root.path / "c" / "features.json", "{ broken");

    BatchOptions opt;
    std::vector<BatchSceneResult> results = run_batch(root.path, opt);
    REQUIRE(results.size() == 3);
    REQUIRE(results[0].name == "a");
    REQUIRE(results[1].name == "b");
    REQUIRE(results[2].name == "c");

    REQUIRE(results[0].ok);
    REQUIRE(results[1].ok);
    REQUIRE(results[0].report.has_value());
    REQUIRE(results[1].report.has_value());
    REQUIRE_FALSE(results[2].ok);
    REQUIRE_FALSE(results[2].error.empty());
    REQUIRE_FALSE(results[2].report.has_value());
    REQUIRE(fs::exists(root.path / "a" / "out" / "rps.json"));
    REQUIRE_FALSE(fs::exists(root.path / "c" / "out"));

    json j = batch_to_json(results, opt.h);
    REQUIRE(j.at("aggregate").at("scenes_evaluated") == 2);
    REQUIRE(j.at("aggregate").at("mean_instance_recall").get<double>() == 1.0);
    REQUIRE(j.at("aggregate").at("mean_rp_precision").get<double>() == 1.0);
    REQUIRE(j.at("curves").size() == 9);
    REQUIRE(j.at("scenes").size() == 3);
    REQUIRE(j.at("scenes")[2].at("ok") == false);

    SECTION("a directory without scenes refuses to aggregate") {
        TempDir empty;
        REQUIRE(code_of([&] { run_batch(empty.path, opt); }) == ErrorCode::insufficient);
    }
}

TEST_CASE("command-line front end maps failures to distinct exit codes") {
    TempDir t;
    const std::string tp = t.path.string();

    REQUIRE(run_cli("") == 2);                  // no subcommand
    REQUIRE(run_cli("frobnicate") == 2);        // unknown subcommand
    REQUIRE(run_cli("count") == 2);             // missing required argument
    REQUIRE(run_cli("count " + tp + "/missing.json -o " + tp + "/c.json") == 3);

    spill(t / "bad.json", "{ nope");
    REQUIRE(run_cli("count " + tp + "/bad.json -o " + tp + "/c.json") == 4);

    REQUIRE(run_cli("caption --base 'The sky is blue.' --count 3 -o " + tp + "/cap.json") == 5);
}

TEST_CASE("command-line stages chain on a generated scene") {
    TempDir t;
    const std::string tp = t.path.string();
    const std::string scene = tp + "/scene";

    REQUIRE(run_cli("synth --preset grid -o " + tp + "/grid --seed 4") == 0);
    REQUIRE(fs::exists(t / "grid" / "image.png"));
    REQUIRE(fs::exists(t / "grid" / "features.json"));
    REQUIRE(fs::exists(t / "grid" / "gt.json"));
    REQUIRE_FALSE(fs::exists(t / "grid" / "vp_gt.json"));  // frontal preset

    REQUIRE(run_cli("synth --preset perspective-row -o " + scene + " --seed 5") == 0);
    REQUIRE(fs::exists(scene + "/vp_gt.json"));

    REQUIRE(run_cli("discover " + scene + "/features.json -o " + scene + "/rps.json") == 0);
    REQUIRE(run_cli("symmetry " + scene + "/rps.json -o " + scene + "/ts.json") == 0);
    TsResult ts = load_ts(scene + "/ts.json");
    REQUIRE(ts.tested);
    REQUIRE(ts.has_symmetry);

    REQUIRE(run_cli("count " + scene + "/rps.json -o " + scene + "/counts.json") == 0);
    json counts = load_json(scene + "/counts.json");
    REQUIRE(counts.at("total") == 6);

    // Compact markers fan narrowly, so the default pair-angle floor finds no
    // admissible seed pair; lowering it recovers the exact vanishing point.
    REQUIRE(run_cli("vpd " + scene + "/rps.json -o " + scene + "/vp.json") == 6);
    REQUIRE(run_cli("vpd " + scene + "/rps.json --ac-deg 0.5 -o " + scene + "/vp.json") == 0);
    VpFile vp = load_vp(scene + "/vp.json");
    Vec2 truth = load_vp_gt(scene + "/vp_gt.json");
    REQUIRE(vp.vp.point.x == Approx(truth.x).margin(0.1));
    REQUIRE(vp.vp.point.y == Approx(truth.y).margin(0.1));

    REQUIRE(run_cli("rectify " + scene + "/image.png " + scene + "/rps.json " + scene +
                    "/vp.json -o " + scene + "/rect.png") == 0);
    REQUIRE(fs::exists(scene + "/rect.png"));

    REQUIRE(run_cli("eval " + scene + "/rps.json " + scene + "/gt.json -o " + tp +
                    "/rep.json") == 0);
    REQUIRE(fs::exists(tp + "/rep.json"));
    std::string csv = slurp(tp + "/rep.csv");
    REQUIRE(csv.rfind("h,instance_precision,instance_recall,rp_precision,rp_recall\n", 0) == 0);
    json rep = load_json(tp + "/rep.json");
    REQUIRE(rep.at("instance").at("recall").get<double>() == 1.0);
    REQUIRE(rep.at("sweep").size() == 9);

    SECTION("a full pipeline run with --eval writes a report beside the artifacts") {
        REQUIRE(run_cli("pipeline --features " + scene + "/features.json --eval --gt " + scene +
                        "/gt.json -o " + tp + "/out") == 0);
        REQUIRE(fs::exists(tp + "/out/rps.json"));
        REQUIRE(fs::exists(tp + "/out/report.json"));
        REQUIRE(fs::exists(tp + "/out/run_manifest.json"));
    }
    SECTION("a missing ground-truth file aborts before any output is written") {
        REQUIRE(run_cli("pipeline --features " + scene + "/features.json --eval --gt " + tp +
                        "/nope.json -o " + tp + "/none") == 3);
        REQUIRE_FALSE(fs::exists(tp + "/none/rps.json"));
    }
}

#pragma once

// JSON file formats for every pipeline artifact. All files carry
// {"schema": "rescu/v1", "kind": <artifact>} and loads reject anything else.
// Doubles are rounded to 9 significant digits before serialization so that
// repeated runs produce byte-identical output.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "rescu/crossratio.hpp"
#include "rescu/error.hpp"
#include "rescu/lines.hpp"
#include "rescu/metrics.hpp"
#include "rescu/types.hpp"
#include "rescu/vanishing.hpp"

namespace rescu {

using json = nlohmann::ordered_json;

inline constexpr const char* kSchemaTag = "rescu/v1";

// Round-trips through "%.9g" text: enough digits to keep geometry stable,
// few enough that reruns serialize identically.
inline double round9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return std::strtod(buf, nullptr);
}

namespace detail {

inline json jnum(double v) { return json(round9(v)); }

inline json jpoint(const Vec2& p) { return json::array({jnum(p.x), jnum(p.y)}); }

inline json jbox(const Box& b) {
    return json::array({jnum(b.x0), jnum(b.y0), jnum(b.x1), jnum(b.y1)});
}

inline Vec2 parse_point(const json& j) {
    if (!j.is_array() || j.size() != 2) fail(ErrorCode::parse, "point must be [x, y]");
    return {j[0].get<double>(), j[1].get<double>()};
}

inline Box parse_box(const json& j) {
    if (!j.is_array() || j.size() != 4) fail(ErrorCode::parse, "box must be [x0, y0, x1, y1]");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

inline void check_kind(const json& j, const char* kind) {
    if (!j.is_object() || j.value("schema", "") != kSchemaTag)
        fail(ErrorCode::parse, std::string("expected schema ") + kSchemaTag);
    if (j.value("kind", "") != kind)
        fail(ErrorCode::parse, std::string("expected kind '") + kind + "', got '" +
                                   j.value("kind", "") + "'");
}

inline json header(const char* kind) {
    json j;
    j["schema"] = kSchemaTag;
    j["kind"] = kind;
    return j;
}

}  // namespace detail

inline json load_json(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::io, "cannot open " + path.string());
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) fail(ErrorCode::parse, "invalid JSON in " + path.string());
    return j;
}

// Writes via a temp file plus rename so readers never observe a partial file.
inline void write_json_atomic(const json& j, const std::filesystem::path& path) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) fail(ErrorCode::io, "cannot write " + tmp.string());
        out << j.dump(2) << "\n";
        if (!out) fail(ErrorCode::io, "short write to " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) fail(ErrorCode::io, "rename failed for " + path.string() + ": " + ec.message());
}

// Guard running `fn` so malformed field types surface as parse errors with
// the file's path instead of raw nlohmann exceptions.
template <class Fn>
auto parse_guarded(const std::filesystem::path& path, Fn&& fn) {
    try {
        return fn();
    } catch (const Error&) {
        throw;
    } catch (const json::exception& e) {
        fail(ErrorCode::parse, path.string() + ": " + e.what());
    }
}

// ---- features ----

inline json features_to_json(const FeatureSet& fs) {
    json j = detail::header("features");
    j["width"] = fs.width;
    j["height"] = fs.height;
    j["descriptor_dim"] = fs.descriptor_dim;
    json arr = json::array();
    for (const Feature& f : fs.features) {
        json e;
        e["id"] = f.id;
        e["x"] = detail::jnum(f.x);
        e["y"] = detail::jnum(f.y);
        e["scale"] = detail::jnum(f.scale);
        e["orientation"] = detail::jnum(f.orientation);
        e["response"] = detail::jnum(f.response);
        json d = json::array();
        for (float v : f.descriptor) d.push_back(detail::jnum(v));
        e["descriptor"] = std::move(d);
        arr.push_back(std::move(e));
    }
    j["features"] = std::move(arr);
    return j;
}

inline void save_features(const FeatureSet& fs, const std::filesystem::path& path) {
    write_json_atomic(features_to_json(fs), path);
}

inline FeatureSet load_features(const std::filesystem::path& path) {
    json j = load_json(path);
    return parse_guarded(path, [&] {
        detail::check_kind(j, "features");
        FeatureSet fs;
        fs.width = j.at("width").get<int>();
        fs.height = j.at("height").get<int>();
        fs.descriptor_dim = j.at("descriptor_dim").get<int>();
        for (const json& e : j.at("features")) {
            Feature f;
            f.id = e.at("id").get<int>();
            f.x = e.at("x").get<double>();
            f.y = e.at("y").get<double>();
            f.scale = e.at("scale").get<double>();
            f.orientation = e.at("orientation").get<double>();
            f.response = e.value("response", 0.0);
            for (const json& v : e.at("descriptor")) f.descriptor.push_back(v.get<float>());
            fs.features.push_back(std::move(f));
        }
        if (auto probs = validate_feature_set(fs); !probs.empty())
            fail(ErrorCode::validation, path.string() + ": " + probs.front());
        return fs;
    });
}

// ---- discovery parameters ----

inline json params_to_json(const DiscoveryParams& p) {
    json j;
    j["p_d"] = detail::jnum(p.p_d);
    j["p_s"] = detail::jnum(p.p_s);
    j["p_theta_deg"] = detail::jnum(p.p_theta_deg);
    j["sigma_s"] = detail::jnum(p.sigma_s);
    j["sigma_theta"] = detail::jnum(p.sigma_theta);
    j["wrapped_angles"] = p.wrapped_angles;
    j["n_initials"] = p.n_initials;
    j["u_min"] = detail::jnum(p.u_min);
    j["max_rps"] = p.max_rps;
    j["dedup_iod"] = detail::jnum(p.dedup_iod);
    j["seed"] = p.seed;
    return j;
}

inline DiscoveryParams params_from_json(const json& j) {
    DiscoveryParams p;
    p.p_d = j.value("p_d", p.p_d);
    p.p_s = j.value("p_s", p.p_s);
    p.p_theta_deg = j.value("p_theta_deg", p.p_theta_deg);
    p.sigma_s = j.value("sigma_s", p.sigma_s);
    p.sigma_theta = j.value("sigma_theta", p.sigma_theta);
    p.wrapped_angles = j.value("wrapped_angles", p.wrapped_angles);
    p.n_initials = j.value("n_initials", p.n_initials);
    p.u_min = j.value("u_min", p.u_min);
    p.max_rps = j.value("max_rps", p.max_rps);
    p.dedup_iod = j.value("dedup_iod", p.dedup_iod);
    p.seed = j.value("seed", p.seed);
    return p;
}

// ---- recurring patterns ----

struct RpsFile {
    int width = 0;
    int height = 0;
    DiscoveryParams params;
    std::vector<RecurringPattern> rps;
    // positions of the features referenced by matrix cells, keyed by id;
    // lets geometry stages run from this file alone
    std::unordered_map<int, Vec2> positions;
};

inline json rps_to_json(const RpsFile& file) {
    json j = detail::header("rps");
    j["width"] = file.width;
    j["height"] = file.height;
    j["params"] = params_to_json(file.params);
    json arr = json::array();
    for (const RecurringPattern& rp : file.rps) {
        json e;
        e["id"] = rp.id;
        e["score"] = detail::jnum(rp.score);
        e["words"] = rp.matrix.word_ids;
        json insts = json::array();
        for (std::size_t c = 0; c < rp.matrix.columns.size(); ++c) {
            json inst;
            inst["id"] = rp.instances[c].id;
            inst["centroid"] = detail::jpoint(rp.instances[c].centroid);
            inst["bbox"] = detail::jbox(rp.instances[c].bbox);
            inst["cells"] = rp.matrix.columns[c];
            if (!file.positions.empty()) {
                json pts = json::array();
                for (int id : rp.matrix.columns[c]) {
                    auto it = file.positions.find(id);
                    if (id < 0 || it == file.positions.end())
                        pts.push_back(nullptr);
                    else
                        pts.push_back(detail::jpoint(it->second));
                }
                inst["points"] = std::move(pts);
            }
            insts.push_back(std::move(inst));
        }
        e["instances"] = std::move(insts);
        arr.push_back(std::move(e));
    }
    j["rps"] = std::move(arr);
    return j;
}

inline void save_rps(const RpsFile& file, const std::filesystem::path& path) {
    write_json_atomic(rps_to_json(file), path);
}

inline RpsFile load_rps(const std::filesystem::path& path) {
    json j = load_json(path);
    return parse_guarded(path, [&] {
        detail::check_kind(j, "rps");
        RpsFile file;
        file.width = j.at("width").get<int>();
        file.height = j.at("height").get<int>();
        file.params = params_from_json(j.value("params", json::object()));
        for (const json& e : j.at("rps")) {
            RecurringPattern rp;
            rp.id = e.at("id").get<int>();
            rp.score = e.at("score").get<double>();
            rp.matrix.word_ids = e.at("words").get<std::vector<int>>();
            for (const json& inst : e.at("instances")) {
                InstanceRegion region;
                region.id = inst.at("id").get<int>();
                region.centroid = detail::parse_point(inst.at("centroid"));
                region.bbox = detail::parse_box(inst.at("bbox"));
                rp.instances.push_back(region);
                auto cells = inst.at("cells").get<std::vector<int>>();
                if (cells.size() != rp.matrix.word_ids.size())
                    fail(ErrorCode::parse, "cells length must match words length");
                if (inst.contains("points")) {
                    const json& pts = inst.at("points");
                    if (pts.size() != cells.size())
                        fail(ErrorCode::parse, "points length must match cells length");
                    for (std::size_t k = 0; k < cells.size(); ++k)
                        if (cells[k] >= 0 && !pts[k].is_null())
                            file.positions[cells[k]] = detail::parse_point(pts[k]);
                }
                rp.matrix.columns.push_back(std::move(cells));
            }
            if (rp.matrix.columns.size() < 2 || rp.matrix.word_ids.size() < 2)
                fail(ErrorCode::parse, "pattern must be at least 2x2");
            file.rps.push_back(std::move(rp));
        }
        return file;
    });
}

// Fills `file.positions` for every feature id referenced by a matrix cell.
inline void collect_positions(RpsFile& file, const FeatureSet& fs) {
    auto index = fs.id_index();
    for (const RecurringPattern& rp : file.rps)
        for (const auto& col : rp.matrix.columns)
            for (int id : col) {
                if (id < 0) continue;
                auto it = index.find(id);
                if (it == index.end()) fail(ErrorCode::validation, "cell id missing from features");
                const Feature& f = fs.features[it->second];
                file.positions[id] = {f.x, f.y};
            }
}

// Minimal feature set (positions only) reconstructed from an rps file, for
// geometry stages run without the original features.json.
inline FeatureSet positions_feature_set(const RpsFile& file) {
    if (file.positions.empty())
        fail(ErrorCode::insufficient, "rps file carries no cell positions");
    FeatureSet fs;
    fs.width = file.width;
    fs.height = file.height;
    fs.descriptor_dim = 0;
    std::vector<int> ids;
    ids.reserve(file.positions.size());
    for (const auto& [id, p] : file.positions) ids.push_back(id);
    std::sort(ids.begin(), ids.end());
    for (int id : ids) {
        Feature f;
        f.id = id;
        f.x = file.positions.at(id).x;
        f.y = file.positions.at(id).y;
        f.scale = 1.0;
        f.orientation = 0.0;
        fs.features.push_back(std::move(f));
    }
    return fs;
}

// ---- noun regions (caption grounding input) ----

struct NounRegion {
    std::string noun;
    Box box;
};

inline std::vector<NounRegion> load_regions(const std::filesystem::path& path) {
    json j = load_json(path);
    return parse_guarded(path, [&] {
        detail::check_kind(j, "regions");
        std::vector<NounRegion> regions;
        for (const json& e : j.at("regions"))
            regions.push_back({e.at("noun").get<std::string>(),
                               detail::parse_box(e.at("box"))});
        return regions;
    });
}

// ---- ground truth ----

inline json gt_to_json(const GroundTruth& gt) {
    json j = detail::header("gt");
    j["width"] = gt.width;
    j["height"] = gt.height;
    json arr = json::array();
    for (const GtRp& rp : gt.rps) {
        json e;
        e["id"] = rp.id;
        json insts = json::array();
        for (const GtInstance& gi : rp.instances) {
            json inst;
            inst["id"] = gi.id;
            if (gi.has_polygon()) {
                json poly = json::array();
                for (const Vec2& p : gi.polygon) poly.push_back(detail::jpoint(p));
                inst["polygon"] = std::move(poly);
            } else {
                inst["box"] = detail::jbox(gi.box);
            }
            insts.push_back(std::move(inst));
        }
        e["instances"] = std::move(insts);
        arr.push_back(std::move(e));
    }
    j["rps"] = std::move(arr);
    if (gt.vp_point) j["vp"] = {{"point", detail::jpoint(*gt.vp_point)}};
    if (gt.ts_uniform) j["ts"] = {{"uniform_spacing", *gt.ts_uniform}};
    return j;
}

inline void save_gt(const GroundTruth& gt, const std::filesystem::path& path) {
    write_json_atomic(gt_to_json(gt), path);
}

inline GroundTruth load_gt(const std::filesystem::path& path) {
    json j = load_json(path);
    return parse_guarded(path, [&] {
        detail::check_kind(j, "gt");
        GroundTruth gt;
        gt.width = j.at("width").get<int>();
        gt.height = j.at("height").get<int>();
        for (const json& e : j.at("rps")) {
            GtRp rp;
            rp.id = e.at("id").get<int>();
            for (const json& inst : e.at("instances")) {
                GtInstance gi;
                gi.id = inst.at("id").get<int>();
                if (inst.contains("polygon")) {
                    for (const json& p : inst.at("polygon"))
                        gi.polygon.push_back(detail::parse_point(p));
                    if (gi.polygon.size() < 3)
                        fail(ErrorCode::parse, "polygon needs at least 3 vertices");
                } else {
                    gi.box = detail::parse_box(inst.at("box"));
                }
                rp.instances.push_back(std::move(gi));
            }
            gt.rps.push_back(std::move(rp));
        }
        if (j.contains("vp")) gt.vp_point = detail::parse_point(j.at("vp").at("point"));
        if (j.contains("ts")) gt.ts_uniform = j.at("ts").at("uniform_spacing").get<bool>();
        return gt;
    });
}

// ---- vanishing point ----

inline json vp_to_json(const VanishingPoint& vp, const std::vector<LineEstimate>& lines) {
    json j = detail::header("vp");
    j["point"] = detail::jpoint(vp.point);
    j["direction"] =
        json::array({detail::jnum(vp.direction[0]), detail::jnum(vp.direction[1]),
                     detail::jnum(vp.direction[2])});
    j["focal"] = detail::jnum(vp.focal);
    j["inliers"] = vp.inliers;
    json arr = json::array();
    for (const LineEstimate& ln : lines) {
        json e;
        e["word"] = ln.word_id;
        e["a"] = detail::jnum(ln.a);
        e["b"] = detail::jnum(ln.b);
        e["c"] = detail::jnum(ln.c);
        e["rms"] = detail::jnum(ln.rms);
        e["length"] = detail::jnum(ln.length);
        e["n"] = ln.n;
        arr.push_back(std::move(e));
    }
    j["lines"] = std::move(arr);
    return j;
}

inline void save_vp(const VanishingPoint& vp, const std::vector<LineEstimate>& lines,
                    const std::filesystem::path& path) {
    write_json_atomic(vp_to_json(vp, lines), path);
}

// Ground-truth vanishing point emitted by the scene generator.
inline void save_vp_gt(Vec2 point, const std::filesystem::path& path) {
    json j = detail::header("vp_gt");
    j["point"] = detail::jpoint(point);
    write_json_atomic(j, path);
}

inline Vec2 load_vp_gt(const std::filesystem::path& path) {
    json j = load_json(path);
    return parse_guarded(path, [&] {
        detail::check_kind(j, "vp_gt");
        return detail::parse_point(j.at("point"));
    });
}

struct VpFile {
    VanishingPoint vp;
    std::vector<LineEstimate> lines;
};

inline VpFile load_vp(const std::filesystem::path& path) {
    json j = load_json(path);
    return parse_guarded(path, [&] {
        detail::check_kind(j, "vp");
        VpFile file;
        file.vp.point = detail::parse_point(j.at("point"));
        const json& d = j.at("direction");
        if (!d.is_array() || d.size() != 3) fail(ErrorCode::parse, "direction must be [x, y, z]");
        for (int i = 0; i < 3; ++i) file.vp.direction[i] = d[i].get<double>();
        file.vp.focal = j.at("focal").get<double>();
        file.vp.inliers = j.value("inliers", std::vector<int>{});
        for (const json& e : j.value("lines", json::array())) {
            LineEstimate ln;
            ln.word_id = e.at("word").get<int>();
            ln.a = e.at("a").get<double>();
            ln.b = e.at("b").get<double>();
            ln.c = e.at("c").get<double>();
            ln.rms = e.value("rms", 0.0);
            ln.length = e.value("length", 0.0);
            ln.n = e.value("n", 0);
            file.lines.push_back(ln);
        }
        return file;
    });
}

// ---- translation symmetry ----

inline json ts_to_json(const TsResult& ts, int rp_id) {
    json j = detail::header("ts");
    j["rp_id"] = rp_id;
    j["tested"] = ts.tested;
    j["n_instances"] = ts.n_instances;
    json crs = json::array();
    for (double cr : ts.cross_ratios) crs.push_back(detail::jnum(cr));
    j["cross_ratios"] = std::move(crs);
    j["deviation"] = detail::jnum(ts.deviation);
    j["threshold"] = detail::jnum(ts.threshold);
    j["has_symmetry"] = ts.has_symmetry;
    return j;
}

inline void save_ts(const TsResult& ts, int rp_id, const std::filesystem::path& path) {
    write_json_atomic(ts_to_json(ts, rp_id), path);
}

inline TsResult load_ts(const std::filesystem::path& path, int* rp_id = nullptr) {
    json j = load_json(path);
    return parse_guarded(path, [&] {
        detail::check_kind(j, "ts");
        TsResult ts;
        if (rp_id) *rp_id = j.value("rp_id", -1);
        ts.tested = j.at("tested").get<bool>();
        ts.n_instances = j.at("n_instances").get<int>();
        for (const json& v : j.value("cross_ratios", json::array()))
            ts.cross_ratios.push_back(v.get<double>());
        ts.deviation = j.at("deviation").get<double>();
        ts.threshold = j.at("threshold").get<double>();
        ts.has_symmetry = j.at("has_symmetry").get<bool>();
        return ts;
    });
}

// ---- counting ----

inline json counts_to_json(const CountReport& counts) {
    json j = detail::header("counts");
    json arr = json::array();
    for (std::size_t i = 0; i < counts.per_rp.size(); ++i)
        arr.push_back({{"id", int(i)}, {"count", counts.per_rp[i]}});
    j["per_rp"] = std::move(arr);
    j["total"] = counts.total;
    return j;
}

inline void save_counts(const CountReport& counts, const std::filesystem::path& path) {
    write_json_atomic(counts_to_json(counts), path);
}

// ---- evaluation report ----

struct EvalReport {
    double h = 0.5;
    MatchStats instance;
    RpMatchStats rp;
    std::vector<SweepPoint> sweep;
    CountReport counts;
    std::optional<double> vp_error_px;
    std::optional<double> vp_error_deg;
    std::optional<bool> ts_detected;
    std::optional<bool> ts_expected;
};

inline json report_to_json(const EvalReport& r) {
    json j = detail::header("report");
    j["h"] = detail::jnum(r.h);
    j["instance"] = {{"precision", detail::jnum(r.instance.precision)},
                     {"recall", detail::jnum(r.instance.recall)},
                     {"matches", r.instance.matches},
                     {"n_detected", r.instance.n_det},
                     {"n_ground_truth", r.instance.n_gt}};
    j["rp"] = {{"precision", detail::jnum(r.rp.precision)},
               {"recall", detail::jnum(r.rp.recall)},
               {"assignment", r.rp.assignment},
               {"n_detected", r.rp.n_det},
               {"n_ground_truth", r.rp.n_gt}};
    json sweep = json::array();
    for (const SweepPoint& s : r.sweep) {
        sweep.push_back({{"h", detail::jnum(s.h)},
                         {"instance_precision", detail::jnum(s.instance_precision)},
                         {"instance_recall", detail::jnum(s.instance_recall)},
                         {"rp_precision", detail::jnum(s.rp_precision)},
                         {"rp_recall", detail::jnum(s.rp_recall)}});
    }
    j["sweep"] = std::move(sweep);
    j["counts"] = counts_to_json(r.counts);
    j["counts"].erase("schema");
    j["counts"].erase("kind");
    if (r.vp_error_px) j["vp"] = {{"error_px", detail::jnum(*r.vp_error_px)},
                                  {"error_deg", detail::jnum(*r.vp_error_deg)}};
    if (r.ts_detected) {
        json ts = {{"detected", *r.ts_detected}};
        if (r.ts_expected) {
            ts["expected"] = *r.ts_expected;
            ts["match"] = (*r.ts_detected == *r.ts_expected);
        }
        j["ts"] = std::move(ts);
    }
    return j;
}

inline void save_report(const EvalReport& r, const std::filesystem::path& path) {
    write_json_atomic(report_to_json(r), path);
}

// ---- caption ----

struct CaptionFile {
    std::string caption;
    int count = 0;
    bool ts_detected = false;
    std::string vp_status = "none";
};

inline json caption_to_json(const CaptionFile& c) {
    json j = detail::header("caption");
    j["caption"] = c.caption;
    j["count"] = c.count;
    j["ts_detected"] = c.ts_detected;
    j["vp_status"] = c.vp_status;
    return j;
}

inline void save_caption(const CaptionFile& c, const std::filesystem::path& path) {
    write_json_atomic(caption_to_json(c), path);
}

}  // namespace rescu

#pragma once

// Evaluation metrics: intersection-over-detection (IOD) between detected and
// ground-truth regions, instance- and pattern-level precision/recall with a
// strict IOD acceptance threshold, threshold sweeps, vanishing-point success
// curves, translation-symmetry success rate, and instance counting.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "rescu/error.hpp"
#include "rescu/geom.hpp"
#include "rescu/types.hpp"
#include "rescu/vanishing.hpp"

namespace rescu {

// A region is a box or a finer polygon contour (used when >= 3 vertices).
struct EvalRegion {
    Box box;
    Polygon polygon;
    bool has_polygon() const { return polygon.size() >= 3; }
};

inline EvalRegion region_from_box(Box b) { return {b, {}}; }

inline EvalRegion region_from_gt(const GtInstance& g) {
    return {g.box, g.has_polygon() ? g.polygon : Polygon{}};
}

inline double region_area(const EvalRegion& r) {
    return r.has_polygon() ? polygon_area(r.polygon) : r.box.area();
}

// |a ∩ b| for box/polygon operands. Arbitrary polygon pairs are clipped
// against whichever operand is convex; two mutually non-convex polygons are
// out of scope.
inline double region_intersection_area(const EvalRegion& a, const EvalRegion& b) {
    if (!a.has_polygon() && !b.has_polygon()) return box_intersection(a.box, b.box).area();
    if (!a.has_polygon()) return polygon_area(clip_polygon_convex(b.polygon, box_polygon(a.box)));
    if (!b.has_polygon()) return polygon_area(clip_polygon_convex(a.polygon, box_polygon(b.box)));
    if (polygon_is_convex(b.polygon)) return polygon_area(clip_polygon_convex(a.polygon, b.polygon));
    if (polygon_is_convex(a.polygon)) return polygon_area(clip_polygon_convex(b.polygon, a.polygon));
    fail(ErrorCode::unsupported, "intersection of two non-convex polygons");
}

// Intersection over detection: |det ∩ gt| / |det|. Asymmetric by design; an
// empty detection region cannot be scored.
inline double iod(const EvalRegion& det, const EvalRegion& gt) {
    double da = region_area(det);
    if (da <= 0) fail(ErrorCode::degenerate, "empty detection region");
    return region_intersection_area(det, gt) / da;
}

// ---------------------------------------------------------------------------
// Instance-level matching.
// ---------------------------------------------------------------------------

struct MatchStats {
    std::vector<std::pair<int, int>> matches;  // (detection index, gt index)
    int n_det = 0;
    int n_gt = 0;
    double precision = 1.0;
    double recall = 1.0;
};

namespace detail {

// Augmenting-path step over the eligible-pair graph: tries to give detection
// `d` a gt, re-pairing already-matched detections along the way. Neighbor
// order is (IOD descending, gt index), so re-pairing is deterministic.
inline bool rematch(int d, const std::vector<std::vector<int>>& adj, std::vector<char>& visited,
                    std::vector<int>& match_d, std::vector<int>& match_g) {
    for (int g : adj[std::size_t(d)]) {
        if (visited[std::size_t(g)]) continue;
        visited[std::size_t(g)] = 1;
        if (match_g[std::size_t(g)] < 0 ||
            rematch(match_g[std::size_t(g)], adj, visited, match_d, match_g)) {
            match_g[std::size_t(g)] = d;
            match_d[std::size_t(d)] = g;
            return true;
        }
    }
    return false;
}

}  // namespace detail

// One-to-one matching over pairs with IOD strictly above h. Pairs are taken
// greedily in descending IOD (ties by detection index, then gt index), then
// unmatched detections are completed via augmenting paths, so the accepted
// count always equals the optimal assignment and never depends on input
// order. With no detections precision is 1; with no ground truth recall is 1.
inline MatchStats match_instances(const std::vector<EvalRegion>& dets,
                                  const std::vector<EvalRegion>& gts, double h) {
    MatchStats st;
    st.n_det = int(dets.size());
    st.n_gt = int(gts.size());
    struct Cand {
        double v;
        int d, g;
    };
    std::vector<Cand> cands;
    for (int d = 0; d < st.n_det; ++d)
        for (int g = 0; g < st.n_gt; ++g) {
            double v = iod(dets[d], gts[g]);
            if (v > h) cands.push_back({v, d, g});
        }
    std::sort(cands.begin(), cands.end(), [](const Cand& l, const Cand& r) {
        if (l.v != r.v) return l.v > r.v;
        if (l.d != r.d) return l.d < r.d;
        return l.g < r.g;
    });

    std::vector<std::vector<int>> adj(dets.size());
    for (const Cand& c : cands) adj[std::size_t(c.d)].push_back(c.g);

    std::vector<int> match_d(dets.size(), -1), match_g(gts.size(), -1);
    for (const Cand& c : cands) {
        if (match_d[std::size_t(c.d)] >= 0 || match_g[std::size_t(c.g)] >= 0) continue;
        match_d[std::size_t(c.d)] = c.g;
        match_g[std::size_t(c.g)] = c.d;
    }
    for (int d = 0; d < st.n_det; ++d) {
        if (match_d[std::size_t(d)] >= 0) continue;
        std::vector<char> visited(gts.size(), 0);
        detail::rematch(d, adj, visited, match_d, match_g);
    }

    for (int d = 0; d < st.n_det; ++d)
        if (match_d[std::size_t(d)] >= 0) st.matches.emplace_back(d, match_d[std::size_t(d)]);
    if (st.n_det > 0) st.precision = double(st.matches.size()) / st.n_det;
    if (st.n_gt > 0) st.recall = double(st.matches.size()) / st.n_gt;
    return st;
}

inline std::vector<EvalRegion> regions_of(const RecurringPattern& rp) {
    std::vector<EvalRegion> out;
    out.reserve(rp.instances.size());
    for (const auto& inst : rp.instances) out.push_back(region_from_box(inst.bbox));
    return out;
}

inline std::vector<EvalRegion> regions_of(const GtRp& rp) {
    std::vector<EvalRegion> out;
    out.reserve(rp.instances.size());
    for (const auto& inst : rp.instances) out.push_back(region_from_gt(inst));
    return out;
}

// Image-level instance precision/recall: all detected instances across all
// patterns against all ground-truth instances.
inline MatchStats instance_pr(const std::vector<RecurringPattern>& dets,
                              const std::vector<GtRp>& gts, double h) {
    std::vector<EvalRegion> d, g;
    for (const auto& rp : dets)
        for (const auto& inst : rp.instances) d.push_back(region_from_box(inst.bbox));
    for (const auto& rp : gts)
        for (const auto& inst : rp.instances) g.push_back(region_from_gt(inst));
    return match_instances(d, g, h);
}

// ---------------------------------------------------------------------------
// Pattern-level matching.
// ---------------------------------------------------------------------------

struct RpMatchStats {
    std::vector<int> assignment;  // per detected pattern: gt index or -1
    int n_det = 0;
    int n_gt = 0;
    double precision = 1.0;  // accepted detections / detections
    double recall = 1.0;     // distinct covered gts / gts
};

// Each detected pattern is assigned to the ground-truth pattern with the
// highest instance-level precision against it (ties by gt index), accepted
// when that precision is positive.
inline RpMatchStats rp_pr(const std::vector<RecurringPattern>& dets, const std::vector<GtRp>& gts,
                          double h) {
    RpMatchStats st;
    st.n_det = int(dets.size());
    st.n_gt = int(gts.size());
    st.assignment.assign(dets.size(), -1);
    std::vector<char> covered(gts.size(), 0);
    int accepted = 0;
    for (std::size_t d = 0; d < dets.size(); ++d) {
        auto dregions = regions_of(dets[d]);
        double best = 0.0;
        int best_g = -1;
        for (std::size_t g = 0; g < gts.size(); ++g) {
            MatchStats ms = match_instances(dregions, regions_of(gts[g]), h);
            if (ms.precision > best) {
                best = ms.precision;
                best_g = int(g);
            }
        }
        if (best_g >= 0 && best > 0.0) {
            st.assignment[d] = best_g;
            covered[best_g] = 1;
            ++accepted;
        }
    }
    if (st.n_det > 0) st.precision = double(accepted) / st.n_det;
    if (st.n_gt > 0) {
        int distinct = 0;
        for (char c : covered) distinct += c;
        st.recall = double(distinct) / st.n_gt;
    }
    return st;
}

// ---------------------------------------------------------------------------
// Sweeps, curves, rates, counts.
// ---------------------------------------------------------------------------

struct SweepPoint {
    double h = 0.0;
    double instance_precision = 1.0;
    double instance_recall = 1.0;
    double rp_precision = 1.0;
    double rp_recall = 1.0;
};

inline std::vector<SweepPoint> sweep_h(const std::vector<RecurringPattern>& dets,
                                       const std::vector<GtRp>& gts,
                                       const std::vector<double>& grid) {
    std::vector<SweepPoint> out;
    out.reserve(grid.size());
    for (double h : grid) {
        MatchStats mi = instance_pr(dets, gts, h);
        RpMatchStats mr = rp_pr(dets, gts, h);
        out.push_back({h, mi.precision, mi.recall, mr.precision, mr.recall});
    }
    return out;
}

struct VpdEntry {
    Vec2 predicted;
    Vec2 truth;
    int width = 0;
    int height = 0;
    double focal = 0.0;  // 0 = (width + height) / 4
};

inline double vp_point_error(const VpdEntry& e) { return distance(e.predicted, e.truth); }

inline double vp_angle_error_deg(const VpdEntry& e) {
    auto a = vp_to_vector(e.predicted, e.width, e.height, e.focal);
    auto b = vp_to_vector(e.truth, e.width, e.height, e.focal);
    double d = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    d = std::clamp(d, -1.0, 1.0);
    return std::acos(d) * 180.0 / 3.14159265358979323846;
}

struct VpdCurves {
    std::vector<double> taus_px, success_px;    // SR over point distance thresholds
    std::vector<double> taus_deg, success_deg;  // SR over direction angle thresholds
};

// Success rate = fraction of detected VPs within each threshold of the truth.
inline VpdCurves vpd_success_curve(const std::vector<VpdEntry>& entries,
                                   const std::vector<double>& taus_px,
                                   const std::vector<double>& taus_deg) {
    if (entries.empty()) fail(ErrorCode::insufficient, "no vanishing-point records");
    VpdCurves out;
    out.taus_px = taus_px;
    out.taus_deg = taus_deg;
    for (double tau : taus_px) {
        int ok = 0;
        for (const auto& e : entries)
            if (vp_point_error(e) <= tau) ++ok;
        out.success_px.push_back(double(ok) / entries.size());
    }
    for (double tau : taus_deg) {
        int ok = 0;
        for (const auto& e : entries)
            if (vp_angle_error_deg(e) <= tau) ++ok;
        out.success_deg.push_back(double(ok) / entries.size());
    }
    return out;
}

// Fraction of scenes whose deviation clears the (possibly re-applied)
// threshold. `deviations` holds (tested, deviation) per scene.
inline double ts_success_rate(const std::vector<std::pair<bool, double>>& scenes, double t) {
    if (scenes.empty()) fail(ErrorCode::insufficient, "no translation-symmetry records");
    int ok = 0;
    for (const auto& [tested, dev] : scenes)
        if (tested && dev <= t) ++ok;
    return double(ok) / scenes.size();
}

struct CountReport {
    std::vector<int> per_rp;
    int total = 0;
};

inline CountReport count_instances(const std::vector<RecurringPattern>& rps) {
    CountReport rep;
    for (const auto& rp : rps) {
        rep.per_rp.push_back(int(rp.instances.size()));
        rep.total += int(rp.instances.size());
    }
    return rep;
}

}  // namespace rescu

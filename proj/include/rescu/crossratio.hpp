#pragma once

// Cross-ratio of four colinear points and the translation-symmetry test
// built on it: equally spaced points in 3D keep a cross ratio of exactly 4/3
// under any projective camera, so the deviation of instance centroids from
// 4/3 tests for uniform 3D spacing without reconstructing the scene.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "rescu/error.hpp"
#include "rescu/lines.hpp"
#include "rescu/types.hpp"

namespace rescu {

inline constexpr double kUniformCrossRatio = 4.0 / 3.0;

namespace detail {

// (AC * BD) / (BC * AD) for 1D coordinates ordered a < b < c < d (or the
// reverse); absolute distances make the value orientation-independent.
inline double cross_ratio_1d(double a, double b, double c, double d) {
    double ac = std::abs(c - a), bd = std::abs(d - b);
    double bc = std::abs(c - b), ad = std::abs(d - a);
    if (bc < 1e-12 || ad < 1e-12) fail(ErrorCode::degenerate, "coincident points in cross ratio");
    return (ac * bd) / (bc * ad);
}

inline double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace detail

// Cross ratio of four points given in order along their common line.
// `colinear_tol` bounds the allowed perpendicular deviation as a fraction of
// the point span. Equally spaced points yield exactly 4/3.
inline double cross_ratio(Vec2 p1, Vec2 p2, Vec2 p3, Vec2 p4, double colinear_tol = 0.02) {
    std::vector<Vec2> pts{p1, p2, p3, p4};
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = i + 1; j < 4; ++j)
            if (distance(pts[i], pts[j]) < 1e-9)
                fail(ErrorCode::degenerate, "cross ratio requires four distinct points");
    LineEstimate line = fit_line_tls(pts);
    if (line.length < 1e-9) fail(ErrorCode::degenerate, "zero span in cross ratio");
    for (const Vec2& p : pts)
        if (std::abs(line.signed_distance(p)) > colinear_tol * line.length)
            fail(ErrorCode::validation, "points are not colinear within tolerance");
    double t[4];
    for (int i = 0; i < 4; ++i) t[i] = -line.b * pts[i].x + line.a * pts[i].y;
    return detail::cross_ratio_1d(t[0], t[1], t[2], t[3]);
}

struct TsResult {
    bool tested = false;    // n >= 4 and centroids pass the colinearity gate
    int n_instances = 0;
    std::vector<double> cross_ratios;  // one per window of 4 consecutive centroids
    double deviation = 0.0;            // median |cr - 4/3|, 0 when untested
    double threshold = 0.06;
    bool has_symmetry = false;         // tested && deviation <= threshold
};

// Translation-symmetry test over a pattern's instance centroids. Centroids
// are ordered along their principal axis; every window of four consecutive
// centroids contributes one cross ratio. The gate demands rms <= gate_rel *
// extent before the test is considered applicable.
inline TsResult detect_translation_symmetry(const RecurringPattern& rp, double threshold = 0.06,
                                            double gate_rel = 0.02) {
    TsResult res;
    res.threshold = threshold;
    res.n_instances = int(rp.instances.size());
    if (res.n_instances < 4) return res;

    std::vector<Vec2> pts;
    pts.reserve(rp.instances.size());
    for (const auto& inst : rp.instances) pts.push_back(inst.centroid);
    LineEstimate line = fit_line_tls(pts);
    if (line.length < 1e-9 || line.rms > gate_rel * line.length) return res;
    res.tested = true;

    std::vector<double> t(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) t[i] = -line.b * pts[i].x + line.a * pts[i].y;
    std::vector<std::size_t> order(pts.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
        if (t[l] != t[r]) return t[l] < t[r];
        if (pts[l].x != pts[r].x) return pts[l].x < pts[r].x;
        return pts[l].y < pts[r].y;
    });

    std::vector<double> devs;
    for (std::size_t i = 0; i + 3 < order.size(); ++i) {
        double cr = detail::cross_ratio_1d(t[order[i]], t[order[i + 1]], t[order[i + 2]],
                                           t[order[i + 3]]);
        res.cross_ratios.push_back(cr);
        devs.push_back(std::abs(cr - kUniformCrossRatio));
    }
    res.deviation = detail::median(devs);
    res.has_symmetry = res.deviation <= threshold;
    return res;
}

}  // namespace rescu

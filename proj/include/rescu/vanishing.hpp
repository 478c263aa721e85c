#pragma once

// Vanishing-point estimation from RP row lines: RANSAC over line pairs with
// an angular constraint (near-parallel pairs are never sampled, since their
// intersection is numerically wild and systematically wrong under noise),
// followed by a least-squares refit over the consensus set.

#include <array>
#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

#include "rescu/error.hpp"
#include "rescu/geom.hpp"
#include "rescu/lines.hpp"

namespace rescu {

struct RansacConfig {
    double angular_constraint_deg = 10.0;  // pairs meeting below this angle never seed
    double inlier_px = 2.0;                // point-to-line distance accepted as consensus
    int iterations = 1000;
    int min_lines = 3;  // minimum input lines and minimum consensus size
    unsigned seed = 0;
    double focal = 0.0;  // nominal focal for the direction; 0 = (W + H) / 4
};

struct VanishingPoint {
    Vec2 point;                          // image-plane location
    std::array<double, 3> direction{};   // unit 3D ray through the camera center
    double focal = 0.0;                  // nominal focal used for the direction
    std::vector<int> inliers;            // indices into the input line list
};

// Unit 3D direction of the ray toward image point `p` under a nominal pinhole
// with principal point at the image center.
inline std::array<double, 3> vp_to_vector(Vec2 p, int width, int height, double focal = 0.0) {
    double f = focal > 0 ? focal : (width + height) / 4.0;
    double vx = p.x - width / 2.0;
    double vy = p.y - height / 2.0;
    double n = std::sqrt(vx * vx + vy * vy + f * f);
    return {vx / n, vy / n, f / n};
}

namespace detail {

inline double line_pair_angle_deg(const LineEstimate& l1, const LineEstimate& l2) {
    // directions are (-b, a); the angle between undirected lines is in [0, 90]
    double d = std::abs(l1.a * l2.a + l1.b * l2.b);
    d = std::min(1.0, d);
    return std::acos(d) * 180.0 / 3.14159265358979323846;
}

inline bool intersect(const LineEstimate& l1, const LineEstimate& l2, Vec2& out) {
    double x = l1.b * l2.c - l1.c * l2.b;
    double y = l1.c * l2.a - l1.a * l2.c;
    double w = l1.a * l2.b - l1.b * l2.a;
    if (std::abs(w) < 1e-12) return false;
    out = {x / w, y / w};
    return true;
}

inline std::vector<int> consensus(const std::vector<LineEstimate>& lines, Vec2 p, double tol) {
    std::vector<int> in;
    for (std::size_t i = 0; i < lines.size(); ++i)
        if (std::abs(lines[i].signed_distance(p)) <= tol) in.push_back(int(i));
    return in;
}

// Least-squares point minimizing the sum of squared line distances.
inline bool refit_point(const std::vector<LineEstimate>& lines, const std::vector<int>& subset,
                        Vec2& out) {
    double saa = 0, sab = 0, sbb = 0, sac = 0, sbc = 0;
    for (int i : subset) {
        const LineEstimate& l = lines[i];
        saa += l.a * l.a;
        sab += l.a * l.b;
        sbb += l.b * l.b;
        sac += l.a * l.c;
        sbc += l.b * l.c;
    }
    double det = saa * sbb - sab * sab;
    if (std::abs(det) < 1e-12) return false;
    out.x = (-sac * sbb + sbc * sab) / det;
    out.y = (-saa * sbc + sab * sac) / det;
    return true;
}

}  // namespace detail

// Seeded RANSAC. The run is fully deterministic for a given seed: candidates
// are drawn sequentially, the best one is the earliest with the largest
// consensus, and the refit is only adopted when it keeps or grows the
// consensus (so the reported support never shrinks below the sampled best).
inline VanishingPoint ransac_vp(const std::vector<LineEstimate>& lines, int width, int height,
                                const RansacConfig& cfg = {}) {
    if (int(lines.size()) < cfg.min_lines)
        fail(ErrorCode::insufficient, "vanishing point estimation needs at least " +
                                          std::to_string(cfg.min_lines) + " lines");
    std::mt19937 rng(cfg.seed);
    std::uniform_int_distribution<std::size_t> pick(0, lines.size() - 1);

    std::size_t best_count = 0;
    Vec2 best_point;
    for (int it = 0; it < cfg.iterations; ++it) {
        std::size_t i = pick(rng);
        std::size_t j = pick(rng);
        if (i == j) continue;
        if (detail::line_pair_angle_deg(lines[i], lines[j]) < cfg.angular_constraint_deg)
            continue;  // angular constraint: this pair can never seed a candidate
        Vec2 p;
        if (!detail::intersect(lines[i], lines[j], p)) continue;
        std::size_t count = detail::consensus(lines, p, cfg.inlier_px).size();
        if (count > best_count) {
            best_count = count;
            best_point = p;
        }
    }
    if (int(best_count) < cfg.min_lines)
        fail(ErrorCode::no_consensus, "no vanishing point reached the minimum consensus");

    std::vector<int> inliers = detail::consensus(lines, best_point, cfg.inlier_px);
    Vec2 refined;
    if (detail::refit_point(lines, inliers, refined)) {
        std::vector<int> refined_in = detail::consensus(lines, refined, cfg.inlier_px);
        if (refined_in.size() >= inliers.size()) {
            best_point = refined;
            inliers = std::move(refined_in);
        }
    }

    VanishingPoint vp;
    vp.point = best_point;
    vp.focal = cfg.focal > 0 ? cfg.focal : (width + height) / 4.0;
    vp.direction = vp_to_vector(best_point, width, height, cfg.focal);
    vp.inliers = std::move(inliers);
    return vp;
}

}  // namespace rescu

#pragma once

// Single-axis projective rectification: the minimal homography that sends
// the pattern's vanishing point to infinity while fixing the image center.
// In center-origin coordinates H = [I 0; l 1] with l = -v / |v|^2, v being
// the centered vanishing point; the warped view is affine along the pattern
// axis, so consecutive instances become equally spaced.

#include <algorithm>
#include <array>
#include <cmath>

#include <Eigen/Dense>

#include "rescu/error.hpp"
#include "rescu/image.hpp"
#include "rescu/types.hpp"
#include "rescu/vanishing.hpp"

namespace rescu {

using Homography = std::array<double, 9>;  // row-major 3x3, input -> output

inline Vec2 apply_homography(const Homography& h, Vec2 p) {
    double w = h[6] * p.x + h[7] * p.y + h[8];
    if (std::abs(w) < 1e-12) fail(ErrorCode::degenerate, "point maps to infinity");
    return {(h[0] * p.x + h[1] * p.y + h[2]) / w, (h[3] * p.x + h[4] * p.y + h[5]) / w};
}

struct RectifyResult {
    Raster image;
    Homography homography{};  // maps source pixels to rectified pixels
};

struct RectifyConfig {
    int max_side = 4096;  // output raster cap; larger warps are scaled down
    double pad = 8.0;     // border around the warped instance union, px
};

// Rectifies the region spanned by `rp`'s instances using `vp`. Errors:
// `degenerate` when the vanishing point lies inside the pattern's instance
// union (the warp would fold there).
inline RectifyResult rectify_rp(const Raster& img, const RecurringPattern& rp,
                                const VanishingPoint& vp, const RectifyConfig& cfg = {}) {
    if (img.empty()) fail(ErrorCode::validation, "empty raster");
    if (rp.instances.empty()) fail(ErrorCode::validation, "pattern has no instances");

    Box span;
    bool first = true;
    for (const auto& inst : rp.instances) {
        span = first ? inst.bbox : box_union(span, inst.bbox);
        first = false;
    }
    if (span.contains(vp.point))
        fail(ErrorCode::degenerate, "vanishing point lies inside the pattern region");

    const double cx = img.width / 2.0, cy = img.height / 2.0;
    const double vx = vp.point.x - cx, vy = vp.point.y - cy;
    const double v2 = vx * vx + vy * vy;
    if (v2 < 1e-9) fail(ErrorCode::degenerate, "vanishing point coincides with the image center");

    // H = T(c) * [I 0; l 1] * T(-c), l = -v/|v|^2; fixes the center exactly.
    Eigen::Matrix3d Hc = Eigen::Matrix3d::Identity();
    Hc(2, 0) = -vx / v2;
    Hc(2, 1) = -vy / v2;
    Eigen::Matrix3d Tc = Eigen::Matrix3d::Identity(), Tc_inv = Eigen::Matrix3d::Identity();
    Tc(0, 2) = -cx;
    Tc(1, 2) = -cy;
    Tc_inv(0, 2) = cx;
    Tc_inv(1, 2) = cy;
    Eigen::Matrix3d H = Tc_inv * Hc * Tc;

    // Warp the padded instance union and fit the output raster around it.
    Box padded{span.x0 - cfg.pad, span.y0 - cfg.pad, span.x1 + cfg.pad, span.y1 + cfg.pad};
    auto warp = [&](double x, double y) {
        Eigen::Vector3d q = H * Eigen::Vector3d(x, y, 1.0);
        if (std::abs(q.z()) < 1e-12)
            fail(ErrorCode::degenerate, "pattern region touches the warp horizon");
        return Vec2{q.x() / q.z(), q.y() / q.z()};
    };
    Vec2 corners[4] = {warp(padded.x0, padded.y0), warp(padded.x1, padded.y0),
                       warp(padded.x1, padded.y1), warp(padded.x0, padded.y1)};
    Box out{corners[0].x, corners[0].y, corners[0].x, corners[0].y};
    for (const Vec2& c : corners) {
        out.x0 = std::min(out.x0, c.x);
        out.y0 = std::min(out.y0, c.y);
        out.x1 = std::max(out.x1, c.x);
        out.y1 = std::max(out.y1, c.y);
    }

    double scale = 1.0;
    double side = std::max(out.width(), out.height());
    if (side > cfg.max_side) scale = cfg.max_side / side;
    int ow = std::max(1, int(std::ceil(out.width() * scale)));
    int oh = std::max(1, int(std::ceil(out.height() * scale)));

    Eigen::Matrix3d S = Eigen::Matrix3d::Identity();
    S(0, 0) = S(1, 1) = scale;
    S(0, 2) = -out.x0 * scale;
    S(1, 2) = -out.y0 * scale;
    Eigen::Matrix3d Hfull = S * H;
    Eigen::Matrix3d Hinv = Hfull.inverse();

    Raster dst = Raster::make(ow, oh, img.channels, 0);
    for (int y = 0; y < oh; ++y) {
        for (int x = 0; x < ow; ++x) {
            Eigen::Vector3d q = Hinv * Eigen::Vector3d(x + 0.5, y + 0.5, 1.0);
            if (std::abs(q.z()) < 1e-12) continue;
            double sx = q.x() / q.z() - 0.5, sy = q.y() / q.z() - 0.5;
            int x0 = int(std::floor(sx)), y0 = int(std::floor(sy));
            if (x0 < 0 || y0 < 0 || x0 + 1 >= img.width || y0 + 1 >= img.height) continue;
            double fx = sx - x0, fy = sy - y0;
            for (int c = 0; c < img.channels; ++c) {
                double v = (1 - fx) * (1 - fy) * img.at(x0, y0, c) +
                           fx * (1 - fy) * img.at(x0 + 1, y0, c) +
                           (1 - fx) * fy * img.at(x0, y0 + 1, c) +
                           fx * fy * img.at(x0 + 1, y0 + 1, c);
                dst.at(x, y, c) = std::uint8_t(std::clamp(v + 0.5, 0.0, 255.0));
            }
        }
    }

    RectifyResult res;
    res.image = std::move(dst);
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) res.homography[r * 3 + c] = Hfull(r, c);
    return res;
}

}  // namespace rescu

#pragma once

// Diagnostic overlay: instance boxes per pattern, fitted word lines, and the
// vanishing point drawn onto an RGB copy of the input image.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "rescu/image.hpp"
#include "rescu/lines.hpp"
#include "rescu/types.hpp"

namespace rescu {

namespace detail {

using Rgb = std::array<std::uint8_t, 3>;

inline Rgb palette_color(int idx) {
    static const Rgb palette[] = {{230, 60, 50},  {40, 130, 220}, {50, 180, 90},
                                  {240, 170, 30}, {160, 70, 200}, {30, 190, 190},
                                  {220, 100, 170}, {130, 130, 40}};
    return palette[std::size_t(idx) % std::size(palette)];
}

inline void put_px(Raster& img, int x, int y, const Rgb& c) {
    if (x < 0 || y < 0 || x >= img.width || y >= img.height) return;
    img.at(x, y, 0) = c[0];
    img.at(x, y, 1) = c[1];
    img.at(x, y, 2) = c[2];
}

inline void draw_segment(Raster& img, Vec2 p0, Vec2 p1, const Rgb& c) {
    int x0 = int(std::lround(p0.x)), y0 = int(std::lround(p0.y));
    int x1 = int(std::lround(p1.x)), y1 = int(std::lround(p1.y));
    int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
    int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    for (;;) {
        put_px(img, x0, y0, c);
        if (x0 == x1 && y0 == y1) break;
        int e2 = 2 * err;
        if (e2 >= dy) { err += dy; x0 += sx; }
        if (e2 <= dx) { err += dx; y0 += sy; }
    }
}

inline void draw_rect(Raster& img, const Box& b, const Rgb& c) {
    Vec2 tl{b.x0, b.y0}, tr{b.x1, b.y0}, br{b.x1, b.y1}, bl{b.x0, b.y1};
    draw_segment(img, tl, tr, c);
    draw_segment(img, tr, br, c);
    draw_segment(img, br, bl, c);
    draw_segment(img, bl, tl, c);
}

// Clips line ax + by + c = 0 to the image frame; false when it misses.
inline bool clip_line_to_frame(const LineEstimate& ln, int w, int h, Vec2& p0, Vec2& p1) {
    std::vector<Vec2> hits;
    auto consider = [&](double x, double y) {
        if (x < -0.5 || y < -0.5 || x > w - 0.5 || y > h - 0.5) return;
        for (const Vec2& q : hits)
            if (std::abs(q.x - x) < 1e-6 && std::abs(q.y - y) < 1e-6) return;
        hits.push_back({x, y});
    };
    if (std::abs(ln.b) > 1e-12) {
        consider(0, -(ln.c + ln.a * 0) / ln.b);
        consider(w - 1.0, -(ln.c + ln.a * (w - 1.0)) / ln.b);
    }
    if (std::abs(ln.a) > 1e-12) {
        consider(-(ln.c + ln.b * 0) / ln.a, 0);
        consider(-(ln.c + ln.b * (h - 1.0)) / ln.a, h - 1.0);
    }
    if (hits.size() < 2) return false;
    p0 = hits[0];
    p1 = hits[1];
    return true;
}

inline void draw_cross(Raster& img, Vec2 p, int arm, const Rgb& c) {
    draw_segment(img, {p.x - arm, p.y}, {p.x + arm, p.y}, c);
    draw_segment(img, {p.x, p.y - arm}, {p.x, p.y + arm}, c);
}

}  // namespace detail

// Returns a 3-channel copy of `base` with one color per pattern. Lines and
// the vanishing point are optional extras from the geometry stages.
inline Raster render_overlay(const Raster& base, const std::vector<RecurringPattern>& rps,
                             const std::vector<LineEstimate>& lines = {},
                             const std::optional<Vec2>& vp = std::nullopt) {
    Raster out = Raster::make(base.width, base.height, 3);
    for (int y = 0; y < base.height; ++y) {
        for (int x = 0; x < base.width; ++x) {
            for (int c = 0; c < 3; ++c)
                out.at(x, y, c) = base.at(x, y, base.channels == 3 ? c : 0);
        }
    }
    for (const RecurringPattern& rp : rps) {
        detail::Rgb color = detail::palette_color(rp.id);
        for (const InstanceRegion& inst : rp.instances) detail::draw_rect(out, inst.bbox, color);
    }
    const detail::Rgb line_color{250, 250, 60};
    for (const LineEstimate& ln : lines) {
        Vec2 p0, p1;
        if (detail::clip_line_to_frame(ln, out.width, out.height, p0, p1))
            detail::draw_segment(out, p0, p1, line_color);
    }
    if (vp) {
        const detail::Rgb vp_color{255, 40, 255};
        if (vp->x >= 0 && vp->y >= 0 && vp->x < out.width && vp->y < out.height) {
            detail::draw_cross(out, *vp, 6, vp_color);
        } else {
            // off-frame: arrow at the nearest frame edge pointing toward it
            Vec2 tip{std::clamp(vp->x, 1.0, out.width - 2.0),
                     std::clamp(vp->y, 1.0, out.height - 2.0)};
            Vec2 center{out.width / 2.0, out.height / 2.0};
            Vec2 dir = *vp - center;
            double n = norm(dir);
            if (n > 1e-9) {
                dir = {dir.x / n, dir.y / n};
                Vec2 tail{tip.x - 18 * dir.x, tip.y - 18 * dir.y};
                detail::draw_segment(out, tail, tip, vp_color);
                Vec2 left{tip.x - 7 * dir.x + 4 * dir.y, tip.y - 7 * dir.y - 4 * dir.x};
                Vec2 right{tip.x - 7 * dir.x - 4 * dir.y, tip.y - 7 * dir.y + 4 * dir.x};
                detail::draw_segment(out, left, tip, vp_color);
                detail::draw_segment(out, right, tip, vp_color);
            } else {
                detail::draw_cross(out, tip, 4, vp_color);
            }
        }
    }
    return out;
}

}  // namespace rescu

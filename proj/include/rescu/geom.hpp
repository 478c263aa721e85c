#pragma once

// Small 2D geometry primitives shared across the library: points, axis-aligned
// boxes, polygon area/clipping, and exact union-of-boxes measures.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace rescu {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }

// Axis-aligned box, half-open semantics are not used: [x0,x1] x [y0,y1].
struct Box {
    double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;

    double width() const { return std::max(0.0, x1 - x0); }
    double height() const { return std::max(0.0, y1 - y0); }
    double area() const { return width() * height(); }
    bool empty() const { return x1 <= x0 || y1 <= y0; }
    bool contains(Vec2 p) const {
        return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1;
    }
};

inline Box box_union(Box a, Box b) {
    if (a.empty()) return b;
    if (b.empty()) return a;
    return {std::min(a.x0, b.x0), std::min(a.y0, b.y0),
            std::max(a.x1, b.x1), std::max(a.y1, b.y1)};
}

inline Box box_intersection(Box a, Box b) {
    Box r{std::max(a.x0, b.x0), std::max(a.y0, b.y0),
          std::min(a.x1, b.x1), std::min(a.y1, b.y1)};
    if (r.x1 < r.x0) r.x1 = r.x0;
    if (r.y1 < r.y0) r.y1 = r.y0;
    return r;
}

using Polygon = std::vector<Vec2>;  // vertices in order, implicitly closed

// Shoelace area, orientation-independent.
inline double polygon_area(const Polygon& poly) {
    if (poly.size() < 3) return 0.0;
    double s = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Vec2& a = poly[i];
        const Vec2& b = poly[(i + 1) % poly.size()];
        s += cross(a, b);
    }
    return std::abs(s) * 0.5;
}

inline Polygon box_polygon(Box b) {
    return {{b.x0, b.y0}, {b.x1, b.y0}, {b.x1, b.y1}, {b.x0, b.y1}};
}

inline bool polygon_is_convex(const Polygon& poly) {
    if (poly.size() < 3) return false;
    int sign = 0;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        double c = cross(poly[(i + 1) % n] - poly[i], poly[(i + 2) % n] - poly[(i + 1) % n]);
        if (std::abs(c) < 1e-12) continue;  // ignore colinear runs
        int s = c > 0 ? 1 : -1;
        if (sign == 0) sign = s;
        else if (s != sign) return false;
    }
    return true;
}

// Sutherland-Hodgman: clip `subject` (any simple polygon) against a convex
// `clip` polygon. The caller guarantees convexity of `clip`.
inline Polygon clip_polygon_convex(const Polygon& subject, const Polygon& clip) {
    if (subject.empty() || clip.size() < 3) return {};
    // Ensure counter-clockwise clip orientation so "inside" is a fixed side.
    Polygon cl = clip;
    double s = 0.0;
    for (std::size_t i = 0; i < cl.size(); ++i)
        s += cross(cl[i], cl[(i + 1) % cl.size()]);
    if (s < 0) std::reverse(cl.begin(), cl.end());

    Polygon out = subject;
    for (std::size_t i = 0; i < cl.size() && !out.empty(); ++i) {
        Vec2 a = cl[i];
        Vec2 b = cl[(i + 1) % cl.size()];
        Vec2 edge = b - a;
        Polygon in;
        in.swap(out);
        for (std::size_t j = 0; j < in.size(); ++j) {
            Vec2 p = in[j];
            Vec2 q = in[(j + 1) % in.size()];
            double dp = cross(edge, p - a);
            double dq = cross(edge, q - a);
            bool pin = dp >= 0.0;
            bool qin = dq >= 0.0;
            if (pin) out.push_back(p);
            if (pin != qin) {
                double t = dp / (dp - dq);
                out.push_back(p + t * (q - p));
            }
        }
    }
    return out;
}

// Exact area of a union of boxes via coordinate compression. O(n^2) cells,
// fine for the handful of instance boxes an RP carries.
inline double boxes_union_area(const std::vector<Box>& boxes) {
    std::vector<double> xs, ys;
    for (const Box& b : boxes) {
        if (b.empty()) continue;
        xs.push_back(b.x0); xs.push_back(b.x1);
        ys.push_back(b.y0); ys.push_back(b.y1);
    }
    if (xs.empty()) return 0.0;
    std::sort(xs.begin(), xs.end()); xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    std::sort(ys.begin(), ys.end()); ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        for (std::size_t j = 0; j + 1 < ys.size(); ++j) {
            double cx = 0.5 * (xs[i] + xs[i + 1]);
            double cy = 0.5 * (ys[j] + ys[j + 1]);
            for (const Box& b : boxes) {
                if (!b.empty() && b.contains({cx, cy})) {
                    total += (xs[i + 1] - xs[i]) * (ys[j + 1] - ys[j]);
                    break;
                }
            }
        }
    }
    return total;
}

// Area of (union of A) ∩ (union of B): the pairwise box intersections cover
// exactly that set, so their union area is the answer.
inline double boxes_intersection_area(const std::vector<Box>& a, const std::vector<Box>& b) {
    std::vector<Box> pieces;
    for (const Box& ba : a)
        for (const Box& bb : b) {
            Box c = box_intersection(ba, bb);
            if (!c.empty()) pieces.push_back(c);
        }
    return boxes_union_area(pieces);
}

// Area of (union of `boxes`) clipped to `region`, same compression scheme.
inline double boxes_union_intersection_area(const std::vector<Box>& boxes, Box region) {
    std::vector<Box> clipped;
    clipped.reserve(boxes.size());
    for (const Box& b : boxes) {
        Box c = box_intersection(b, region);
        if (!c.empty()) clipped.push_back(c);
    }
    return boxes_union_area(clipped);
}

}  // namespace rescu

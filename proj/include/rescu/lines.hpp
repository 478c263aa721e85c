#pragma once

// Total-least-squares line fitting over the feature positions of RP rows.
// Each visual-word row of a pattern traces one implicit scene line (the same
// part of every instance), so a pattern with three or more well-filled rows
// yields a pencil of lines meeting near the vanishing point.

#include <cmath>
#include <cstddef>
#include <vector>

#include "rescu/error.hpp"
#include "rescu/types.hpp"

namespace rescu {

// Line a*x + b*y + c = 0 with a^2 + b^2 = 1.
struct LineEstimate {
    double a = 0.0, b = 0.0, c = 0.0;
    double rms = 0.0;     // root-mean-square perpendicular residual
    double length = 0.0;  // extent of the support along the line
    int n = 0;            // supporting point count
    int word_id = -1;     // originating RP row, -1 for free-standing fits

    double signed_distance(Vec2 p) const { return a * p.x + b * p.y + c; }
};

// Orthogonal regression through the second-moment matrix; the line normal is
// the eigenvector of the smaller eigenvalue. Throws `degenerate` when all
// points coincide.
inline LineEstimate fit_line_tls(const std::vector<Vec2>& pts) {
    if (pts.size() < 2) fail(ErrorCode::insufficient, "line fit needs at least 2 points");
    double cx = 0, cy = 0;
    for (const Vec2& p : pts) {
        cx += p.x;
        cy += p.y;
    }
    cx /= double(pts.size());
    cy /= double(pts.size());
    double sxx = 0, sxy = 0, syy = 0;
    for (const Vec2& p : pts) {
        double dx = p.x - cx, dy = p.y - cy;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx + syy < 1e-18) fail(ErrorCode::degenerate, "all points coincide");

    double tr = sxx + syy;
    double det = sxx * syy - sxy * sxy;
    double lmin = 0.5 * tr - std::sqrt(std::max(0.0, 0.25 * tr * tr - det));
    // (sxx - lmin, sxy) and (sxy, syy - lmin) both span the direction; take
    // the better-conditioned one for the normal.
    double nx, ny;
    if (std::abs(sxx - lmin) + std::abs(sxy) >= std::abs(syy - lmin) + std::abs(sxy)) {
        nx = sxy;
        ny = lmin - sxx;
    } else {
        nx = lmin - syy;
        ny = sxy;
    }
    double nn = std::hypot(nx, ny);
    if (nn < 1e-15) {  // isotropic scatter: direction is arbitrary, pick x axis
        nx = 0.0;
        ny = 1.0;
        nn = 1.0;
    }
    LineEstimate line;
    line.a = nx / nn;
    line.b = ny / nn;
    line.c = -(line.a * cx + line.b * cy);
    line.n = int(pts.size());
    double ss = 0.0;
    double tmin = 0.0, tmax = 0.0;
    bool first = true;
    for (const Vec2& p : pts) {
        double d = line.signed_distance(p);
        ss += d * d;
        double t = -line.b * p.x + line.a * p.y;  // coordinate along the line
        if (first) {
            tmin = tmax = t;
            first = false;
        } else {
            tmin = std::min(tmin, t);
            tmax = std::max(tmax, t);
        }
    }
    line.rms = std::sqrt(ss / double(pts.size()));
    line.length = tmax - tmin;
    return line;
}

// Fits the positions of one RP row. Rows with fewer than 3 filled cells do
// not determine a useful scene line.
inline LineEstimate fit_line_to_word(const FeatureSet& fs, const RpMatrix& m, std::size_t row) {
    if (row >= m.rows()) fail(ErrorCode::validation, "row index out of range");
    auto idx = fs.id_index();
    std::vector<Vec2> pts;
    for (std::size_t c = 0; c < m.cols(); ++c) {
        int id = m.columns[c][row];
        if (id < 0) continue;
        auto it = idx.find(id);
        if (it == idx.end()) fail(ErrorCode::validation, "matrix references unknown feature");
        pts.push_back({fs.features[it->second].x, fs.features[it->second].y});
    }
    if (pts.size() < 3) fail(ErrorCode::insufficient, "row has fewer than 3 filled cells");
    LineEstimate line = fit_line_tls(pts);
    line.word_id = m.word_ids[row];
    return line;
}

// All usable row lines of a pattern. A row passes when it has >= 3 filled
// cells and its fit is straight enough: rms <= gate_rel * support length.
inline std::vector<LineEstimate> lines_from_rp(const FeatureSet& fs, const RpMatrix& m,
                                               double gate_rel = 0.02) {
    std::vector<LineEstimate> lines;
    for (std::size_t r = 0; r < m.rows(); ++r) {
        int filled = 0;
        for (std::size_t c = 0; c < m.cols(); ++c)
            if (m.columns[c][r] >= 0) ++filled;
        if (filled < 3) continue;
        LineEstimate line = fit_line_to_word(fs, m, r);
        if (line.length > 0 && line.rms <= gate_rel * line.length) lines.push_back(line);
    }
    return lines;
}

}  // namespace rescu

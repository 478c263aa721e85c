#pragma once

// Synthetic fixtures with exact ground truth: a planar template replicated
// along a plane row or grid, viewed frontally or under a perspective camera.
// Every instance carries the same marker keypoints, so the generator knows
// the true features, instance regions, vanishing point (image of the plane
// row direction), and whether the 3D spacing is uniform.

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <vector>

#include "rescu/geom.hpp"
#include "rescu/image.hpp"
#include "rescu/types.hpp"

namespace rescu {

struct SceneSpec {
    int width = 640;
    int height = 480;
    int rows = 1;                  // instance grid rows on the plane
    int cols = 6;                  // instances per row
    double spacing = 64.0;         // plane-unit gap between instance origins
    std::vector<double> spacings;  // per-gap override (cols-1 entries)
    double row_spacing = 72.0;
    int motif = 0;           // marker arrangement: 0/1 compact squares, 2 tall tower
    bool perspective = false;
    double tilt = 0.5;       // plane recession angle, radians
    double depth = 300.0;    // camera-space depth of the plane origin
    double noise_px = 0.0;   // jitter applied to emitted feature positions
    unsigned seed = 0;
    int descriptor_dim = 16;
};

struct Scene {
    Raster image;
    FeatureSet features;  // exact (optionally jittered) keypoint projections
    GroundTruth gt;
    std::optional<Vec2> vp;  // image of the row direction; absent when frontal
    bool ts_uniform = true;
    int markers_per_instance = 0;
    int n_instances = 0;
};

namespace detail {

struct Marker {
    double u, v;   // template-local position, plane units
    double scale;  // keypoint scale at unit magnification
    double theta;  // canonical orientation
    int shape;     // 0 disk, 1 big disk, 2 ring, 3 square, 4 inverse disk, 5 diamond
};

struct Motif {
    double w, h;  // template extent, plane units
    std::vector<Marker> markers;
};

inline const Motif& motif_def(int motif) {
    static const Motif m0{48, 48, {{12, 10, 1.6, 0.3, 0},
                                   {36, 12, 2.4, 1.1, 1},
                                   {11, 26, 2.0, 2.0, 2},
                                   {34, 34, 1.8, 0.7, 3},
                                   {16, 40, 1.7, 1.5, 4}}};
    static const Motif m1{48, 48, {{14, 12, 2.2, 0.9, 1},
                                   {34, 10, 1.7, 1.8, 3},
                                   {12, 30, 1.6, 0.2, 5},
                                   {32, 26, 2.0, 1.2, 0},
                                   {24, 40, 1.9, 2.4, 2}}};
    // Tall narrow strip: word lines fan widely around the vanishing point,
    // which conditions VP estimation well.
    static const Motif m2{48, 420, {{24, 12, 1.8, 0.4, 0},
                                    {16, 92, 2.0, 1.1, 1},
                                    {32, 172, 1.7, 2.1, 2},
                                    {18, 252, 1.9, 0.8, 3},
                                    {30, 330, 1.6, 1.6, 5},
                                    {24, 406, 1.8, 2.6, 4}}};
    switch (motif) {
        case 0: return m0;
        case 1: return m1;
        default: return m2;
    }
}

inline void draw_coverage(Raster& img, double cx, double cy, double r_out, double r_in,
                          int shape, double fg) {
    int x0 = std::max(0, int(std::floor(cx - r_out - 2)));
    int x1 = std::min(img.width - 1, int(std::ceil(cx + r_out + 2)));
    int y0 = std::max(0, int(std::floor(cy - r_out - 2)));
    int y1 = std::min(img.height - 1, int(std::ceil(cy + r_out + 2)));
    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            double dx = x + 0.5 - cx, dy = y + 0.5 - cy;
            double d;
            switch (shape) {
                case 3: d = std::max(std::abs(dx), std::abs(dy)) - r_out; break;    // square
                case 5: d = (std::abs(dx) + std::abs(dy)) * 0.7071 - r_out; break;  // diamond
                default: d = std::hypot(dx, dy) - r_out; break;                     // round
            }
            if (r_in > 0) d = std::max(d, r_in - std::hypot(dx, dy));  // ring hole
            double a = std::clamp(0.5 - d, 0.0, 1.0);                  // 1px soft edge
            if (a <= 0) continue;
            double bg = img.at(x, y);
            img.at(x, y) = std::uint8_t(std::clamp(bg * (1 - a) + fg * a + 0.5, 0.0, 255.0));
        }
    }
}

inline void draw_marker(Raster& img, int shape, double cx, double cy, double mag, double base_r) {
    double r = base_r * mag;
    switch (shape) {
        case 0: draw_coverage(img, cx, cy, 2.6 * r, 0, 0, 40); break;
        case 1: draw_coverage(img, cx, cy, 3.4 * r, 0, 0, 25); break;
        case 2: draw_coverage(img, cx, cy, 3.2 * r, 1.6 * r, 0, 45); break;
        case 3: draw_coverage(img, cx, cy, 2.6 * r, 0, 3, 35); break;
        case 4:
            draw_coverage(img, cx, cy, 3.6 * r, 0, 3, 30);  // dark plate
            draw_coverage(img, cx, cy, 1.7 * r, 0, 0, 235); // bright core
            break;
        default: draw_coverage(img, cx, cy, 2.8 * r, 0, 5, 50); break;
    }
}

}  // namespace detail

// Renders the scene and returns exact ground truth alongside. Throws
// `validation` if the configured geometry pushes any keypoint or instance
// region outside the canvas (presets are tuned to fit).
inline Scene render_scene(const SceneSpec& spec) {
    if (spec.cols < 1 || spec.rows < 1) fail(ErrorCode::validation, "scene needs instances");
    if (!spec.spacings.empty() && int(spec.spacings.size()) != spec.cols - 1)
        fail(ErrorCode::validation, "spacings must have cols-1 entries");

    const double f = (spec.width + spec.height) / 4.0;
    const double cx = spec.width / 2.0, cy = spec.height / 2.0;
    const auto& motif = detail::motif_def(spec.motif);

    // instance origins in plane units
    std::vector<double> us(spec.cols, 0.0);
    for (int c = 1; c < spec.cols; ++c)
        us[c] = us[c - 1] + (spec.spacings.empty() ? spec.spacing : spec.spacings[c - 1]);
    bool uniform = true;
    for (int c = 2; c < spec.cols; ++c)
        if (std::abs((us[c] - us[c - 1]) - (us[1] - us[0])) > 1e-9) uniform = false;

    const double ca = std::cos(spec.perspective ? spec.tilt : 0.0);
    const double sa = std::sin(spec.perspective ? spec.tilt : 0.0);
    // plane frame in camera space: U recedes in X-Z, V is image-vertical
    auto point3 = [&](double ox, double oy, double u, double v) {
        return std::array<double, 3>{ox + u * ca, oy + v, spec.depth + u * sa};
    };
    auto project = [&](const std::array<double, 3>& P) {
        return Vec2{cx + f * P[0] / P[2], cy + f * P[1] / P[2]};
    };

    // center the pattern: the plane midpoint projects onto the image center
    double u_mid = 0.5 * (us.front() + us.back() + motif.w);
    double v_mid = 0.5 * ((spec.rows - 1) * spec.row_spacing + motif.h);
    auto mid = point3(0, 0, u_mid, v_mid);
    const double ox = -mid[0];
    const double oy = -mid[1];

    std::mt19937 rng(spec.seed);
    std::normal_distribution<double> jitter(0.0, spec.noise_px > 0 ? spec.noise_px : 1.0);
    std::uniform_real_distribution<double> dwiggle(-0.02, 0.02);

    Scene scene;
    scene.image = Raster::make(spec.width, spec.height, 1, 215);
    scene.features.width = spec.width;
    scene.features.height = spec.height;
    scene.features.descriptor_dim = spec.descriptor_dim;
    scene.gt.width = spec.width;
    scene.gt.height = spec.height;
    scene.ts_uniform = uniform;
    scene.markers_per_instance = int(motif.markers.size());
    scene.n_instances = spec.rows * spec.cols;

    if (spec.perspective) {
        scene.vp = Vec2{cx + f * ca / sa, cy};  // image of the row direction
        scene.gt.vp_point = scene.vp;
    }
    scene.gt.ts_uniform = scene.ts_uniform;

    GtRp gt_rp;
    gt_rp.id = 0;
    int next_id = 0;
    for (int gr = 0; gr < spec.rows; ++gr) {
        for (int c = 0; c < spec.cols; ++c) {
            double u0 = us[c], v0 = gr * spec.row_spacing;
            Vec2 q[4] = {project(point3(ox, oy, u0, v0)),
                         project(point3(ox, oy, u0 + motif.w, v0)),
                         project(point3(ox, oy, u0 + motif.w, v0 + motif.h)),
                         project(point3(ox, oy, u0, v0 + motif.h))};
            Box gbox{q[0].x, q[0].y, q[0].x, q[0].y};
            for (const Vec2& p : q) {
                gbox.x0 = std::min(gbox.x0, p.x);
                gbox.y0 = std::min(gbox.y0, p.y);
                gbox.x1 = std::max(gbox.x1, p.x);
                gbox.y1 = std::max(gbox.y1, p.y);
            }
            if (gbox.x0 < 0 || gbox.y0 < 0 || gbox.x1 > spec.width || gbox.y1 > spec.height)
                fail(ErrorCode::validation, "scene geometry leaves the canvas");
            GtInstance gi;
            gi.id = int(gt_rp.instances.size());
            gi.box = gbox;
            gt_rp.instances.push_back(gi);

            for (std::size_t k = 0; k < motif.markers.size(); ++k) {
                const auto& mk = motif.markers[k];
                auto P = point3(ox, oy, u0 + mk.u, v0 + mk.v);
                Vec2 p = project(P);
                // local magnification and orientation via the projection Jacobian
                double Z = P[2];
                double j00 = f / Z * (ca - P[0] * sa / Z);   // d(px)/du
                double j10 = f / Z * (0.0 - P[1] * sa / Z);  // d(py)/du
                double j01 = 0.0;                            // d(px)/dv
                double j11 = f / Z;                          // d(py)/dv
                double mag = std::sqrt(std::abs(j00 * j11 - j01 * j10));
                double th = std::atan2(j10 * std::cos(mk.theta) + j11 * std::sin(mk.theta),
                                       j00 * std::cos(mk.theta) + j01 * std::sin(mk.theta));
                if (th < 0) th += kTwoPi;

                detail::draw_marker(scene.image, mk.shape, p.x, p.y, mag, mk.scale);

                Feature feat;
                feat.id = next_id++;
                feat.x = p.x + (spec.noise_px > 0 ? jitter(rng) : 0.0);
                feat.y = p.y + (spec.noise_px > 0 ? jitter(rng) : 0.0);
                feat.scale = mk.scale * mag;
                feat.orientation = th;
                feat.response = 1.0;
                feat.descriptor.assign(spec.descriptor_dim, 0.0f);
                std::size_t slot = (std::size_t(spec.motif) * motif.markers.size() + k) %
                                   std::size_t(spec.descriptor_dim);
                feat.descriptor[slot] = 1.0f;
                feat.descriptor[(slot + 7) % spec.descriptor_dim] = float(0.3 + dwiggle(rng));
                feat.x = std::clamp(feat.x, 0.0, spec.width - 1.0);
                feat.y = std::clamp(feat.y, 0.0, spec.height - 1.0);
                scene.features.features.push_back(std::move(feat));
            }
        }
    }
    scene.gt.rps.push_back(std::move(gt_rp));
    return scene;
}

// Ground-truth visual words for a single-motif scene: features are emitted
// instance-major, so word k holds ids {k, k + K, k + 2K, ...}.
inline VisualWordIndex gt_word_index(const Scene& scene) {
    const int K = scene.markers_per_instance;
    VisualWordIndex vw;
    vw.words.resize(K);
    for (const Feature& feat : scene.features.features) {
        int w = feat.id % K;
        vw.words[w].push_back(feat.id);
        vw.assignment[feat.id] = w;
    }
    return vw;
}

// Ground-truth RP matrix of a single-motif scene: rows = markers, columns =
// instances in generation order.
inline RpMatrix gt_matrix(const Scene& scene) {
    const int K = scene.markers_per_instance;
    RpMatrix m;
    for (int k = 0; k < K; ++k) m.word_ids.push_back(k);
    for (int c = 0; c < scene.n_instances; ++c) {
        std::vector<int> col(K);
        for (int k = 0; k < K; ++k) col[k] = c * K + k;
        m.columns.push_back(std::move(col));
    }
    return m;
}

// Two patterns in one frontal scene: motif 0 with count_a instances on the
// upper band, motif 1 with count_b on the lower band. The ground truth
// carries two patterns, so counting reports [count_a, count_b].
inline Scene render_two_motifs(int count_a, int count_b, unsigned seed, int width = 800,
                               int height = 480) {
    SceneSpec a;
    a.width = width;
    a.height = height;
    a.cols = count_a;
    a.rows = 1;
    a.motif = 0;
    a.seed = seed;
    a.spacing = 76;
    a.depth = 300;
    Scene sa = render_scene(a);

    SceneSpec b = a;
    b.cols = count_b;
    b.motif = 1;
    b.seed = seed + 1;
    b.spacing = 50;
    b.depth = 400;  // smaller render keeps a five-instance band inside the candidate radius
    Scene sb = render_scene(b);

    int shift_a = -height / 4, shift_b = height / 4;
    Scene out;
    out.image = Raster::make(width, height, 1, 215);
    out.features.width = width;
    out.features.height = height;
    out.features.descriptor_dim = sa.features.descriptor_dim;
    out.gt.width = width;
    out.gt.height = height;
    out.ts_uniform = true;
    out.markers_per_instance = sa.markers_per_instance;
    out.n_instances = sa.n_instances + sb.n_instances;

    auto blit = [&](const Scene& s, int dy) {
        for (int y = 0; y < height; ++y) {
            int sy = y - dy;
            if (sy < 0 || sy >= height) continue;
            for (int x = 0; x < width; ++x) {
                std::uint8_t v = s.image.at(x, sy);
                if (v != 215) out.image.at(x, y) = v;
            }
        }
    };
    blit(sa, shift_a);
    blit(sb, shift_b);

    int next_id = 0;
    auto merge = [&](Scene& s, int dy, int gt_id) {
        GtRp rp;
        rp.id = gt_id;
        for (auto& gi : s.gt.rps[0].instances) {
            gi.box.y0 += dy;
            gi.box.y1 += dy;
            rp.instances.push_back(gi);
        }
        out.gt.rps.push_back(std::move(rp));
        for (auto& feat : s.features.features) {
            feat.id = next_id++;
            feat.y = std::clamp(feat.y + dy, 0.0, double(height - 1));
            out.features.features.push_back(std::move(feat));
        }
    };
    merge(sa, shift_a, 0);
    merge(sb, shift_b, 1);
    return out;
}

}  // namespace rescu

#pragma once

// Built-in scale/orientation feature detector: difference-of-Gaussians
// extrema over a small pyramid, quadratic localization, one dominant
// gradient orientation per keypoint, and a 4x4x8 gradient-histogram
// descriptor. Deliberately minimal; any external detector can substitute by
// writing the same feature-set JSON.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "rescu/image.hpp"
#include "rescu/types.hpp"

namespace rescu {

struct DetectorConfig {
    int octaves = 3;
    int scales_per_octave = 3;
    double sigma0 = 1.6;               // base blur of the first pyramid level
    double contrast_threshold = 0.03;  // on |DoG| with intensities in [0, 1]
    double edge_ratio = 10.0;          // principal-curvature ratio gate
    int descriptor_grid = 4;           // spatial bins per side
    int descriptor_bins = 8;           // orientation bins per spatial cell
};

namespace detail {

struct FloatImage {
    int w = 0, h = 0;
    std::vector<float> v;
    float at(int x, int y) const { return v[std::size_t(y) * w + x]; }
    float& at(int x, int y) { return v[std::size_t(y) * w + x]; }
};

inline FloatImage gaussian_blur(const FloatImage& src, double sigma) {
    if (sigma < 1e-6) return src;
    int radius = std::max(1, int(std::ceil(3.0 * sigma)));
    std::vector<float> kernel(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        double g = std::exp(-0.5 * i * i / (sigma * sigma));
        kernel[i + radius] = float(g);
        sum += g;
    }
    for (float& k : kernel) k = float(k / sum);

    FloatImage tmp{src.w, src.h, std::vector<float>(src.v.size())};
    for (int y = 0; y < src.h; ++y)
        for (int x = 0; x < src.w; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i) {
                int xx = std::clamp(x + i, 0, src.w - 1);
                acc += kernel[i + radius] * src.at(xx, y);
            }
            tmp.at(x, y) = float(acc);
        }
    FloatImage dst{src.w, src.h, std::vector<float>(src.v.size())};
    for (int y = 0; y < src.h; ++y)
        for (int x = 0; x < src.w; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i) {
                int yy = std::clamp(y + i, 0, src.h - 1);
                acc += kernel[i + radius] * tmp.at(x, yy);
            }
            dst.at(x, y) = float(acc);
        }
    return dst;
}

inline FloatImage downsample(const FloatImage& src) {
    FloatImage dst{src.w / 2, src.h / 2, {}};
    dst.v.resize(std::size_t(dst.w) * dst.h);
    for (int y = 0; y < dst.h; ++y)
        for (int x = 0; x < dst.w; ++x) dst.at(x, y) = src.at(2 * x, 2 * y);
    return dst;
}

// One dominant orientation from a magnitude-weighted 36-bin gradient
// histogram with parabolic peak refinement; returns a value in [0, 2*pi).
inline double dominant_orientation(const FloatImage& img, double x, double y, double sigma) {
    constexpr int kBins = 36;
    double hist[kBins] = {};
    double win = 1.5 * sigma;
    int radius = std::max(1, int(std::round(3.0 * win)));
    int cx = int(std::round(x)), cy = int(std::round(y));
    for (int dy = -radius; dy <= radius; ++dy) {
        for (int dx = -radius; dx <= radius; ++dx) {
            int px = cx + dx, py = cy + dy;
            if (px < 1 || py < 1 || px >= img.w - 1 || py >= img.h - 1) continue;
            double gx = img.at(px + 1, py) - img.at(px - 1, py);
            double gy = img.at(px, py + 1) - img.at(px, py - 1);
            double mag = std::hypot(gx, gy);
            double ang = std::atan2(gy, gx);
            double wgt = std::exp(-0.5 * (dx * dx + dy * dy) / (win * win));
            int bin = int(std::floor((ang + 3.14159265358979323846) / kTwoPi * kBins)) % kBins;
            hist[(bin + kBins) % kBins] += mag * wgt;
        }
    }
    int peak = 0;
    for (int i = 1; i < kBins; ++i)
        if (hist[i] > hist[peak]) peak = i;
    double l = hist[(peak + kBins - 1) % kBins], c = hist[peak], r = hist[(peak + 1) % kBins];
    double denom = l - 2 * c + r;
    double off = std::abs(denom) > 1e-12 ? 0.5 * (l - r) / denom : 0.0;
    off = std::clamp(off, -0.5, 0.5);
    double ang = (peak + 0.5 + off) / kBins * kTwoPi - 3.14159265358979323846;
    if (ang < 0) ang += kTwoPi;
    if (ang >= kTwoPi) ang -= kTwoPi;
    return ang;
}

// 4x4 spatial x 8 orientation gradient histogram in the keypoint frame,
// normalized, clipped at 0.2, renormalized.
inline std::vector<float> describe(const FloatImage& img, double x, double y, double sigma,
                                   double theta, int grid, int bins) {
    std::vector<float> desc(std::size_t(grid) * grid * bins, 0.0f);
    double cell = 3.0 * sigma;
    double half = cell * grid * 0.5;
    int radius = int(std::ceil(half * std::sqrt(2.0))) + 1;
    double ct = std::cos(theta), st = std::sin(theta);
    int cx = int(std::round(x)), cy = int(std::round(y));
    for (int dy = -radius; dy <= radius; ++dy) {
        for (int dx = -radius; dx <= radius; ++dx) {
            int px = cx + dx, py = cy + dy;
            if (px < 1 || py < 1 || px >= img.w - 1 || py >= img.h - 1) continue;
            double rx = ct * dx + st * dy;   // rotate into the keypoint frame
            double ry = -st * dx + ct * dy;
            double u = rx / cell + grid * 0.5 - 0.5;
            double v = ry / cell + grid * 0.5 - 0.5;
            if (u < -1 || v < -1 || u > grid || v > grid) continue;
            double gx = img.at(px + 1, py) - img.at(px - 1, py);
            double gy = img.at(px, py + 1) - img.at(px, py - 1);
            double mag = std::hypot(gx, gy);
            double ang = std::atan2(gy, gx) - theta;
            while (ang < 0) ang += kTwoPi;
            while (ang >= kTwoPi) ang -= kTwoPi;
            double ob = ang / kTwoPi * bins;
            double wgt = mag * std::exp(-0.5 * (rx * rx + ry * ry) / (half * half));
            int u0 = int(std::floor(u)), v0 = int(std::floor(v)), o0 = int(std::floor(ob));
            double fu = u - u0, fv = v - v0, fo = ob - o0;
            for (int du = 0; du <= 1; ++du)
                for (int dv = 0; dv <= 1; ++dv)
                    for (int dob = 0; dob <= 1; ++dob) {
                        int uu = u0 + du, vv = v0 + dv;
                        if (uu < 0 || vv < 0 || uu >= grid || vv >= grid) continue;
                        int oo = (o0 + dob) % bins;
                        double w3 = wgt * (du ? fu : 1 - fu) * (dv ? fv : 1 - fv) *
                                    (dob ? fo : 1 - fo);
                        desc[(std::size_t(vv) * grid + uu) * bins + oo] += float(w3);
                    }
        }
    }
    double nn = 0.0;
    for (float d : desc) nn += double(d) * d;
    nn = std::sqrt(nn);
    if (nn > 1e-12) {
        for (float& d : desc) d = std::min(0.2f, float(d / nn));
        nn = 0.0;
        for (float d : desc) nn += double(d) * d;
        nn = std::sqrt(nn);
        if (nn > 1e-12)
            for (float& d : desc) d = float(d / nn);
    }
    return desc;
}

}  // namespace detail

inline FeatureSet detect_features(const Raster& raster, const DetectorConfig& cfg = {}) {
    if (raster.empty()) fail(ErrorCode::validation, "empty raster");
    FeatureSet fs;
    fs.width = raster.width;
    fs.height = raster.height;
    fs.descriptor_dim = cfg.descriptor_grid * cfg.descriptor_grid * cfg.descriptor_bins;

    detail::FloatImage base{raster.width, raster.height, to_gray_float(raster)};
    const int S = cfg.scales_per_octave;
    const double k = std::pow(2.0, 1.0 / S);
    detail::FloatImage octave_base = detail::gaussian_blur(base, cfg.sigma0);

    int next_id = 0;
    for (int o = 0; o < cfg.octaves; ++o) {
        if (octave_base.w < 16 || octave_base.h < 16) break;
        std::vector<detail::FloatImage> gauss;
        gauss.push_back(octave_base);
        for (int s = 1; s < S + 3; ++s) {
            double prev = cfg.sigma0 * std::pow(k, s - 1);
            double cur = cfg.sigma0 * std::pow(k, s);
            double delta = std::sqrt(std::max(1e-12, cur * cur - prev * prev));
            gauss.push_back(detail::gaussian_blur(gauss.back(), delta));
        }
        std::vector<detail::FloatImage> dog;
        for (int s = 0; s < S + 2; ++s) {
            detail::FloatImage d{gauss[s].w, gauss[s].h, std::vector<float>(gauss[s].v.size())};
            for (std::size_t i = 0; i < d.v.size(); ++i) d.v[i] = gauss[s + 1].v[i] - gauss[s].v[i];
            dog.push_back(std::move(d));
        }

        const double octave_scale = std::pow(2.0, o);
        for (int s = 1; s <= S; ++s) {
            const auto& D = dog[s];
            for (int y = 1; y < D.h - 1; ++y) {
                for (int x = 1; x < D.w - 1; ++x) {
                    float v = D.at(x, y);
                    if (std::abs(v) < 0.8f * float(cfg.contrast_threshold)) continue;
                    bool mx = true, mn = true;
                    for (int ds = -1; ds <= 1 && (mx || mn); ++ds)
                        for (int dy = -1; dy <= 1 && (mx || mn); ++dy)
                            for (int dx = -1; dx <= 1; ++dx) {
                                if (!ds && !dy && !dx) continue;
                                float n = dog[s + ds].at(x + dx, y + dy);
                                if (n >= v) mx = false;
                                if (n <= v) mn = false;
                                if (!mx && !mn) break;
                            }
                    if (!mx && !mn) continue;

                    // edge suppression on the spatial Hessian
                    double dxx = D.at(x + 1, y) - 2.0 * v + D.at(x - 1, y);
                    double dyy = D.at(x, y + 1) - 2.0 * v + D.at(x, y - 1);
                    double dxy = 0.25 * (D.at(x + 1, y + 1) - D.at(x - 1, y + 1) -
                                         D.at(x + 1, y - 1) + D.at(x - 1, y - 1));
                    double tr = dxx + dyy, det = dxx * dyy - dxy * dxy;
                    double r = cfg.edge_ratio;
                    if (det <= 0 || tr * tr * r >= (r + 1) * (r + 1) * det) continue;

                    // quadratic localization in x, y, s
                    double gx = 0.5 * (D.at(x + 1, y) - D.at(x - 1, y));
                    double gy = 0.5 * (D.at(x, y + 1) - D.at(x, y - 1));
                    double gs = 0.5 * (dog[s + 1].at(x, y) - dog[s - 1].at(x, y));
                    double dss = dog[s + 1].at(x, y) - 2.0 * v + dog[s - 1].at(x, y);
                    double ox = std::abs(dxx) > 1e-9 ? std::clamp(-gx / dxx, -0.6, 0.6) : 0.0;
                    double oy = std::abs(dyy) > 1e-9 ? std::clamp(-gy / dyy, -0.6, 0.6) : 0.0;
                    double os = std::abs(dss) > 1e-9 ? std::clamp(-gs / dss, -0.6, 0.6) : 0.0;
                    double refined = v + 0.5 * (gx * ox + gy * oy + gs * os);
                    if (std::abs(refined) < cfg.contrast_threshold) continue;

                    double sigma_local = cfg.sigma0 * std::pow(k, s + os);
                    double theta = detail::dominant_orientation(gauss[s], x + ox, y + oy,
                                                                1.5 * sigma_local);
                    Feature f;
                    f.id = next_id++;
                    f.x = (x + ox) * octave_scale;
                    f.y = (y + oy) * octave_scale;
                    f.scale = sigma_local * octave_scale;
                    f.orientation = theta;
                    f.response = std::abs(refined);
                    f.descriptor = detail::describe(gauss[s], x + ox, y + oy, sigma_local, theta,
                                                    cfg.descriptor_grid, cfg.descriptor_bins);
                    if (f.x >= 0 && f.x < fs.width && f.y >= 0 && f.y < fs.height)
                        fs.features.push_back(std::move(f));
                }
            }
        }
        octave_base = detail::downsample(gauss[S]);
    }
    // collection order is deterministic; renumber densely after bounds filtering
    for (std::size_t i = 0; i < fs.features.size(); ++i) fs.features[i].id = int(i);
    return fs;
}

}  // namespace rescu

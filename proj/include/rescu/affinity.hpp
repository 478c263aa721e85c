#pragma once

// Pairwise deformation affinity between unit recurring patterns (URPs) and
// the matrix objective built on it. A URP is the smallest RP: two features
// from one visual word paired with two from another, spanning two instances.
//
// Conventions used throughout:
//   u(f11, f12, f21, f22): rows {1,2} are visual words, columns {1,2} are
//   instances, so (f11, f12) and (f21, f22) are same-word pairs and the
//   instance columns are {f11, f21} and {f12, f22}.
//   r = d(f11, f21) / d(f12, f22), the instance size ratio.
//   D_s(f_i, f_j) = (s_i - r*s_j) / (s_i + r*s_j), scale deviation after
//   compensating the size ratio; D_theta analogous on raw orientations.
//   u = exp(-ds^2/(2*sigma_s) - dt^2/(2*sigma_theta)) where ds, dt are the
//   larger in magnitude of the two row-pair deviations. u = 1 iff both
//   deviations vanish, and u is invariant to swapping the two rows or the
//   two columns (a URP is unordered in both directions).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "rescu/error.hpp"
#include "rescu/types.hpp"

namespace rescu {

// Smallest wrapped distance between two angles, in [0, pi].
inline double wrapped_angle_distance(double a, double b) {
    double d = std::fmod(std::abs(a - b), kTwoPi);
    return std::min(d, kTwoPi - d);
}

// Signed wrap of an angle difference into (-pi, pi].
inline double wrap_signed(double a) {
    double d = std::remainder(a, kTwoPi);
    return d <= -3.14159265358979323846 ? d + kTwoPi : d;
}

// Instance size ratio r = d(f11 - f21) / d(f12 - f22). Both distances are
// within-column (same-instance) spans; a vanishing span is a degenerate
// instance and cannot be scored.
inline double size_ratio(const Feature& f11, const Feature& f21, const Feature& f12,
                         const Feature& f22) {
    double num = std::hypot(f11.x - f21.x, f11.y - f21.y);
    double den = std::hypot(f12.x - f22.x, f12.y - f22.y);
    if (num < 1e-9 || den < 1e-9)
        fail(ErrorCode::degenerate, "zero within-instance feature span");
    return num / den;
}

inline double normalized_scale_diff(double s_i, double s_j, double r) {
    return (s_i - r * s_j) / (s_i + r * s_j);
}

inline double normalized_scale_diff(const Feature& fi, const Feature& fj, double r) {
    return normalized_scale_diff(fi.scale, fj.scale, r);
}

// Literal orientation analogue of D_s on raw angles in [0, 2*pi). The
// denominator can only vanish when both angles are ~0; the value saturates
// to +/-1 if the numerator survives, else 0.
inline double normalized_angle_diff(double t_i, double t_j, double r) {
    double num = t_i - r * t_j;
    double den = t_i + r * t_j;
    if (std::abs(den) < 1e-9) return std::abs(num) < 1e-9 ? 0.0 : (num > 0 ? 1.0 : -1.0);
    return num / den;
}

inline double normalized_angle_diff(const Feature& fi, const Feature& fj, double r) {
    return normalized_angle_diff(fi.orientation, fj.orientation, r);
}

// Affinity of a URP. `wrapped_angles` swaps the literal D_theta for
// wrap(theta_i - theta_j - rot)/pi, rot being the circular mean of the two
// row-pair orientation differences (rotation-compensated deviation).
inline double urp_affinity(const Feature& f11, const Feature& f12, const Feature& f21,
                           const Feature& f22, const DiscoveryParams& p) {
    double r = size_ratio(f11, f21, f12, f22);
    double ds = std::max(std::abs(normalized_scale_diff(f11, f12, r)),
                         std::abs(normalized_scale_diff(f21, f22, r)));
    double dt;
    if (p.wrapped_angles) {
        double d1 = wrap_signed(f11.orientation - f12.orientation);
        double d2 = wrap_signed(f21.orientation - f22.orientation);
        double rot = std::atan2(std::sin(d1) + std::sin(d2), std::cos(d1) + std::cos(d2));
        dt = std::max(std::abs(wrap_signed(d1 - rot)), std::abs(wrap_signed(d2 - rot))) /
             3.14159265358979323846;
    } else {
        dt = std::max(std::abs(normalized_angle_diff(f11, f12, r)),
                      std::abs(normalized_angle_diff(f21, f22, r)));
    }
    return std::exp(-ds * ds / (2.0 * p.sigma_s) - dt * dt / (2.0 * p.sigma_theta));
}

// ---------------------------------------------------------------------------
// Affinity cache: the filtered set of same-word candidate pairs.
// ---------------------------------------------------------------------------

struct PairData {
    double dist = 0.0;           // Euclidean distance between the two features
    double pair_affinity = 0.0;  // affinity formula on the pair itself at r = 1
};

// Candidate pairs per visual word, filtered by the three candidate
// constraints: distance <= p_d * image diagonal, scale ratio within
// [1 - p_s, 1/(1 - p_s)], wrapped orientation difference <= p_theta.
class AffinityCache {
public:
    struct Entry {
        int a = 0, b = 0;  // feature ids, a < b
        int word = 0;
        PairData data;
    };

    AffinityCache() = default;

    AffinityCache(const FeatureSet& fs, const VisualWordIndex& vw, const DiscoveryParams& p) {
        auto idx = fs.id_index();
        double max_dist = p.p_d * fs.diagonal();
        double min_ratio = 1.0 - p.p_s;
        double max_theta = p.p_theta_deg * 3.14159265358979323846 / 180.0;
        for (std::size_t w = 0; w < vw.words.size(); ++w) {
            const auto& members = vw.words[w];
            for (std::size_t i = 0; i < members.size(); ++i) {
                for (std::size_t j = i + 1; j < members.size(); ++j) {
                    const Feature& fa = fs.features[idx.at(members[i])];
                    const Feature& fb = fs.features[idx.at(members[j])];
                    double d = std::hypot(fa.x - fb.x, fa.y - fb.y);
                    if (d > max_dist) continue;
                    double ratio = std::min(fa.scale, fb.scale) / std::max(fa.scale, fb.scale);
                    if (ratio < min_ratio) continue;
                    if (wrapped_angle_distance(fa.orientation, fb.orientation) > max_theta)
                        continue;
                    Entry e;
                    e.a = std::min(fa.id, fb.id);
                    e.b = std::max(fa.id, fb.id);
                    e.word = int(w);
                    e.data.dist = d;
                    double ds = normalized_scale_diff(fa.scale, fb.scale, 1.0);
                    double dt = normalized_angle_diff(fa.orientation, fb.orientation, 1.0);
                    e.data.pair_affinity =
                        std::exp(-ds * ds / (2.0 * p.sigma_s) - dt * dt / (2.0 * p.sigma_theta));
                    pairs_.emplace(key(e.a, e.b), e.data);
                    entries_.push_back(e);
                    partners_[e.a].push_back(e.b);
                    partners_[e.b].push_back(e.a);
                }
            }
        }
        for (auto& [id, list] : partners_) std::sort(list.begin(), list.end());
    }

    bool has_pair(int a, int b) const { return pairs_.count(key(a, b)) != 0; }

    const PairData* pair(int a, int b) const {
        auto it = pairs_.find(key(a, b));
        return it == pairs_.end() ? nullptr : &it->second;
    }

    // Partner ids of `id` in id order; empty list if the feature pairs with nothing.
    const std::vector<int>& partners(int id) const {
        static const std::vector<int> none;
        auto it = partners_.find(id);
        return it == partners_.end() ? none : it->second;
    }

    // All passing pairs in construction order (word-major, then member order).
    const std::vector<Entry>& entries() const { return entries_; }

    std::size_t size() const { return entries_.size(); }

private:
    static std::uint64_t key(int a, int b) {
        if (a > b) std::swap(a, b);
        return (std::uint64_t(std::uint32_t(a)) << 32) | std::uint32_t(b);
    }

    std::unordered_map<std::uint64_t, PairData> pairs_;
    std::unordered_map<int, std::vector<int>> partners_;
    std::vector<Entry> entries_;
};

// ---------------------------------------------------------------------------
// Matrix objective and expansion gain.
// ---------------------------------------------------------------------------

namespace detail {

// URP affinity of four resolved cells, or 0 when the URP cannot score:
// missing cells, a row pair absent from the cache, or a degenerate span.
inline double urp_term(const FeatureSet& fs, const std::unordered_map<int, std::size_t>& idx,
                       const AffinityCache& cache, int a11, int a12, int a21, int a22,
                       const DiscoveryParams& p) {
    if (a11 < 0 || a12 < 0 || a21 < 0 || a22 < 0) return 0.0;
    if (!cache.has_pair(a11, a12) || !cache.has_pair(a21, a22)) return 0.0;
    const Feature& f11 = fs.features[idx.at(a11)];
    const Feature& f12 = fs.features[idx.at(a12)];
    const Feature& f21 = fs.features[idx.at(a21)];
    const Feature& f22 = fs.features[idx.at(a22)];
    double num = std::hypot(f11.x - f21.x, f11.y - f21.y);
    double den = std::hypot(f12.x - f22.x, f12.y - f22.y);
    if (num < 1e-9 || den < 1e-9) return 0.0;
    return urp_affinity(f11, f12, f21, f22, p);
}

}  // namespace detail

// Objective U = (1 / (M*N)) * sum of URP affinities over unordered row pairs
// x unordered column pairs (each URP counted once). A fully congruent 3x3
// matrix scores exactly 1; a single congruent URP scores 0.25.
inline double rp_objective(const RpMatrix& m, const FeatureSet& fs,
                           const std::unordered_map<int, std::size_t>& idx,
                           const AffinityCache& cache, const DiscoveryParams& p) {
    const std::size_t M = m.rows(), N = m.cols();
    if (M < 2 || N < 2) return 0.0;
    double total = 0.0;
    for (std::size_t r1 = 0; r1 < M; ++r1)
        for (std::size_t r2 = r1 + 1; r2 < M; ++r2)
            for (std::size_t c1 = 0; c1 < N; ++c1)
                for (std::size_t c2 = c1 + 1; c2 < N; ++c2)
                    total += detail::urp_term(fs, idx, cache, m.columns[c1][r1], m.columns[c2][r1],
                                              m.columns[c1][r2], m.columns[c2][r2], p);
    return total / double(M * N);
}

// Gain of placing `candidate` at `row` of a new column (partially filled as
// `new_column`): the summed affinity of every URP the placement completes
// against existing columns and already-placed rows of the new column.
inline double candidate_gain(const FeatureSet& fs, const std::unordered_map<int, std::size_t>& idx,
                             const AffinityCache& cache, const RpMatrix& m, std::size_t row,
                             int candidate, const std::vector<int>& new_column,
                             const DiscoveryParams& p) {
    double v = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j) {
        int fij = m.columns[j][row];
        if (fij < 0) continue;
        for (std::size_t k = 0; k < m.rows(); ++k) {
            if (k == row || new_column[k] < 0) continue;
            v += detail::urp_term(fs, idx, cache, candidate, fij, new_column[k],
                                  m.columns[j][k], p);
        }
    }
    return v;
}

// Row twin of candidate_gain: gain of placing `candidate` at column `col` of
// a new row (partially filled as `new_row`).
inline double candidate_gain_row(const FeatureSet& fs,
                                 const std::unordered_map<int, std::size_t>& idx,
                                 const AffinityCache& cache, const RpMatrix& m, std::size_t col,
                                 int candidate, const std::vector<int>& new_row,
                                 const DiscoveryParams& p) {
    double v = 0.0;
    for (std::size_t k = 0; k < m.rows(); ++k) {
        int fkc = m.columns[col][k];
        if (fkc < 0) continue;
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (j == col || new_row[j] < 0) continue;
            v += detail::urp_term(fs, idx, cache, candidate, new_row[j], fkc,
                                  m.columns[j][k], p);
        }
    }
    return v;
}

}  // namespace rescu

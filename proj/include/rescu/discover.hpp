#pragma once

// Unsupervised recurring-pattern discovery: each round finds the best
// pattern over the remaining features (exact enumeration when the candidate
// pool is tiny, otherwise seed URPs from the strongest cache pairs and grow
// each greedily), accepts it, removes its features, and repeats until the
// objective drops below u_min or max_rps patterns were taken. A later
// pattern mostly covered by an earlier one (instance-box overlap above
// dedup_iod) is suppressed as a duplicate.

#include <algorithm>
#include <array>
#include <cstddef>
#include <set>
#include <tuple>
#include <unordered_set>
#include <utility>
#include <vector>

#include "rescu/affinity.hpp"
#include "rescu/expand.hpp"
#include "rescu/types.hpp"

namespace rescu {

namespace detail {

// Seed URPs: anchor pairs are drawn word by word (round-robin over words,
// each word's pairs in descending pair affinity) so seeds stratify across
// visual words; each anchor is completed by the complementary same-word pair
// from another word that maximizes the URP affinity, trying both instance
// alignments. Seed columns obey the instance-size cap (within-column span
// <= p_d x image diagonal), matching the expander. Selection is
// deterministic.
inline std::vector<RpMatrix> make_initials(const FeatureSet& fs,
                                           const std::unordered_map<int, std::size_t>& idx,
                                           const VisualWordIndex& vw, const AffinityCache& cache,
                                           const DiscoveryParams& p) {
    std::vector<std::vector<AffinityCache::Entry>> by_word(vw.words.size());
    for (const auto& e : cache.entries()) by_word[e.word].push_back(e);
    for (auto& list : by_word)
        std::sort(list.begin(), list.end(), [](const auto& l, const auto& r) {
            if (l.data.pair_affinity != r.data.pair_affinity)
                return l.data.pair_affinity > r.data.pair_affinity;
            if (l.a != r.a) return l.a < r.a;
            return l.b < r.b;
        });

    std::vector<RpMatrix> initials;
    std::set<std::array<int, 4>> seen;
    std::vector<std::size_t> cursor(by_word.size(), 0);
    const double max_span = p.p_d * fs.diagonal();  // instance-size cap
    bool any = true;
    while (int(initials.size()) < p.n_initials && any) {
        any = false;
        for (std::size_t w = 0; w < by_word.size() && int(initials.size()) < p.n_initials; ++w) {
            if (cursor[w] >= by_word[w].size()) continue;
            any = true;
            const auto anchor = by_word[w][cursor[w]++];
            const Feature& a1 = fs.features[idx.at(anchor.a)];
            const Feature& a2 = fs.features[idx.at(anchor.b)];
            double best_u = 0.0;
            RpMatrix best;
            for (std::size_t w2 = 0; w2 < by_word.size(); ++w2) {
                if (w2 == w) continue;
                for (const auto& comp : by_word[w2]) {
                    const Feature& b1 = fs.features[idx.at(comp.a)];
                    const Feature& b2 = fs.features[idx.at(comp.b)];
                    for (int flip = 0; flip < 2; ++flip) {
                        const Feature& c1 = flip ? b2 : b1;
                        const Feature& c2 = flip ? b1 : b2;
                        double d1 = std::hypot(a1.x - c1.x, a1.y - c1.y);
                        double d2 = std::hypot(a2.x - c2.x, a2.y - c2.y);
                        if (d1 < 1e-9 || d2 < 1e-9) continue;
                        if (d1 > max_span || d2 > max_span) continue;
                        double u = urp_affinity(a1, a2, c1, c2, p);
                        if (u > best_u) {
                            best_u = u;
                            best.word_ids = {int(w), int(w2)};
                            best.columns = {{a1.id, c1.id}, {a2.id, c2.id}};
                        }
                    }
                }
            }
            if (best_u > 0.0) {
                std::array<int, 4> k{best.columns[0][0], best.columns[0][1], best.columns[1][0],
                                     best.columns[1][1]};
                if (seen.insert(k).second) initials.push_back(std::move(best));
            }
        }
    }
    return initials;
}

inline VisualWordIndex filter_words(const VisualWordIndex& vw,
                                    const std::unordered_set<int>& available) {
    VisualWordIndex out;
    out.words.resize(vw.words.size());
    for (std::size_t w = 0; w < vw.words.size(); ++w)
        for (int id : vw.words[w])
            if (available.count(id)) {
                out.words[w].push_back(id);
                out.assignment[id] = int(w);
            }
    return out;
}

// Pools small enough for exact enumeration instead of greedy growth. Only
// words with >= 2 members can contribute a row, so the limits count those.
constexpr std::size_t kExactMaxWords = 4;
constexpr std::size_t kExactMaxFeatures = 14;

inline bool pool_small_enough(const VisualWordIndex& pool) {
    std::size_t words = 0, feats = 0;
    for (const auto& members : pool.words) {
        if (members.size() < 2) continue;
        ++words;
        feats += members.size();
    }
    return words >= 2 && words <= kExactMaxWords && feats <= kExactMaxFeatures;
}

// Exact search: enumerates every admissible matrix over the pool and returns
// the argmax of the objective. Admissibility matches the greedy expander:
// rows are distinct words, every column fills >= 2 cells, all within-column
// spans stay under the instance-size cap, and no feature repeats. Same-row
// cells need not be candidate pairs (uncached pairs score zero, so patterns
// may chain through intermediate instances). Exponential in pool size; call
// only under pool_small_enough.
inline std::pair<RpMatrix, double> exact_best_matrix(
    const FeatureSet& fs, const std::unordered_map<int, std::size_t>& idx,
    const VisualWordIndex& pool, const AffinityCache& cache, const DiscoveryParams& p) {
    const double max_span = p.p_d * fs.diagonal();
    std::vector<int> words;  // usable word ids
    for (std::size_t w = 0; w < pool.words.size(); ++w)
        if (pool.words[w].size() >= 2) words.push_back(int(w));

    RpMatrix best;
    double best_u = 0.0;

    auto dist_ok = [&](int a, int b) {
        const Feature& fa = fs.features[idx.at(a)];
        const Feature& fb = fs.features[idx.at(b)];
        return std::hypot(fa.x - fb.x, fa.y - fb.y) <= max_span;
    };

    const std::size_t nsub = std::size_t(1) << words.size();
    for (std::size_t mask = 0; mask < nsub; ++mask) {
        std::vector<int> rows;
        for (std::size_t i = 0; i < words.size(); ++i)
            if (mask & (std::size_t(1) << i)) rows.push_back(words[i]);
        if (rows.size() < 2) continue;

        // all columns over these rows: one feature or hole per row, >= 2
        // filled, every filled pair within the instance-size cap
        std::vector<std::vector<int>> cols;
        std::vector<int> cur(rows.size(), -1);
        auto build = [&](auto&& self, std::size_t r, int filled) -> void {
            if (r == rows.size()) {
                if (filled >= 2) cols.push_back(cur);
                return;
            }
            self(self, r + 1, filled);  // hole at row r
            for (int id : pool.words[std::size_t(rows[r])]) {
                bool ok = true;
                for (std::size_t q = 0; q < r && ok; ++q)
                    if (cur[q] >= 0 && !dist_ok(cur[q], id)) ok = false;
                if (!ok) continue;
                cur[r] = id;
                self(self, r + 1, filled + 1);
                cur[r] = -1;
            }
        };
        build(build, 0, 0);
        if (cols.size() < 2) continue;

        RpMatrix m;
        m.word_ids = rows;
        std::unordered_set<int> used;
        auto grow = [&](auto&& self, std::size_t from) -> void {
            for (std::size_t c = from; c < cols.size(); ++c) {
                bool ok = true;
                for (int id : cols[c])
                    if (id >= 0 && used.count(id)) {
                        ok = false;
                        break;
                    }
                if (!ok) continue;
                m.columns.push_back(cols[c]);
                for (int id : cols[c])
                    if (id >= 0) used.insert(id);
                if (m.columns.size() >= 2) {
                    double u = rp_objective(m, fs, idx, cache, p);
                    if (u > best_u) {
                        best_u = u;
                        best = m;
                    }
                }
                self(self, c + 1);
                for (int id : cols[c])
                    if (id >= 0) used.erase(id);
                m.columns.pop_back();
            }
        };
        grow(grow, 0);
    }
    return {std::move(best), best_u};
}

inline std::vector<Box> instance_boxes(const RecurringPattern& rp) {
    std::vector<Box> out;
    out.reserve(rp.instances.size());
    for (const auto& inst : rp.instances) out.push_back(inst.bbox);
    return out;
}

}  // namespace detail

inline RecurringPattern make_pattern(const FeatureSet& fs,
                                     const std::unordered_map<int, std::size_t>& idx,
                                     const RpMatrix& m, double score, int id) {
    RecurringPattern rp;
    rp.id = id;
    rp.matrix = m;
    rp.score = score;
    for (std::size_t c = 0; c < m.cols(); ++c)
        rp.instances.push_back(derive_instance_region(fs, idx, m.columns[c], int(c)));
    return rp;
}

// Full discovery pass. Validates inputs, then iterates seed/expand/accept
// rounds on the shrinking feature pool. Patterns come back sorted by score
// descending with dense ids; accepted patterns share no features.
inline std::vector<RecurringPattern> discover_rps(const FeatureSet& fs, const VisualWordIndex& vw,
                                                  const DiscoveryParams& p) {
    if (auto probs = validate_feature_set(fs); !probs.empty())
        fail(ErrorCode::validation, "invalid feature set: " + probs.front());
    if (auto probs = validate_params(p); !probs.empty())
        fail(ErrorCode::validation, "invalid parameters: " + probs.front());
    auto idx = fs.id_index();

    std::unordered_set<int> available;
    for (const Feature& f : fs.features) available.insert(f.id);

    std::vector<RecurringPattern> accepted;
    const int max_rounds = p.max_rps * 3;
    for (int round = 0; round < max_rounds && int(accepted.size()) < p.max_rps; ++round) {
        VisualWordIndex pool = detail::filter_words(vw, available);
        AffinityCache cache(fs, pool, p);
        if (cache.size() == 0) break;

        double best_u = -1.0;
        RpMatrix best;
        if (detail::pool_small_enough(pool)) {
            // small pools are solved exactly; greedy growth is for scale
            std::tie(best, best_u) = detail::exact_best_matrix(fs, idx, pool, cache, p);
        } else {
            auto initials = detail::make_initials(fs, idx, pool, cache, p);
            if (initials.empty()) break;
            for (const RpMatrix& seed : initials) {
                auto [m, u] = expand_rp(fs, idx, pool, cache, seed, p);
                if (u > best_u + 1e-12) {
                    best_u = u;
                    best = std::move(m);
                }
            }
        }
        if (best_u < p.u_min || best.cols() < 2 || best.rows() < 2) break;

        RecurringPattern rp = make_pattern(fs, idx, best, best_u, int(accepted.size()));
        for (const auto& col : best.columns)
            for (int id : col)
                if (id >= 0) available.erase(id);

        bool duplicate = false;
        auto new_boxes = detail::instance_boxes(rp);
        double new_area = boxes_union_area(new_boxes);
        if (new_area > 0) {
            for (const auto& prior : accepted) {
                double inter = boxes_intersection_area(new_boxes, detail::instance_boxes(prior));
                if (inter / new_area > p.dedup_iod) {
                    duplicate = true;
                    break;
                }
            }
        }
        if (!duplicate) accepted.push_back(std::move(rp));
    }

    std::stable_sort(accepted.begin(), accepted.end(),
                     [](const RecurringPattern& a, const RecurringPattern& b) {
                         return a.score > b.score;
                     });
    for (std::size_t i = 0; i < accepted.size(); ++i) accepted[i].id = int(i);
    return accepted;
}

// Grid search over candidate parameter points: each point runs a full
// discovery and the point whose best pattern maximizes U wins. Ties prefer
// smaller p_d, then smaller p_s, then smaller p_theta.
struct GridSearchResult {
    DiscoveryParams params;
    std::vector<RecurringPattern> patterns;
    double best_u = 0.0;
};

inline std::vector<DiscoveryParams> default_parameter_grid(DiscoveryParams base) {
    static const double pds[] = {0.1, 0.15, 0.2};
    static const double pss[] = {0.1, 0.2, 0.3, 0.4, 0.5};
    static const double pts[] = {30.0, 90.0, 180.0};
    std::vector<DiscoveryParams> grid;
    for (double pd : pds)
        for (double ps : pss)
            for (double pt : pts) {
                DiscoveryParams p = base;
                p.p_d = pd;
                p.p_s = ps;
                p.p_theta_deg = pt;
                grid.push_back(p);
            }
    return grid;
}

inline GridSearchResult grid_search_params(const FeatureSet& fs, const VisualWordIndex& vw,
                                           const std::vector<DiscoveryParams>& grid) {
    if (grid.empty()) fail(ErrorCode::insufficient, "empty parameter grid");
    GridSearchResult best;
    bool first = true;
    for (const DiscoveryParams& p : grid) {
        auto patterns = discover_rps(fs, vw, p);
        double u = patterns.empty() ? 0.0 : patterns.front().score;
        bool better = false;
        if (first || u > best.best_u + 1e-12) {
            better = true;
        } else if (std::abs(u - best.best_u) <= 1e-12) {
            auto tie = [](const DiscoveryParams& a, const DiscoveryParams& b) {
                if (a.p_d != b.p_d) return a.p_d < b.p_d;
                if (a.p_s != b.p_s) return a.p_s < b.p_s;
                return a.p_theta_deg < b.p_theta_deg;
            };
            better = tie(p, best.params);
        }
        if (better) {
            best.params = p;
            best.patterns = std::move(patterns);
            best.best_u = u;
            first = false;
        }
    }
    return best;
}

}  // namespace rescu

#pragma once

// Greedy growth of an RP matrix from a seed URP. Each iteration evaluates
// every admissible move (add/remove column, add/remove row, single-cell
// replace/fill/clear) and applies the one that raises the objective U the
// most; the loop stops when no move improves U, which guarantees termination
// because U strictly increases over a finite state space.
//
// Admissibility: every pair of filled cells in the same column must lie
// within the candidate radius (p_d x image diagonal, the instance-size cap
// that keeps far-apart motifs from stacking into one matrix), every column
// keeps >= 2 filled cells, and a feature appears in at most one cell.
// Same-row cells need not all be candidate pairs: a pattern may span more
// than the candidate radius by chaining through intermediate instances, and
// same-row pairs outside the cache simply contribute nothing to U. A cell
// only enters a row when it has at least one candidate partner there, since
// a partnerless cell cannot raise the objective.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "rescu/affinity.hpp"
#include "rescu/types.hpp"

namespace rescu {

namespace detail {

class Expander {
public:
    Expander(const FeatureSet& fs, const std::unordered_map<int, std::size_t>& idx,
             const VisualWordIndex& vw, const AffinityCache& cache, const DiscoveryParams& p)
        : fs_(fs), idx_(idx), vw_(vw), cache_(cache), p_(p), max_span_(p.p_d * fs.diagonal()) {}

    // Runs the greedy loop; returns the final matrix and its objective.
    std::pair<RpMatrix, double> run(RpMatrix m) {
        sync_used(m);
        double u = rp_objective(m, fs_, idx_, cache_, p_);
        for (int iter = 0; iter < 1000; ++iter) {
            RpMatrix best;
            double best_u = u;
            auto consider = [&](RpMatrix cand) {
                double cu = rp_objective(cand, fs_, idx_, cache_, p_);
                if (cu > best_u + 1e-12) {
                    best_u = cu;
                    best = std::move(cand);
                }
            };
            propose_add_column(m, consider);
            propose_remove_column(m, consider);
            propose_add_row(m, consider);
            propose_remove_row(m, consider);
            propose_cell_moves(m, consider);
            if (best_u <= u + 1e-12) break;
            m = std::move(best);
            u = best_u;
            sync_used(m);
        }
        return {std::move(m), u};
    }

private:
    template <class Fn>
    void propose_add_column(const RpMatrix& m, Fn&& consider) {
        for (std::size_t i = 0; i < m.rows(); ++i) {
            for (int g : row_candidates(m, i)) {
                std::vector<int> col(m.rows(), -1);
                col[i] = g;
                fill_column(m, i, col);
                int filled = 0;
                for (int v : col)
                    if (v >= 0) ++filled;
                if (filled < 2) continue;
                RpMatrix cand = m;
                cand.columns.push_back(col);
                consider(std::move(cand));
            }
        }
    }

    template <class Fn>
    void propose_remove_column(const RpMatrix& m, Fn&& consider) {
        if (m.cols() <= 2) return;
        for (std::size_t c = 0; c < m.cols(); ++c) {
            RpMatrix cand = m;
            cand.columns.erase(cand.columns.begin() + c);
            consider(std::move(cand));
        }
    }

    template <class Fn>
    void propose_add_row(const RpMatrix& m, Fn&& consider) {
        std::unordered_set<int> present(m.word_ids.begin(), m.word_ids.end());
        for (std::size_t w = 0; w < vw_.words.size(); ++w) {
            if (present.count(int(w))) continue;
            for (int g : word_candidates(int(w))) {
                for (std::size_t c = 0; c < m.cols(); ++c) {
                    if (!column_admits(m.columns[c], g)) continue;
                    std::vector<int> row(m.cols(), -1);
                    row[c] = g;
                    fill_row(m, c, row);
                    int filled = 0;
                    for (int v : row)
                        if (v >= 0) ++filled;
                    if (filled < 2) continue;
                    RpMatrix cand = m;
                    cand.word_ids.push_back(int(w));
                    for (std::size_t j = 0; j < cand.cols(); ++j)
                        cand.columns[j].push_back(row[j]);
                    consider(std::move(cand));
                }
            }
        }
    }

    template <class Fn>
    void propose_remove_row(const RpMatrix& m, Fn&& consider) {
        if (m.rows() <= 2) return;
        for (std::size_t r = 0; r < m.rows(); ++r) {
            RpMatrix cand;
            cand.word_ids = m.word_ids;
            cand.word_ids.erase(cand.word_ids.begin() + r);
            cand.columns = m.columns;
            bool ok = true;
            for (auto& col : cand.columns) {
                col.erase(col.begin() + r);
                int filled = 0;
                for (int v : col)
                    if (v >= 0) ++filled;
                if (filled < 2) ok = false;  // removal would orphan a column
            }
            if (ok) consider(std::move(cand));
        }
    }

    // Replace a filled cell, fill a hole, or clear a cell. Cheap local moves
    // that let the search escape a suboptimal early placement.
    template <class Fn>
    void propose_cell_moves(const RpMatrix& m, Fn&& consider) {
        for (std::size_t c = 0; c < m.cols(); ++c) {
            int filled = 0;
            for (int v : m.columns[c])
                if (v >= 0) ++filled;
            for (std::size_t r = 0; r < m.rows(); ++r) {
                int cur = m.columns[c][r];
                if (cur >= 0 && filled > 2) {
                    RpMatrix cand = m;
                    cand.columns[c][r] = -1;
                    consider(std::move(cand));
                }
                for (int g : cell_candidates(m, r, c)) {
                    RpMatrix cand = m;
                    cand.columns[c][r] = g;
                    consider(std::move(cand));
                }
            }
        }
    }

    // True when `cand` has a candidate-pair partner among row r's filled
    // cells (ignoring the column being replaced), or the row is empty. Cells
    // without any partner in their row can only add zero-affinity pairs, so
    // they are pruned from enumeration; chains past the candidate radius
    // stay reachable because one partner suffices.
    bool row_admits(const RpMatrix& m, std::size_t r, int cand,
                    std::size_t skip_col = std::size_t(-1)) const {
        bool any_filled = false;
        for (std::size_t c = 0; c < m.cols(); ++c) {
            if (c == skip_col) continue;
            int other = m.columns[c][r];
            if (other < 0) continue;
            any_filled = true;
            if (cache_.has_pair(cand, other)) return true;
        }
        return !any_filled;
    }

    // Candidates for any cell of row r: unused members of word(r) pairing
    // with at least one filled cell of that row.
    std::vector<int> row_candidates(const RpMatrix& m, std::size_t r) const {
        std::vector<int> out;
        int w = m.word_ids[r];
        if (w < 0 || w >= int(vw_.words.size())) return out;
        for (int id : vw_.words[w]) {
            if (used_.count(id)) continue;
            if (row_admits(m, r, id)) out.push_back(id);
        }
        return out;
    }

    // Same, but the cell at (r, c) is being replaced, so its current content
    // does not constrain the candidate.
    std::vector<int> cell_candidates(const RpMatrix& m, std::size_t r, std::size_t c) const {
        std::vector<int> out;
        int w = m.word_ids[r];
        if (w < 0 || w >= int(vw_.words.size())) return out;
        for (int id : vw_.words[w]) {
            if (used_.count(id)) continue;
            if (!column_admits(m.columns[c], id, r)) continue;
            if (row_admits(m, r, id, c)) out.push_back(id);
        }
        return out;
    }

    std::vector<int> word_candidates(int w) const {
        std::vector<int> out;
        for (int id : vw_.words[w])
            if (!used_.count(id)) out.push_back(id);
        return out;
    }

    bool within_span(int a, int b) const {
        const Feature& fa = fs_.features[idx_.at(a)];
        const Feature& fb = fs_.features[idx_.at(b)];
        return std::hypot(fa.x - fb.x, fa.y - fb.y) <= max_span_;
    }

    // True if `cand` stays within the instance-size cap of every filled cell
    // of `col`, ignoring the cell at `skip` (the one being replaced).
    bool column_admits(const std::vector<int>& col, int cand,
                       std::size_t skip = std::size_t(-1)) const {
        for (std::size_t r = 0; r < col.size(); ++r) {
            if (r == skip || col[r] < 0) continue;
            if (!within_span(cand, col[r])) return false;
        }
        return true;
    }

    // Completes a new column around its anchor at `anchor_row`. Remaining rows
    // are filled in descending order of their best gain against the anchor
    // alone, then each placement maximizes the full candidate gain.
    void fill_column(const RpMatrix& m, std::size_t anchor_row, std::vector<int>& col) const {
        std::vector<std::pair<double, std::size_t>> order;
        std::vector<int> anchor_only = col;
        for (std::size_t k = 0; k < m.rows(); ++k) {
            if (k == anchor_row) continue;
            double best = 0.0;
            for (int h : row_candidates_for_new_cell(m, k, col))
                best = std::max(best,
                                candidate_gain(fs_, idx_, cache_, m, k, h, anchor_only, p_));
            if (best > 0.0) order.emplace_back(-best, k);
        }
        std::sort(order.begin(), order.end());
        std::unordered_set<int> taken;
        for (int v : col)
            if (v >= 0) taken.insert(v);
        for (auto& [neg, k] : order) {
            double best_v = 0.0;
            int best_h = -1;
            for (int h : row_candidates_for_new_cell(m, k, col)) {
                if (taken.count(h)) continue;
                double v = candidate_gain(fs_, idx_, cache_, m, k, h, col, p_);
                if (v > best_v + 1e-15 || (v > 0 && std::abs(v - best_v) <= 1e-15 && h < best_h)) {
                    best_v = v;
                    best_h = h;
                }
            }
            if (best_h >= 0) {
                col[k] = best_h;
                taken.insert(best_h);
            }
        }
    }

    // Completes a new row around its anchor at `anchor_col`, mirroring
    // fill_column. Same-word pairing is enforced against cells already
    // placed in the new row.
    void fill_row(const RpMatrix& m, std::size_t anchor_col, std::vector<int>& row) const {
        int w = -1;  // the new row's word is implied by the anchor feature
        // the caller placed the anchor; find its word
        int anchor = row[anchor_col];
        auto it = vw_.assignment.find(anchor);
        if (it == vw_.assignment.end()) return;
        w = it->second;
        std::vector<std::pair<double, std::size_t>> order;
        std::vector<int> anchor_only = row;
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (j == anchor_col) continue;
            double best = 0.0;
            for (int h : vw_.words[w]) {
                if (used_.count(h) || h == anchor || !cache_.has_pair(h, anchor)) continue;
                if (!column_admits(m.columns[j], h)) continue;
                best = std::max(best,
                                candidate_gain_row(fs_, idx_, cache_, m, j, h, anchor_only, p_));
            }
            if (best > 0.0) order.emplace_back(-best, j);
        }
        std::sort(order.begin(), order.end());
        std::unordered_set<int> taken{anchor};
        for (auto& [neg, j] : order) {
            double best_v = 0.0;
            int best_h = -1;
            for (int h : vw_.words[w]) {
                if (used_.count(h) || taken.count(h)) continue;
                if (!column_admits(m.columns[j], h)) continue;
                bool ok = false;  // needs a candidate partner among placed cells
                for (std::size_t c = 0; c < m.cols() && !ok; ++c)
                    if (row[c] >= 0 && cache_.has_pair(h, row[c])) ok = true;
                if (!ok) continue;
                double v = candidate_gain_row(fs_, idx_, cache_, m, j, h, row, p_);
                if (v > best_v + 1e-15 || (v > 0 && std::abs(v - best_v) <= 1e-15 && h < best_h)) {
                    best_v = v;
                    best_h = h;
                }
            }
            if (best_h >= 0) {
                row[j] = best_h;
                taken.insert(best_h);
            }
        }
    }

    std::vector<int> row_candidates_for_new_cell(const RpMatrix& m, std::size_t r,
                                                 const std::vector<int>& new_col) const {
        std::vector<int> out;
        int w = m.word_ids[r];
        if (w < 0 || w >= int(vw_.words.size())) return out;
        for (int id : vw_.words[w]) {
            if (used_.count(id)) continue;
            bool in_new = false;
            for (int v : new_col)
                if (v == id) in_new = true;
            if (in_new) continue;
            if (!column_admits(new_col, id)) continue;
            if (row_admits(m, r, id)) out.push_back(id);
        }
        return out;
    }

    void sync_used(const RpMatrix& m) {
        used_.clear();
        for (const auto& col : m.columns)
            for (int v : col)
                if (v >= 0) used_.insert(v);
    }

    const FeatureSet& fs_;
    const std::unordered_map<int, std::size_t>& idx_;
    const VisualWordIndex& vw_;
    const AffinityCache& cache_;
    const DiscoveryParams& p_;
    double max_span_ = 0.0;
    std::unordered_set<int> used_;
};

}  // namespace detail

// Grows `seed` greedily under `cache`'s candidate constraints; returns the
// expanded matrix and its objective U.
inline std::pair<RpMatrix, double> expand_rp(const FeatureSet& fs,
                                             const std::unordered_map<int, std::size_t>& idx,
                                             const VisualWordIndex& vw, const AffinityCache& cache,
                                             const RpMatrix& seed, const DiscoveryParams& p) {
    detail::Expander e(fs, idx, vw, cache, p);
    return e.run(seed);
}

}  // namespace rescu

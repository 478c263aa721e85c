#pragma once

// Visual-word construction: greedy leader clustering over unit-normalized
// descriptors. Features are visited in descending detector response (ties by
// id), each joining the nearest existing leader within the distance
// threshold or founding a new cluster. Clusters below the minimum size are
// discarded; surviving words are sorted by size descending.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "rescu/error.hpp"
#include "rescu/types.hpp"

namespace rescu {

struct WordsConfig {
    double distance_threshold = 0.4;  // Euclidean, on unit descriptors
    int min_word_size = 2;
};

inline VisualWordIndex build_visual_words(const FeatureSet& fs, const WordsConfig& cfg = {}) {
    if (cfg.distance_threshold < 0) fail(ErrorCode::validation, "negative distance threshold");
    const std::size_t n = fs.features.size();
    std::vector<std::vector<float>> unit(n);
    for (std::size_t i = 0; i < n; ++i) {
        unit[i] = fs.features[i].descriptor;
        double nn = 0.0;
        for (float v : unit[i]) nn += double(v) * v;
        nn = std::sqrt(nn);
        if (nn > 1e-12)
            for (float& v : unit[i]) v = float(v / nn);
    }

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (fs.features[a].response != fs.features[b].response)
            return fs.features[a].response > fs.features[b].response;
        return fs.features[a].id < fs.features[b].id;
    });

    auto dist = [&](std::size_t a, std::size_t b) {
        double s = 0.0;
        for (std::size_t k = 0; k < unit[a].size(); ++k) {
            double d = double(unit[a][k]) - unit[b][k];
            s += d * d;
        }
        return std::sqrt(s);
    };

    std::vector<std::size_t> leaders;                 // feature index of each cluster leader
    std::vector<std::vector<std::size_t>> clusters;   // member feature indices
    for (std::size_t i : order) {
        int best = -1;
        double best_d = cfg.distance_threshold;
        for (std::size_t c = 0; c < leaders.size(); ++c) {
            if (unit[i].size() != unit[leaders[c]].size()) continue;
            double d = dist(i, leaders[c]);
            if (d < best_d || (d == best_d && best < 0)) {
                best_d = d;
                best = int(c);
            }
        }
        if (best >= 0) {
            clusters[best].push_back(i);
        } else {
            leaders.push_back(i);
            clusters.push_back({i});
        }
    }

    std::vector<std::size_t> word_order;
    for (std::size_t c = 0; c < clusters.size(); ++c)
        if (int(clusters[c].size()) >= std::max(1, cfg.min_word_size)) word_order.push_back(c);
    std::stable_sort(word_order.begin(), word_order.end(), [&](std::size_t a, std::size_t b) {
        return clusters[a].size() > clusters[b].size();
    });

    VisualWordIndex vw;
    for (std::size_t c : word_order) {
        std::vector<int> ids;
        ids.reserve(clusters[c].size());
        for (std::size_t i : clusters[c]) ids.push_back(fs.features[i].id);
        std::sort(ids.begin(), ids.end());
        int w = int(vw.words.size());
        for (int id : ids) vw.assignment[id] = w;
        vw.words.push_back(std::move(ids));
    }
    return vw;
}

}  // namespace rescu

#pragma once

// Core value types: scale/orientation features, visual-word index, the
// recurring-pattern matrix (rows = visual words, columns = instances), and
// the parameter block steering discovery. Validation routines return
// human-readable diagnostics instead of throwing so callers can aggregate.

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "rescu/error.hpp"
#include "rescu/geom.hpp"

namespace rescu {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

struct Feature {
    int id = 0;
    double x = 0.0;
    double y = 0.0;
    double scale = 1.0;        // > 0
    double orientation = 0.0;  // radians in [0, 2*pi)
    double response = 0.0;     // detector strength; 0 for externally loaded sets
    std::vector<float> descriptor;
};

struct FeatureSet {
    int width = 0;
    int height = 0;
    int descriptor_dim = 0;
    std::vector<Feature> features;

    double diagonal() const { return std::hypot(double(width), double(height)); }

    // id -> index into `features`; ids are unique in a valid set.
    std::unordered_map<int, std::size_t> id_index() const {
        std::unordered_map<int, std::size_t> idx;
        idx.reserve(features.size());
        for (std::size_t i = 0; i < features.size(); ++i) idx.emplace(features[i].id, i);
        return idx;
    }
};

inline std::vector<std::string> validate_feature_set(const FeatureSet& fs) {
    std::vector<std::string> problems;
    if (fs.width <= 0 || fs.height <= 0)
        problems.push_back("image extent must be positive");
    if (fs.descriptor_dim < 0)
        problems.push_back("descriptor_dim must be non-negative");
    std::unordered_set<int> seen;
    for (const Feature& f : fs.features) {
        if (!seen.insert(f.id).second)
            problems.push_back("duplicate feature id " + std::to_string(f.id));
        if (!std::isfinite(f.x) || !std::isfinite(f.y) || !std::isfinite(f.scale) ||
            !std::isfinite(f.orientation) || !std::isfinite(f.response))
            problems.push_back("non-finite field on feature " + std::to_string(f.id));
        else {
            if (f.x < 0 || f.x >= fs.width || f.y < 0 || f.y >= fs.height)
                problems.push_back("feature " + std::to_string(f.id) + " outside image bounds");
            if (f.scale <= 0)
                problems.push_back("feature " + std::to_string(f.id) + " has non-positive scale");
            if (f.orientation < 0 || f.orientation >= kTwoPi)
                problems.push_back("feature " + std::to_string(f.id) +
                                   " orientation outside [0, 2*pi)");
        }
        if (int(f.descriptor.size()) != fs.descriptor_dim)
            problems.push_back("feature " + std::to_string(f.id) +
                               " descriptor length differs from declared dimension");
        for (float v : f.descriptor)
            if (!std::isfinite(v)) {
                problems.push_back("feature " + std::to_string(f.id) +
                                   " has non-finite descriptor entry");
                break;
            }
    }
    return problems;
}

// Visual words over a feature set. words[w] lists member feature ids;
// assignment maps feature id -> word index (features outside any word are
// absent). Words are kept sorted by size descending, ties by leader id.
struct VisualWordIndex {
    std::vector<std::vector<int>> words;
    std::unordered_map<int, int> assignment;
};

inline std::vector<std::string> validate_visual_words(const VisualWordIndex& vw,
                                                      const FeatureSet& fs) {
    std::vector<std::string> problems;
    auto idx = fs.id_index();
    std::unordered_set<int> used;
    for (std::size_t w = 0; w < vw.words.size(); ++w) {
        if (vw.words[w].size() < 2)
            problems.push_back("word " + std::to_string(w) + " has fewer than 2 members");
        if (w > 0 && vw.words[w].size() > vw.words[w - 1].size())
            problems.push_back("words not sorted by size descending at index " + std::to_string(w));
        for (int id : vw.words[w]) {
            if (!idx.count(id))
                problems.push_back("word " + std::to_string(w) + " references unknown feature " +
                                   std::to_string(id));
            if (!used.insert(id).second)
                problems.push_back("feature " + std::to_string(id) + " assigned to multiple words");
            auto it = vw.assignment.find(id);
            if (it == vw.assignment.end() || it->second != int(w))
                problems.push_back("assignment map disagrees for feature " + std::to_string(id));
        }
    }
    return problems;
}

// The RP matrix. word_ids labels the rows (indices into a VisualWordIndex);
// columns[c][r] holds the feature id placed at (row r, instance c), or -1
// for an empty cell.
struct RpMatrix {
    std::vector<int> word_ids;
    std::vector<std::vector<int>> columns;

    std::size_t rows() const { return word_ids.size(); }
    std::size_t cols() const { return columns.size(); }
    int cell(std::size_t r, std::size_t c) const { return columns[c][r]; }
};

inline std::vector<std::string> validate_rp_matrix(const RpMatrix& m, const FeatureSet& fs,
                                                   const VisualWordIndex& vw) {
    std::vector<std::string> problems;
    if (m.rows() < 2) problems.push_back("matrix has fewer than 2 rows");
    if (m.cols() < 2) problems.push_back("matrix has fewer than 2 columns");
    for (int w : m.word_ids)
        if (w < 0 || w >= int(vw.words.size()))
            problems.push_back("row references unknown word " + std::to_string(w));
    auto idx = fs.id_index();
    std::unordered_set<int> used;
    for (std::size_t c = 0; c < m.cols(); ++c) {
        if (m.columns[c].size() != m.rows()) {
            problems.push_back("column " + std::to_string(c) + " has wrong height");
            continue;
        }
        int filled = 0;
        for (std::size_t r = 0; r < m.rows(); ++r) {
            int id = m.columns[c][r];
            if (id < 0) continue;
            ++filled;
            if (!idx.count(id)) {
                problems.push_back("cell references unknown feature " + std::to_string(id));
                continue;
            }
            if (!used.insert(id).second)
                problems.push_back("feature " + std::to_string(id) + " appears more than once");
            int w = m.word_ids[r];
            if (w >= 0 && w < int(vw.words.size())) {
                auto it = vw.assignment.find(id);
                if (it == vw.assignment.end() || it->second != w)
                    problems.push_back("feature " + std::to_string(id) + " is not a member of word " +
                                       std::to_string(w));
            }
        }
        if (filled < 2)
            problems.push_back("column " + std::to_string(c) + " has fewer than 2 filled cells");
    }
    return problems;
}

// One detected instance: centroid of the member features and the union of
// their support disks (radius 3 * scale) clipped to the image.
struct InstanceRegion {
    int id = 0;
    Vec2 centroid;
    Box bbox;
};

inline InstanceRegion derive_instance_region(const FeatureSet& fs,
                                             const std::unordered_map<int, std::size_t>& idx,
                                             const std::vector<int>& cells, int instance_id) {
    InstanceRegion region;
    region.id = instance_id;
    Box b;
    bool first = true;
    int n = 0;
    for (int id : cells) {
        if (id < 0) continue;
        auto it = idx.find(id);
        if (it == idx.end()) fail(ErrorCode::validation, "instance references unknown feature");
        const Feature& f = fs.features[it->second];
        region.centroid.x += f.x;
        region.centroid.y += f.y;
        ++n;
        double r = 3.0 * f.scale;
        Box disk{f.x - r, f.y - r, f.x + r, f.y + r};
        b = first ? disk : box_union(b, disk);
        first = false;
    }
    if (n == 0) fail(ErrorCode::degenerate, "instance has no filled cells");
    region.centroid.x /= n;
    region.centroid.y /= n;
    region.bbox = box_intersection(b, Box{0, 0, double(fs.width), double(fs.height)});
    return region;
}

struct RecurringPattern {
    int id = 0;
    RpMatrix matrix;
    double score = 0.0;  // objective U of the matrix
    std::vector<InstanceRegion> instances;  // one per column, same order
};

// Parameters steering candidate filtering, affinity, and search. Defaults are
// the fixed operating point; `grid` mode sweeps p_d/p_s/p_theta_deg.
struct DiscoveryParams {
    double p_d = 0.2;           // max candidate pair distance AND max within-instance
                                // feature span, as a fraction of the image diagonal;
                                // controls the granularity of detected patterns
    double p_s = 0.5;           // scale ratio tolerance: ratio in [1-p_s, 1/(1-p_s)]
    double p_theta_deg = 30.0;  // max wrapped orientation difference, degrees
    double sigma_s = 0.2;       // scale deformation tolerance
    double sigma_theta = 0.2;   // orientation deformation tolerance
    bool wrapped_angles = false;  // alternative orientation deviation measure
    int n_initials = 24;        // seed URPs per discovery round
    double u_min = 0.3;         // acceptance threshold on U
    int max_rps = 10;           // cap on returned patterns
    double dedup_iod = 0.5;     // overlap above which a later pattern is dropped
    unsigned seed = 0;          // drives seeded sampling choices
};

inline std::vector<std::string> validate_params(const DiscoveryParams& p) {
    std::vector<std::string> problems;
    if (!(p.p_d > 0 && p.p_d <= 1)) problems.push_back("p_d must lie in (0, 1]");
    if (!(p.p_s > 0 && p.p_s < 1)) problems.push_back("p_s must lie in (0, 1)");
    if (!(p.p_theta_deg > 0 && p.p_theta_deg <= 180)) problems.push_back("p_theta_deg must lie in (0, 180]");
    if (!(p.sigma_s > 0)) problems.push_back("sigma_s must be positive");
    if (!(p.sigma_theta > 0)) problems.push_back("sigma_theta must be positive");
    if (p.n_initials < 1) problems.push_back("n_initials must be at least 1");
    if (!(p.u_min >= 0)) problems.push_back("u_min must be non-negative");
    if (p.max_rps < 1) problems.push_back("max_rps must be at least 1");
    if (!(p.dedup_iod >= 0 && p.dedup_iod <= 1)) problems.push_back("dedup_iod must lie in [0, 1]");
    return problems;
}

// Ground truth for evaluation: per-pattern instance regions (boxes or finer
// polygon contours), plus optional vanishing point / uniform-spacing truth.
struct GtInstance {
    int id = 0;
    Box box;
    Polygon polygon;  // used when non-empty; box is its bounding box then
    bool has_polygon() const { return polygon.size() >= 3; }
};

struct GtRp {
    int id = 0;
    std::vector<GtInstance> instances;
};

struct GroundTruth {
    int width = 0;
    int height = 0;
    std::vector<GtRp> rps;
    std::optional<Vec2> vp_point;
    std::optional<bool> ts_uniform;
};

}  // namespace rescu

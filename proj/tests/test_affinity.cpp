#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "rescu/affinity.hpp"
#include "support/oracles.hpp"

using namespace rescu;

namespace {

// Four features forming one URP: rows = words {0,1}, columns = instances.
struct Urp {
    FeatureSet fs;
    DiscoveryParams p;
    Urp() {
        fs = oracle::fset({oracle::feat(0, 0, 0), oracle::feat(1, 50, 0),
                           oracle::feat(2, 0, 10), oracle::feat(3, 50, 10)});
    }
    Feature& f11() { return fs.features[0]; }
    Feature& f12() { return fs.features[1]; }
    Feature& f21() { return fs.features[2]; }
    Feature& f22() { return fs.features[3]; }
    double u() { return urp_affinity(f11(), f12(), f21(), f22(), p); }
};

}  // namespace

TEST_CASE("congruent unit pattern scores exactly one") {
    Urp u;
    for (auto& f : u.fs.features) f.orientation = 0.5;
    CHECK(u.u() == Catch::Approx(1.0).margin(1e-15));
}

TEST_CASE("affinity calibration point") {
    // A 0.2 normalized scale deviation alone must give exp(-0.2^2 / (2*0.2)).
    Urp u;
    u.f11().scale = 1.5;  // (1.5 - 1) / (1.5 + 1) = 0.2
    CHECK(u.u() == Catch::Approx(std::exp(-0.1)).margin(1e-12));
}

TEST_CASE("orientation deviation guard") {
    SECTION("both terms vanish -> zero") {
        CHECK(normalized_angle_diff(0.0, 0.0, 1.0) == 0.0);
        CHECK(normalized_angle_diff(1e-12, 1e-12, 1.0) == 0.0);
    }
    SECTION("vanishing denominator with live numerator saturates") {
        CHECK(normalized_angle_diff(1e-6, -1e-6, 1.0) == 1.0);
        CHECK(normalized_angle_diff(-1e-6, 1e-6, 1.0) == -1.0);
    }
    SECTION("regular values match the ratio") {
        CHECK(normalized_angle_diff(0.6, 0.2, 1.0) == Catch::Approx(0.5));
    }
}

TEST_CASE("size-ratio compensation makes scaled copies congruent") {
    // Instance 2 is instance 1 uniformly scaled by 2 (positions and scales).
    Urp u;
    u.f12() = oracle::feat(1, 100, 0, 2.0);
    u.f22() = oracle::feat(3, 100, 20, 2.0);
    // r = 10/20 = 0.5 and scales (1, 2) cancel: D_s = (1 - 0.5*2)/(1 + 0.5*2) = 0.
    CHECK(u.u() == Catch::Approx(1.0).margin(1e-15));
}

TEST_CASE("wrapped mode compensates a common rotation") {
    Urp lit, wrap;
    wrap.p.wrapped_angles = true;
    for (Urp* u : {&lit, &wrap}) {
        u->f11().orientation = 1.0;
        u->f21().orientation = 1.3;
        u->f12().orientation = 1.0 + 0.7;  // instance 2 rotated by 0.7
        u->f22().orientation = 1.3 + 0.7;
    }
    CHECK(wrap.u() == Catch::Approx(1.0).margin(1e-12));
    CHECK(lit.u() < 1.0);  // literal measure sees the rotation as deformation
}

TEST_CASE("degenerate instance span is rejected") {
    Urp u;
    u.f21() = u.f11();  // column 1 collapses to a point
    u.f21().id = 2;
    REQUIRE_THROWS_AS(u.u(), Error);
}

TEST_CASE("candidate pair filtering") {
    DiscoveryParams p;
    p.p_d = 0.1;  // 640x480 -> diagonal 800 -> max distance 80

    SECTION("distance cut") {
        auto fs = oracle::fset({oracle::feat(0, 0, 0), oracle::feat(1, 79, 0),
                                oracle::feat(2, 200, 0), oracle::feat(3, 284, 0)});
        auto vw = oracle::manual_words({{0, 1}, {2, 3}});
        AffinityCache cache(fs, vw, p);
        CHECK(cache.has_pair(0, 1));       // 79 <= 80
        CHECK_FALSE(cache.has_pair(2, 3));  // 84 > 80
        CHECK(cache.size() == 1);
    }
    SECTION("scale ratio band") {
        p.p_s = 0.5;  // ratio must be >= 0.5
        auto fs = oracle::fset({oracle::feat(0, 0, 0, 1.0), oracle::feat(1, 10, 0, 2.0),
                                oracle::feat(2, 0, 50, 1.0), oracle::feat(3, 10, 50, 2.1)});
        auto vw = oracle::manual_words({{0, 1}, {2, 3}});
        AffinityCache cache(fs, vw, p);
        CHECK(cache.has_pair(0, 1));        // ratio 0.5, boundary included
        CHECK_FALSE(cache.has_pair(2, 3));  // ratio ~0.476
    }
    SECTION("orientation difference wraps around the circle") {
        p.p_theta_deg = 30.0;
        auto fs = oracle::fset(
            {oracle::feat(0, 0, 0, 1.0, 0.1), oracle::feat(1, 10, 0, 1.0, kTwoPi - 0.1),
             oracle::feat(2, 0, 50, 1.0, 0.0), oracle::feat(3, 10, 50, 1.0, 1.0)});
        auto vw = oracle::manual_words({{0, 1}, {2, 3}});
        AffinityCache cache(fs, vw, p);
        CHECK(cache.has_pair(0, 1));        // wrapped difference 0.2 rad < 30 deg
        CHECK_FALSE(cache.has_pair(2, 3));  // 1.0 rad > 30 deg
    }
    SECTION("pairs never cross words") {
        auto fs = oracle::fset({oracle::feat(0, 0, 0), oracle::feat(1, 10, 0),
                                oracle::feat(2, 0, 10), oracle::feat(3, 10, 10)});
        auto vw = oracle::manual_words({{0, 1}, {2, 3}});
        AffinityCache cache(fs, vw, p);
        CHECK_FALSE(cache.has_pair(0, 2));
        CHECK_FALSE(cache.has_pair(1, 3));
        CHECK(cache.partners(0) == std::vector<int>{1});
    }
}

namespace {

// 3x3 congruent lattice: words are rows of the lattice, instances columns.
struct Lattice {
    FeatureSet fs;
    VisualWordIndex vw;
    RpMatrix m;
    DiscoveryParams p;
    Lattice() {
        std::vector<Feature> feats;
        int id = 0;
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c)
                feats.push_back(oracle::feat(id++, 100.0 + 50.0 * c, 100.0 + 30.0 * r, 1.0, 0.3));
        fs = oracle::fset(feats);
        vw = oracle::manual_words({{0, 1, 2}, {3, 4, 5}, {6, 7, 8}});
        m.word_ids = {0, 1, 2};
        m.columns = {{0, 3, 6}, {1, 4, 7}, {2, 5, 8}};
    }
};

}  // namespace

TEST_CASE("objective of a fully congruent 3x3 matrix is one") {
    Lattice L;
    AffinityCache cache(L.fs, L.vw, L.p);
    auto idx = L.fs.id_index();
    CHECK(rp_objective(L.m, L.fs, idx, cache, L.p) == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("objective normalization on a single unit pattern") {
    Lattice L;
    RpMatrix m;
    m.word_ids = {0, 1};
    m.columns = {{0, 3}, {1, 4}};
    AffinityCache cache(L.fs, L.vw, L.p);
    auto idx = L.fs.id_index();
    // one URP with affinity 1 over M*N = 4 cells
    CHECK(rp_objective(m, L.fs, idx, cache, L.p) == Catch::Approx(0.25).margin(1e-12));
}

TEST_CASE("holes contribute nothing to the objective") {
    Lattice L;
    RpMatrix full = L.m;
    L.m.columns[2][1] = -1;  // knock out one cell
    AffinityCache cache(L.fs, L.vw, L.p);
    auto idx = L.fs.id_index();
    double u_holed = rp_objective(L.m, L.fs, idx, cache, L.p);
    double u_full = rp_objective(full, L.fs, idx, cache, L.p);
    // the hole kills the URPs it participated in: 2 row-pairs x 2 column-pairs
    CHECK(u_holed == Catch::Approx(u_full - 4.0 / 9.0).margin(1e-12));
}

TEST_CASE("placement gains sum to the objective increase") {
    Lattice L;
    AffinityCache cache(L.fs, L.vw, L.p);
    auto idx = L.fs.id_index();

    RpMatrix base;
    base.word_ids = {0, 1, 2};
    base.columns = {{0, 3, 6}, {1, 4, 7}};
    double before = rp_objective(base, L.fs, idx, cache, L.p) * double(base.rows() * base.cols());

    std::vector<int> col(3, -1);
    double gain = 0.0;
    for (std::size_t r = 0; r < 3; ++r) {
        int cand = L.m.columns[2][r];
        gain += candidate_gain(L.fs, idx, cache, base, r, cand, col, L.p);
        col[r] = cand;
    }
    base.columns.push_back(col);
    double after = rp_objective(base, L.fs, idx, cache, L.p) * double(base.rows() * base.cols());
    CHECK(gain == Catch::Approx(after - before).margin(1e-12));
}

TEST_CASE("row placement gains mirror the column version") {
    Lattice L;
    AffinityCache cache(L.fs, L.vw, L.p);
    auto idx = L.fs.id_index();

    RpMatrix base;
    base.word_ids = {0, 1};
    base.columns = {{0, 3}, {1, 4}, {2, 5}};
    double before = rp_objective(base, L.fs, idx, cache, L.p) * double(base.rows() * base.cols());

    std::vector<int> row(3, -1);
    double gain = 0.0;
    for (std::size_t c = 0; c < 3; ++c) {
        int cand = 6 + int(c);
        gain += candidate_gain_row(L.fs, idx, cache, base, c, cand, row, L.p);
        row[c] = cand;
    }
    base.word_ids.push_back(2);
    for (std::size_t c = 0; c < 3; ++c) base.columns[c].push_back(row[c]);
    double after = rp_objective(base, L.fs, idx, cache, L.p) * double(base.rows() * base.cols());
    CHECK(gain == Catch::Approx(after - before).margin(1e-12));
}

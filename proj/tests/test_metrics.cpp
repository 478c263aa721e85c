#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>

#include "rescu/metrics.hpp"
#include "support/oracles.hpp"

using namespace rescu;

namespace {

EvalRegion box(double x0, double y0, double x1, double y1) {
    return region_from_box({x0, y0, x1, y1});
}

RecurringPattern det_rp(const std::vector<Box>& boxes) {
    RecurringPattern rp;
    for (std::size_t i = 0; i < boxes.size(); ++i) {
        InstanceRegion inst;
        inst.id = int(i);
        inst.centroid = {0.5 * (boxes[i].x0 + boxes[i].x1), 0.5 * (boxes[i].y0 + boxes[i].y1)};
        inst.bbox = boxes[i];
        rp.instances.push_back(inst);
    }
    return rp;
}

GtRp gt_rp(int id, const std::vector<Box>& boxes) {
    GtRp rp;
    rp.id = id;
    for (std::size_t i = 0; i < boxes.size(); ++i) {
        GtInstance inst;
        inst.id = int(i);
        inst.box = boxes[i];
        rp.instances.push_back(inst);
    }
    return rp;
}

}  // namespace

TEST_CASE("intersection over detection") {
    SECTION("unit cases are exact") {
        CHECK(iod(box(0, 0, 10, 10), box(0, 0, 10, 10)) == 1.0);
        CHECK(iod(box(0, 0, 10, 10), box(20, 20, 30, 30)) == 0.0);
        CHECK(iod(box(0, 0, 10, 10), box(5, 0, 15, 10)) == 0.5);
    }
    SECTION("asymmetric by definition") {
        EvalRegion small = box(0, 0, 10, 10), big = box(0, 0, 20, 10);
        CHECK(iod(small, big) == 1.0);
        CHECK(iod(big, small) == 0.5);
    }
    SECTION("polygon ground truth is measured exactly") {
        EvalRegion det = box(0, 0, 10, 10);
        EvalRegion tri{{0, 0, 10, 10}, {{0, 0}, {10, 0}, {0, 10}}};
        CHECK(iod(det, tri) == Catch::Approx(0.5));
        CHECK(iod(tri, det) == Catch::Approx(1.0));  // triangle fully inside the box
    }
    SECTION("non-convex polygon against a box") {
        Polygon ell{{0, 0}, {4, 0}, {4, 1}, {1, 1}, {1, 4}, {0, 4}};
        EvalRegion det{{0, 0, 4, 4}, ell};
        CHECK(region_area(det) == Catch::Approx(7.0));
        CHECK(iod(det, box(0, 0, 4, 4)) == Catch::Approx(1.0));
        CHECK(iod(det, box(0, 0, 4, 0.5)) == Catch::Approx(2.0 / 7.0));
    }
    SECTION("two non-convex polygons are out of scope") {
        Polygon ell{{0, 0}, {4, 0}, {4, 1}, {1, 1}, {1, 4}, {0, 4}};
        EvalRegion a{{0, 0, 4, 4}, ell};
        try {
            iod(a, a);
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::unsupported);
        }
    }
    SECTION("zero-area detection") {
        REQUIRE_THROWS_AS(iod(box(5, 5, 5, 5), box(0, 0, 10, 10)), Error);
    }
}

TEST_CASE("one-to-one instance matching") {
    SECTION("acceptance is strictly above the threshold") {
        std::vector<EvalRegion> det{box(0, 0, 10, 10)};
        std::vector<EvalRegion> gt{box(5, 0, 15, 10)};  // IOD exactly 0.5
        CHECK(match_instances(det, gt, 0.5).matches.empty());
        CHECK(match_instances(det, gt, 0.49).matches.size() == 1);
    }
    SECTION("duplicate detections cannot double-count") {
        std::vector<EvalRegion> det{box(0, 0, 10, 10), box(1, 0, 11, 10)};
        std::vector<EvalRegion> gt{box(0, 0, 10, 10)};
        MatchStats st = match_instances(det, gt, 0.5);
        CHECK(st.matches.size() == 1);
        CHECK(st.precision == 0.5);
        CHECK(st.recall == 1.0);
    }
    SECTION("empty-side conventions") {
        MatchStats none = match_instances({}, {box(0, 0, 10, 10)}, 0.5);
        CHECK(none.precision == 1.0);
        CHECK(none.recall == 0.0);
        MatchStats nogt = match_instances({box(0, 0, 10, 10)}, {}, 0.5);
        CHECK(nogt.precision == 0.0);
        CHECK(nogt.recall == 1.0);
        MatchStats empty = match_instances({}, {}, 0.5);
        CHECK(empty.precision == 1.0);
        CHECK(empty.recall == 1.0);
    }
    SECTION("a greedy first pick never shadows an achievable pair") {
        // d0 overlaps both gts, d1 only g0; the optimal assignment crosses
        std::vector<EvalRegion> det{box(0, 2, 10, 12), box(0, -2, 10, 8)};
        std::vector<EvalRegion> gt{box(0, 0, 10, 10), box(0, 5, 10, 15)};
        MatchStats st = match_instances(det, gt, 0.5);
        REQUIRE(st.matches.size() == 2);
        CHECK(st.precision == 1.0);
        CHECK(st.recall == 1.0);
        for (const auto& [d, g] : st.matches) {
            if (d == 0) CHECK(g == 1);
            if (d == 1) CHECK(g == 0);
        }
    }
    SECTION("matched count equals the exhaustive optimum on random fixtures") {
        std::mt19937 rng(99);
        std::uniform_real_distribution<double> pos(0.0, 80.0);
        std::uniform_real_distribution<double> len(5.0, 40.0);
        auto random_boxes = [&](int n) {
            std::vector<EvalRegion> out;
            for (int i = 0; i < n; ++i) {
                double x = pos(rng), y = pos(rng);
                out.push_back(box(x, y, x + len(rng), y + len(rng)));
            }
            return out;
        };
        for (int trial = 0; trial < 300; ++trial) {
            auto det = random_boxes(1 + int(rng() % 6));
            auto gt = random_boxes(1 + int(rng() % 6));
            double h = 0.1 + 0.2 * double(rng() % 4);
            MatchStats st = match_instances(det, gt, h);
            std::vector<std::vector<char>> adj(det.size(), std::vector<char>(gt.size(), 0));
            for (std::size_t d = 0; d < det.size(); ++d)
                for (std::size_t g = 0; g < gt.size(); ++g)
                    adj[d][g] = iod(det[d], gt[g]) > h ? 1 : 0;
            INFO("trial " << trial << " h=" << h);
            CHECK(int(st.matches.size()) == oracle::max_matching(adj));
        }
    }
    SECTION("rates ignore detection order") {
        std::mt19937 rng(4);
        std::uniform_real_distribution<double> pos(0.0, 60.0);
        std::vector<EvalRegion> det, gt;
        for (int i = 0; i < 5; ++i) {
            double x = pos(rng), y = pos(rng);
            det.push_back(box(x, y, x + 20, y + 20));
            gt.push_back(box(x + 3, y, x + 23, y + 20));
        }
        MatchStats a = match_instances(det, gt, 0.3);
        std::reverse(det.begin(), det.end());
        MatchStats b = match_instances(det, gt, 0.3);
        CHECK(a.precision == b.precision);
        CHECK(a.recall == b.recall);
    }
}

TEST_CASE("pattern-level precision and recall") {
    std::vector<Box> motif_a{{0, 0, 10, 10}, {20, 0, 30, 10}, {40, 0, 50, 10}};
    std::vector<Box> motif_b{{0, 40, 10, 50}, {20, 40, 30, 50}};
    std::vector<GtRp> gts{gt_rp(0, motif_a), gt_rp(1, motif_b)};

    SECTION("an exact detection covers one of two ground-truth patterns") {
        RpMatchStats st = rp_pr({det_rp(motif_a)}, gts, 0.5);
        CHECK(st.precision == 1.0);
        CHECK(st.recall == 0.5);
        REQUIRE(st.assignment.size() == 1);
        CHECK(st.assignment[0] == 0);
    }
    SECTION("two detections on the same ground truth count one covered") {
        RpMatchStats st = rp_pr({det_rp(motif_a), det_rp(motif_a)}, gts, 0.5);
        CHECK(st.precision == 1.0);
        CHECK(st.recall == 0.5);
        CHECK(st.assignment == std::vector<int>{0, 0});
    }
    SECTION("a detection matching nothing is unaccepted") {
        std::vector<Box> junk{{200, 200, 210, 210}, {230, 200, 240, 210}};
        RpMatchStats st = rp_pr({det_rp(motif_a), det_rp(junk)}, gts, 0.5);
        CHECK(st.precision == 0.5);
        CHECK(st.assignment == std::vector<int>{0, -1});
    }
    SECTION("assignment picks the ground truth with the best instance precision") {
        std::vector<Box> mixed{{0, 0, 10, 10}, {20, 0, 30, 10}, {0, 40, 10, 50}};
        RpMatchStats st = rp_pr({det_rp(mixed)}, gts, 0.5);
        REQUIRE(st.assignment.size() == 1);
        CHECK(st.assignment[0] == 0);  // 2/3 against motif A beats 1/3 against B
    }
}

TEST_CASE("threshold sweeps") {
    SECTION("strict inequality at the grid point") {
        std::vector<RecurringPattern> det{det_rp({{0, 0, 10, 10}})};
        std::vector<GtRp> gts{gt_rp(0, {{5, 0, 15, 10}})};  // IOD exactly 0.5
        auto curve = sweep_h(det, gts, {0.4, 0.5, 0.6});
        REQUIRE(curve.size() == 3);
        CHECK(curve[0].instance_recall == 1.0);
        CHECK(curve[1].instance_recall == 0.0);
        CHECK(curve[2].instance_recall == 0.0);
    }
    SECTION("curves are monotone and flat-perfect for exact detections") {
        std::vector<Box> motif{{0, 0, 10, 10}, {20, 0, 30, 10}, {40, 0, 50, 10}};
        std::vector<RecurringPattern> det{det_rp(motif)};
        std::vector<GtRp> gts{gt_rp(0, motif)};
        std::vector<double> grid{0.1, 0.3, 0.5, 0.7, 0.9};
        auto curve = sweep_h(det, gts, grid);
        for (const auto& pt : curve) {
            CHECK(pt.instance_precision == 1.0);
            CHECK(pt.instance_recall == 1.0);
            CHECK(pt.rp_precision == 1.0);
            CHECK(pt.rp_recall == 1.0);
        }
    }
    SECTION("monotone under imperfect detections") {
        std::vector<RecurringPattern> det{det_rp(
            {{0, 0, 10, 10}, {21, 0, 31, 10}, {44, 2, 54, 12}, {90, 90, 100, 100}})};
        std::vector<GtRp> gts{gt_rp(0, {{2, 0, 12, 10}, {20, 0, 30, 10}, {40, 0, 50, 10}})};
        auto curve = sweep_h(det, gts, {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9});
        for (std::size_t i = 1; i < curve.size(); ++i) {
            CHECK(curve[i].instance_precision <= curve[i - 1].instance_precision);
            CHECK(curve[i].instance_recall <= curve[i - 1].instance_recall);
            CHECK(curve[i].rp_precision <= curve[i - 1].rp_precision);
            CHECK(curve[i].rp_recall <= curve[i - 1].rp_recall);
        }
    }
    SECTION("no detections: precision one, recall zero, at every threshold") {
        std::vector<GtRp> gts{gt_rp(0, {{0, 0, 10, 10}, {20, 0, 30, 10}})};
        auto curve = sweep_h({}, gts, {0.3, 0.6});
        for (const auto& pt : curve) {
            CHECK(pt.instance_precision == 1.0);
            CHECK(pt.instance_recall == 0.0);
            CHECK(pt.rp_precision == 1.0);
            CHECK(pt.rp_recall == 0.0);
        }
    }
}

TEST_CASE("vanishing point success curves") {
    auto entry = [](Vec2 pred, Vec2 truth) {
        VpdEntry e;
        e.predicted = pred;
        e.truth = truth;
        e.width = 640;
        e.height = 480;
        return e;
    };

    SECTION("exact predictions succeed at every threshold") {
        std::vector<VpdEntry> es{entry({100, 100}, {100, 100}), entry({500, -80}, {500, -80})};
        auto c = vpd_success_curve(es, {1, 5}, {0.5, 1});
        CHECK(c.success_px == std::vector<double>{1.0, 1.0});
        CHECK(c.success_deg == std::vector<double>{1.0, 1.0});
    }
    SECTION("one of two predictions fifteen pixels off") {
        std::vector<VpdEntry> es{entry({100, 100}, {100, 100}), entry({515, 200}, {500, 200})};
        auto c = vpd_success_curve(es, {10, 20}, {});
        CHECK(c.success_px == std::vector<double>{0.5, 1.0});
    }
    SECTION("angle measure catches a direction error the point measure cannot") {
        // predicted ray straight ahead, truth far to the right: ~90 degrees
        std::vector<VpdEntry> es{entry({320, 240}, {1e9, 240})};
        auto c = vpd_success_curve(es, {}, {45, 89, 91});
        CHECK(c.success_deg == std::vector<double>{0.0, 0.0, 1.0});
    }
    SECTION("curves never decrease") {
        std::mt19937 rng(11);
        std::uniform_real_distribution<double> d(-400, 900);
        std::vector<VpdEntry> es;
        for (int i = 0; i < 20; ++i) es.push_back(entry({d(rng), d(rng)}, {d(rng), d(rng)}));
        std::vector<double> taus{0, 5, 20, 100, 400, 2000};
        auto c = vpd_success_curve(es, taus, {0.1, 1, 5, 30, 90, 180});
        for (std::size_t i = 1; i < c.success_px.size(); ++i)
            CHECK(c.success_px[i] >= c.success_px[i - 1]);
        for (std::size_t i = 1; i < c.success_deg.size(); ++i)
            CHECK(c.success_deg[i] >= c.success_deg[i - 1]);
    }
    SECTION("no records") {
        REQUIRE_THROWS_AS(vpd_success_curve({}, {5}, {1}), Error);
    }
}

TEST_CASE("translation symmetry success rate") {
    std::vector<std::pair<bool, double>> scenes;
    for (int i = 0; i < 3; ++i) scenes.emplace_back(true, 0.01);
    for (int i = 0; i < 8; ++i) scenes.emplace_back(true, 0.20);
    scenes.emplace_back(false, 0.0);  // untested scenes never count as symmetric

    CHECK(ts_success_rate(scenes, 0.06) == Catch::Approx(0.25));
    CHECK(ts_success_rate(scenes, 0.25) == Catch::Approx(11.0 / 12.0));
    REQUIRE_THROWS_AS(ts_success_rate({}, 0.06), Error);
}

TEST_CASE("instance counting") {
    std::vector<Box> three{{0, 0, 1, 1}, {2, 0, 3, 1}, {4, 0, 5, 1}};
    std::vector<Box> five{{0, 2, 1, 3}, {2, 2, 3, 3}, {4, 2, 5, 3}, {6, 2, 7, 3}, {8, 2, 9, 3}};
    CountReport rep = count_instances({det_rp(three), det_rp(five)});
    CHECK(rep.per_rp == std::vector<int>{3, 5});
    CHECK(rep.total == 8);
    CHECK(count_instances({}).total == 0);
    CHECK(count_instances({}).per_rp.empty());
}

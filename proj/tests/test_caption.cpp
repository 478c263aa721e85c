#include <catch2/catch_amalgamated.hpp>

#include <string>

#include "rescu/caption.hpp"
#include "support/oracles.hpp"

using namespace rescu;

namespace {

int count_occurrences(const std::string& haystack, const std::string& needle) {
    int n = 0;
    for (std::size_t pos = haystack.find(needle); pos != std::string::npos;
         pos = haystack.find(needle, pos + 1))
        ++n;
    return n;
}

RecurringPattern rp_with_boxes(const std::vector<Box>& boxes) {
    RecurringPattern rp;
    for (std::size_t i = 0; i < boxes.size(); ++i) {
        InstanceRegion inst;
        inst.id = int(i);
        inst.bbox = boxes[i];
        rp.instances.push_back(inst);
    }
    return rp;
}

}  // namespace

TEST_CASE("number words") {
    CHECK(number_to_word(2) == "two");
    CHECK(number_to_word(6) == "six");
    CHECK(number_to_word(12) == "twelve");
    CHECK(number_to_word(15) == "fifteen");
    CHECK(number_to_word(20) == "twenty");
    CHECK(number_to_word(21) == "twenty-one");
    CHECK(number_to_word(40) == "forty");
    CHECK(number_to_word(99) == "ninety-nine");
    REQUIRE_THROWS_AS(number_to_word(1), Error);
    REQUIRE_THROWS_AS(number_to_word(100), Error);
}

TEST_CASE("caption enhancement reference strings") {
    SECTION("collective phrase at the sentence start") {
        CaptionContext ctx;
        ctx.count = 6;
        CHECK(enhance_caption("A group of babies sitting on the couch.", ctx) ==
              "Six similar babies sitting on the couch.");
    }
    SECTION("count inserted after 'of' when no collective phrase exists") {
        CaptionContext ctx;
        ctx.count = 6;
        CHECK(enhance_caption("An old picture of stone statues on a wall.", ctx) ==
              "An old picture of six similar stone statues on a wall.");
    }
    SECTION("symmetry and vanishing-point clauses") {
        CaptionContext ctx;
        ctx.count = 5;
        ctx.ts_detected = true;
        ctx.vp_status = VpStatus::outside;
        CHECK(enhance_caption("A group of men jumping in the sky.", ctx) ==
              "Five similar men jumping in the sky. The men have a potential translation "
              "symmetry in 3D and form a vanishing point outside of the image.");
    }
}

TEST_CASE("enhancement is idempotent") {
    std::vector<std::pair<std::string, CaptionContext>> cases;
    {
        CaptionContext c;
        c.count = 6;
        cases.emplace_back("A group of babies sitting on the couch.", c);
        cases.emplace_back("An old picture of stone statues on a wall.", c);
    }
    {
        CaptionContext c;
        c.count = 5;
        c.ts_detected = true;
        c.vp_status = VpStatus::outside;
        cases.emplace_back("A group of men jumping in the sky.", c);
    }
    for (const auto& [base, ctx] : cases) {
        std::string once = enhance_caption(base, ctx);
        CHECK(enhance_caption(once, ctx) == once);
    }
}

TEST_CASE("count word appears exactly once") {
    CaptionContext ctx;
    ctx.count = 6;
    std::string out = enhance_caption("A group of babies sitting on the couch.", ctx);
    CHECK(count_occurrences(out, "ix similar") == 1);  // matches Six and six

    ctx.count = 4;
    out = enhance_caption("An old picture of stone statues on a wall.", ctx);
    CHECK(count_occurrences(out, "four similar") == 1);
}

TEST_CASE("clause combinations") {
    CaptionContext ctx;
    ctx.count = 3;
    const std::string base = "A group of cars parked on the street.";

    SECTION("symmetry only") {
        ctx.ts_detected = true;
        CHECK(enhance_caption(base, ctx) ==
              "Three similar cars parked on the street. The cars have a potential translation "
              "symmetry in 3D.");
    }
    SECTION("vanishing point only, inside") {
        ctx.vp_status = VpStatus::inside;
        CHECK(enhance_caption(base, ctx) ==
              "Three similar cars parked on the street. The cars form a vanishing point inside "
              "of the image.");
    }
    SECTION("no flags, no appended sentence") {
        std::string out = enhance_caption(base, ctx);
        CHECK(out == "Three similar cars parked on the street.");
    }
    SECTION("fallback path uses the detected plural as the subject") {
        ctx.ts_detected = true;
        CHECK(enhance_caption("An old picture of stone statues on a wall.", ctx) ==
              "An old picture of three similar stone statues on a wall. The statues have a "
              "potential translation symmetry in 3D.");
    }
}

TEST_CASE("collective phrases away from the sentence start keep lowercase") {
    CaptionContext ctx;
    ctx.count = 4;
    CHECK(enhance_caption("There is a group of cats on the mat.", ctx) ==
          "There is four similar cats on the mat.");
}

TEST_CASE("captions without an insertion point are rejected") {
    CaptionContext ctx;
    ctx.count = 3;
    try {
        enhance_caption("The sky is blue.", ctx);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::validation);
    }
}

TEST_CASE("pattern-to-region assignment") {
    RecurringPattern rp =
        rp_with_boxes({{0, 0, 10, 10}, {20, 0, 30, 10}});  // union area 200

    SECTION("full containment") {
        CHECK(rp_region_overlap(rp, {0, 0, 40, 20}) == Catch::Approx(1.0));
        CHECK(assign_rp_to_regions(rp, {{0, 0, 40, 20}}) == std::vector<int>{0});
    }
    SECTION("half coverage is rejected") {
        CHECK(rp_region_overlap(rp, {0, 0, 10, 10}) == Catch::Approx(0.5));
        CHECK(assign_rp_to_regions(rp, {{0, 0, 10, 10}}).empty());
    }
    SECTION("the 0.90 boundary is inclusive") {
        // region covers all of box 1 and 80 of box 0's 100 area units
        Box region{2, 0, 30, 10};
        CHECK(rp_region_overlap(rp, region) == Catch::Approx(0.9));
        CHECK(assign_rp_to_regions(rp, {region}, 0.90) == std::vector<int>{0});
        CHECK(assign_rp_to_regions(rp, {region}, 0.901).empty());
    }
    SECTION("several candidate regions") {
        std::vector<Box> regions{{0, 0, 9, 10}, {-5, -5, 35, 15}, {0, 0, 30, 10}};
        CHECK(assign_rp_to_regions(rp, regions) == std::vector<int>{1, 2});
    }
    SECTION("a pattern with no area cannot be assigned") {
        RecurringPattern flat = rp_with_boxes({{5, 5, 5, 5}});
        REQUIRE_THROWS_AS(rp_region_overlap(flat, {0, 0, 10, 10}), Error);
    }
}

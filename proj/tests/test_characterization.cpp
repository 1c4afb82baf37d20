#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "dyadic/characterization.hpp"
#include "oracles.hpp"

using namespace dyadic;
using Catch::Approx;

namespace {

SubsetMask lower_half() {
    SubsetMask m(16);
    for (PointIndex i = 0; i < 8; ++i) m.set(i);
    return m;
}

SubsetMask evens() {
    SubsetMask m(16);
    for (PointIndex i = 0; i < 16; i += 2) m.set(i);
    return m;
}

const DPlumpParams kGridParams{1.0 / 16.0, 0, 6.0, 8.0};

bool has_stage(const CubeCandidateCert& c, const std::string& stage) {
    return std::find(c.failed_stages.begin(), c.failed_stages.end(), stage) != c.failed_stages.end();
}

} // namespace

TEST_CASE("cube_plumpness_params", "[characterization][forward]") {
    const auto a = cube_plumpness_params({1.0 / 12.0, 1.0, 2.0}, 0, 1.0);
    CHECK(a.dplump.b0 == 1.0);
    CHECK(a.dplump.B0 == 3.0);
    REQUIRE(a.plump);
    CHECK(a.plump->b == Approx(1.0 / 36.0));
    CHECK(a.plump->R == Approx(9.0));

    const auto b = cube_plumpness_params({1.0 / 16.0, 2.0, 16.0}, 0, 7.0);
    CHECK(b.dplump.b0 == 2.0);
    CHECK(b.dplump.B0 == 18.0);
    CHECK(b.dplump.m == 0);

    const auto c = cube_plumpness_params({1.0 / 16.0, 2.0, 16.0}, 3, 0.0);
    CHECK_FALSE(c.plump);
    CHECK(c.dplump.m == 3);
}

TEST_CASE("cubes of the adapted grid16 system are plump", "[characterization][forward]") {
    const auto g = oracle::grid16();
    const auto sys = build_adapted_points(g, lower_half(), kGridParams);
    const auto cubes = build_cube_system(g, sys, build_order(g, sys));
    const auto r = verify_all_cubes_plump(g, cubes);
    CHECK(r.ok());
    CHECK(r.cubes.size() == 1 + 2 + 16);
    // the root cube has an empty complement, leaves are singletons
    CHECK(r.cubes.front().outside_certified);
    CHECK(r.cubes.back().inside_certified);
}

TEST_CASE("forward characterization on random clouds", "[characterization][forward][property]") {
    std::mt19937_64 rng(71);
    std::uniform_int_distribution<std::size_t> size(16, 120);
    for (int t = 0; t < 20; ++t) {
        const auto s = oracle::random_space(rng, size(rng));
        const auto sys = build_plain_points(s, make_net_params(s, 1.0 / 16.0, 1.0, 1.0));
        const auto cubes = build_cube_system(s, sys, build_order(s, sys));
        const auto r = verify_all_cubes_plump(s, cubes);
        INFO("trial " << t);
        CHECK(r.failures == 0);
        // the plump form of the same statement, via the parameter conversion
        for (const auto& level : cubes.levels()) {
            const auto& q = level.cubes.front();
            const auto pp = cube_plumpness_params(cubes.params(), level.k, s.diameter_of(q.members));
            const auto transported = dplump_to_plump(pp.dplump);
            if (pp.plump) CHECK(transported.b == Approx(pp.plump->b));
            CHECK(check_plump(s, SubsetMask::from_indices(s.size(), q.members), transported).certified);
        }
    }
}

TEST_CASE("certify_cube_candidate accepts the lower half of grid16", "[characterization][converse]") {
    const auto g = oracle::grid16();
    const auto cert = certify_cube_candidate(g, lower_half(), kGridParams);
    REQUIRE(cert.accepted());
    REQUIRE(cert.constraints.size() == 2);
    CHECK(cert.constraints[0].lhs == 7.0);
    CHECK(cert.constraints[0].rhs == 8.0);
    CHECK(cert.constraints[1].lhs == 6.0);
    CHECK(cert.constraints[1].rhs == 6.0);
    CHECK(cert.cube_params->c1 == 2.0);
    CHECK(cert.cube_params->C1 == 16.0);
    CHECK(*cert.cube_alpha == 0);
    REQUIRE(cert.match);
    CHECK(cert.match->mode == "full");
    CHECK(cert.match->equal);
    CHECK(cert.match->members == PointSet{0, 1, 2, 3, 4, 5, 6, 7});
    CHECK(cert.cubes->cube(0, 0).members == cert.match->members);
    // the net hypothesis follows from the separation constraint
    CHECK(12.0 * cert.points->params.C0 * cert.points->params.delta <= cert.points->params.c0);
}

TEST_CASE("certify_cube_candidate rejects the even points", "[characterization][converse]") {
    const auto g = oracle::grid16();
    const auto cert = certify_cube_candidate(g, evens(), kGridParams);
    REQUIRE_FALSE(cert.accepted());
    // diam 14 > 8 as well as the counterexample
    CHECK(cert.failed_stages == std::vector<std::string>{"constraints", "dplump_inside", "dplump_outside"});
    REQUIRE(cert.dplump_inside->counterexample);
    const auto& cx = *cert.dplump_inside->counterexample;
    CHECK(cx.y == 0);
    CHECK(cx.scale == 0.0);
    CHECK_FALSE(check_dplump_at(g, evens(), kGridParams, cx.y, static_cast<int>(cx.scale)));
    CHECK_FALSE(cert.points);
}

TEST_CASE("certify_cube_candidate edge cases", "[characterization][converse]") {
    const auto g = oracle::grid16();

    SECTION("whole space as the root cube") {
        const auto cert = certify_cube_candidate(g, SubsetMask(16, true), DPlumpParams{1.0 / 16.0, 0, 12.0, 16.0});
        REQUIRE(cert.accepted());
        CHECK(cert.match->equal);
        CHECK(cert.dplump_outside->certified);
    }
    SECTION("empty subset") {
        REQUIRE_THROWS_AS(certify_cube_candidate(g, SubsetMask(16), kGridParams), Error);
    }
    SECTION("capped resolution uses descendant centres") {
        const auto cert = certify_cube_candidate(g, lower_half(), kGridParams, LevelRange{std::nullopt, 0});
        REQUIRE(cert.match);
        CHECK(cert.match->mode == "capped");
        CHECK_FALSE(cert.cubes);
        CHECK(cert.match->closed == PointSet{0});
        // only centre 13 is claimed by the other cube
        CHECK(cert.match->open.size() == 15);
        CHECK_FALSE(cert.match->open_in_subset);
        CHECK_FALSE(cert.match->subset_in_closed);
        CHECK(cert.failed_stages == std::vector<std::string>{"match"});
    }
    SECTION("diameter constraint alone") {
        // {0..7} is two-sided d-plump but does not fit under B0 = 4
        const auto cert = certify_cube_candidate(g, lower_half(), DPlumpParams{1.0 / 16.0, 0, 3.0, 4.0});
        REQUIRE_FALSE(cert.accepted());
        CHECK(cert.failed_stages.front() == "constraints");
        CHECK_FALSE(cert.constraints[0].holds);
    }
}

TEST_CASE("converse round trip on random subsets", "[characterization][converse][property]") {
    std::mt19937_64 rng(73);
    int accepted = 0, rejected = 0;
    for (int t = 0; t < 150; ++t) {
        const auto s = oracle::random_space(rng, 32);
        const auto E = t % 3 == 0 ? oracle::random_subset(rng, 32, 0.3) : oracle::random_ball_subset(rng, s);
        if (E.none()) continue;
        const auto ap = auto_params(s, E, 1.0 / 16.0);
        const DPlumpParams p = ap.params ? *ap.params : DPlumpParams{1.0 / 16.0, 0, 0.75 * s.diameter(), s.diameter()};
        const auto cert = certify_cube_candidate(s, E, p);
        INFO("trial " << t);
        if (cert.accepted()) {
            ++accepted;
            CHECK(cert.match->mode == "full");
            CHECK(cert.match->members == E.members());
            CHECK(cert.cube_params->c1 == Approx(p.b0 / 3.0));
            CHECK(cert.cube_params->C1 == 2.0 * p.B0);
            CHECK(cert.cubes_report->ok());
        } else {
            ++rejected;
            for (const auto* v : {&cert.dplump_inside, &cert.dplump_outside}) {
                if (!*v || (*v)->certified) continue;
                const auto& cx = *(*v)->counterexample;
                const auto side = v == &cert.dplump_inside ? E : E.complement();
                CHECK_FALSE(check_dplump_at(s, side, p, cx.y, static_cast<int>(cx.scale)));
                CHECK_FALSE(oracle::corkscrew(s, side, cx.y, p.B0 * generation_scale(p.delta, int(cx.scale)),
                                              p.b0 * generation_scale(p.delta, int(cx.scale))));
            }
            for (const auto& c : cert.constraints)
                if (!c.holds) CHECK(c.lhs > c.rhs);
        }
        // auto_params never returns parameters the pipeline's checks reject
        if (ap.params) {
            CHECK_FALSE(has_stage(cert, "constraints"));
            CHECK_FALSE(has_stage(cert, "dplump_inside"));
            CHECK_FALSE(has_stage(cert, "dplump_outside"));
        }
    }
    CHECK(accepted > 10);
    CHECK(rejected > 10);
}

TEST_CASE("auto_params", "[characterization][auto]") {
    const auto g = oracle::grid16();

    const auto a = auto_params(g, lower_half(), 1.0 / 16.0);
    REQUIRE(a.params);
    CHECK(a.params->m == 0);
    CHECK(a.params->b0 >= 6.0);
    CHECK(a.params->b0 <= 8.0);
    CHECK(certify_cube_candidate(g, lower_half(), *a.params).accepted());

    const auto wide = auto_params(g, lower_half(), 0.1);
    CHECK_FALSE(wide.params);
    CHECK(wide.binding.rfind("separation_ratio", 0) == 0);

    SubsetMask ends(16);
    ends.set(0);
    ends.set(15);
    const auto e = auto_params(g, ends, 1.0 / 16.0);
    CHECK_FALSE(e.params);
    CHECK(e.binding.rfind("dplump_inside", 0) == 0);
    REQUIRE(e.failure);
    CHECK(e.failure->counterexample);

    // an isolated point is a cube of its own
    const auto line = make_space({{0, 1, 2, 10}, {1, 0, 1, 9}, {2, 1, 0, 8}, {10, 9, 8, 0}});
    SubsetMask far(4);
    far.set(3);
    const auto f = auto_params(line, far, 1.0 / 16.0);
    REQUIRE(f.params);
    CHECK(certify_cube_candidate(line, far, *f.params).accepted());

    REQUIRE_THROWS_AS(auto_params(g, SubsetMask(16), 1.0 / 16.0), Error);
}

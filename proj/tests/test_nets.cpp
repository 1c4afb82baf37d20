#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "dyadic/nets.hpp"
#include "oracles.hpp"

using namespace dyadic;

namespace {

std::vector<PointIndex> points_of(const NetLevel& level) {
    std::vector<PointIndex> out;
    for (const auto& c : level.centers) out.push_back(c.point);
    return out;
}

std::string error_code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return {};
}

SubsetMask lower_half() {
    SubsetMask m(16);
    for (PointIndex i = 0; i < 8; ++i) m.set(i);
    return m;
}

const DPlumpParams kGridParams{1.0 / 16.0, 0, 6.0, 8.0};

// every non-centre eligible point is within the separation radius of a
// centre it could have joined
void check_maximal(const FiniteMetricSpace& s, const DyadicPointSystem& sys) {
    for (const auto& level : sys.levels) {
        const double sep = sys.separation(level.k);
        const bool constrained = sys.constrained(level.k);
        for (PointIndex x = 0; x < s.size(); ++x) {
            if (sys.index_of(level.k, x)) continue;
            Side side = Side::unconstrained;
            if (constrained) {
                const bool in = sys.subset->contains(x);
                side = in ? Side::inside : Side::outside;
                const auto other = in ? sys.subset->complement() : *sys.subset;
                if (dist_to_set(s, x, other) < sep) continue; // not eligible
                // level m keeps a single inside centre by design
                if (level.k == *sys.constrained_from && in) continue;
            }
            bool blocked = false;
            for (const auto& c : level.centers)
                if ((!constrained || c.side == side) && s(x, c.point) < sep) blocked = true;
            INFO("k=" << level.k << " x=" << x);
            CHECK(blocked);
        }
    }
}

void check_persistent(const DyadicPointSystem& sys) {
    for (int k = sys.params.k_min; k < sys.params.k_max; ++k) {
        if (sys.adapted() && k < *sys.constrained_from) continue;
        for (const auto& c : sys.level(k).centers) {
            const auto idx = sys.index_of(k + 1, c.point);
            REQUIRE(idx);
            CHECK(sys.level(k + 1).centers[*idx].side == c.side);
        }
    }
}

} // namespace

TEST_CASE("plain points on grid16", "[nets]") {
    const auto g = oracle::grid16();
    const auto p = make_net_params(g, 1.0 / 16.0, 1.0, 1.0);
    CHECK(p.k_min == -1);
    CHECK(p.k_max == 1);
    const auto sys = build_plain_points(g, p);
    CHECK(points_of(sys.level(-1)) == std::vector<PointIndex>{0});
    CHECK(sys.level(1).centers.size() == 16);
    CHECK(sys.level(0).centers.size() == 16);
    CHECK_FALSE(sys.adapted());
    CHECK(verify_point_system(g, sys).ok());
}

TEST_CASE("plain points on tiny spaces", "[nets]") {
    const auto one = make_space({{0.0}});
    const auto sys = build_plain_points(one, make_net_params(one, 0.5, 1.0, 1.0, -2, 2));
    for (const auto& level : sys.levels) CHECK(points_of(level) == std::vector<PointIndex>{0});
    CHECK(verify_point_system(one, sys).ok());

    const auto two = make_space({{0, 1}, {1, 0}});
    const auto s2 = build_plain_points(two, make_net_params(two, 0.5, 1.0, 1.0, 1, 1));
    CHECK(points_of(s2.level(1)) == std::vector<PointIndex>{0, 1});
}

TEST_CASE("net parameters are validated", "[nets][errors]") {
    const auto g = oracle::grid16();
    CHECK(error_code_of([&] { make_net_params(g, 1.5, 1.0, 1.0); }) == "InvalidParams");
    CHECK(error_code_of([&] { make_net_params(g, 0.5, 2.0, 1.0); }) == "InvalidParams");
    CHECK(error_code_of([&] { make_net_params(g, 0.5, 1.0, 1.0, 3, 2); }) == "InvalidParams");
}

TEST_CASE("adapted points on grid16 with E = {0..7}", "[nets][adapted]") {
    const auto g = oracle::grid16();
    const auto sys = build_adapted_points(g, lower_half(), kGridParams);
    REQUIRE(sys.adapted());
    CHECK(sys.params.k_min == -1);
    CHECK(sys.params.k_max == 1);
    CHECK(sys.params.c0 == 6.0);
    CHECK(sys.params.C0 == 8.0);
    CHECK(sys.level(-1).centers == std::vector<Center>{{0, Side::unconstrained}});
    CHECK(sys.level(0).centers == std::vector<Center>{{0, Side::inside}, {13, Side::outside}});
    REQUIRE(sys.alpha0);
    CHECK(*sys.alpha0 == 0);
    const auto& leaves = sys.level(1).centers;
    REQUIRE(leaves.size() == 16);
    for (PointIndex i = 0; i < 16; ++i) CHECK(leaves[i] == Center{i, i < 8 ? Side::inside : Side::outside});
    CHECK(verify_point_system(g, sys).ok());
}

TEST_CASE("adapted points with E = X", "[nets][adapted]") {
    const auto g = oracle::grid16();
    const auto sys = build_adapted_points(g, SubsetMask(16, true), DPlumpParams{1.0 / 16.0, 0, 12.0, 16.0});
    CHECK(sys.level(0).centers.size() == 1);
    for (int k = 0; k <= sys.params.k_max; ++k)
        for (const auto& c : sys.level(k).centers) CHECK(c.side == Side::inside);
    CHECK(sys.level(sys.params.k_max).centers.size() == 16);
    CHECK(verify_point_system(g, sys).ok());
}

TEST_CASE("adapted points reject thin or empty subsets", "[nets][adapted][errors]") {
    const auto g = oracle::grid16();
    SubsetMask evens(16);
    for (PointIndex i = 0; i < 16; i += 2) evens.set(i);
    // every even point is at distance 1 from an odd one, below the margin 6
    try {
        build_adapted_points(g, evens, kGridParams);
        FAIL("expected an exception");
    } catch (const Error& e) {
        CHECK(e.code() == "EmptyEligibleSet");
        CHECK(e.location() == std::vector<std::int64_t>{0, 0});
    }
    CHECK(error_code_of([&] { build_adapted_points(g, SubsetMask(16), kGridParams); }) == "EmptySubset");
    CHECK(error_code_of([&] { build_adapted_points(g, lower_half(), kGridParams, LevelRange{1, std::nullopt}); }) ==
          "InvalidParams");
}

TEST_CASE("verify_point_system reports planted faults", "[nets][verify]") {
    const auto g = oracle::grid16();
    auto sys = build_plain_points(g, make_net_params(g, 1.0 / 16.0, 1.0, 1.0));

    SECTION("separation") {
        auto bad = sys;
        bad.params.c0 = bad.params.C0 = 2.0; // level-0 neighbours now too close
        const auto r = verify_point_system(g, bad);
        CHECK(r.count("separation") > 0);
    }
    SECTION("covering and nesting") {
        auto bad = sys;
        bad.level(0).centers.pop_back();
        const auto r = verify_point_system(g, bad);
        CHECK(r.count("covering") == 1);
        CHECK(r.count("nesting") == 0);
        bad.level(1).centers.erase(bad.level(1).centers.begin());
        CHECK(verify_point_system(g, bad).count("nesting") > 0);
    }
    SECTION("adapted margin and uniqueness") {
        auto ad = build_adapted_points(g, lower_half(), kGridParams);
        ad.level(0).centers = {{0, Side::inside}, {6, Side::inside}, {13, Side::outside}};
        const auto r = verify_point_system(g, ad);
        CHECK(r.count("margin") > 0);
        CHECK(r.count("level_m_uniqueness") > 0);
        CHECK(std::is_sorted(r.violations.begin(), r.violations.end()));
    }
    SECTION("side tag") {
        auto ad = build_adapted_points(g, lower_half(), kGridParams);
        ad.level(1).centers[3].side = Side::outside;
        CHECK(verify_point_system(g, ad).count("side_tag") > 0);
    }
}

TEST_CASE("plain nets on random clouds", "[nets][property]") {
    std::mt19937_64 rng(31);
    std::uniform_int_distribution<std::size_t> size(16, 120);
    for (int t = 0; t < 100; ++t) {
        const auto s = oracle::random_space(rng, size(rng));
        const auto p = make_net_params(s, 1.0 / 16.0, 1.0, 1.0);
        const auto sys = build_plain_points(s, p);
        const auto report = verify_point_system(s, sys);
        INFO("trial " << t);
        CHECK(report.ok());
        CHECK(sys.level(p.k_min).centers.size() == 1);
        CHECK(sys.level(p.k_max).centers.size() == s.size());
        check_maximal(s, sys);
        check_persistent(sys);
        if (t < 10) {
            const auto again = build_plain_points(s, p);
            for (int k = p.k_min; k <= p.k_max; ++k) CHECK(again.level(k).centers == sys.level(k).centers);
        }
    }
}

TEST_CASE("adapted nets on random clouds", "[nets][adapted][property]") {
    std::mt19937_64 rng(37);
    int built = 0;
    for (int t = 0; t < 300 && built < 40; ++t) {
        const auto s = oracle::random_space(rng, 40);
        const auto E = oracle::random_ball_subset(rng, s);
        if (E.none()) continue;
        const double B0 = std::nextafter(std::max(s.diameter_of(E.members()), s.min_positive_distance()), kUnbounded);
        const DPlumpParams p{1.0 / 16.0, 0, B0 * 0.75, B0};
        DyadicPointSystem sys;
        try {
            sys = build_adapted_points(s, E, p);
        } catch (const Error&) {
            continue;
        }
        ++built;
        INFO("trial " << t);
        CHECK(verify_point_system(s, sys).ok());
        check_maximal(s, sys);
        check_persistent(sys);
        CHECK(sys.level(sys.params.k_max).centers.size() == s.size());
    }
    CHECK(built >= 10);
}

#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "dyadic/metric.hpp"
#include "oracles.hpp"

using namespace dyadic;

TEST_CASE("validate_metric accepts a single point", "[metric]") {
    auto v = validate_metric({{0.0}});
    REQUIRE(v.valid());
    REQUIRE(v.space->size() == 1);
    REQUIRE(v.space->min_positive_distance() == kUnbounded);
}

TEST_CASE("validate_metric accepts the 16-point line grid", "[metric]") {
    auto v = validate_metric(oracle::line_matrix(16));
    REQUIRE(v.valid());
    REQUIRE(v.space->diameter() == 15.0);
    REQUIRE(v.space->min_positive_distance() == 1.0);
}

TEST_CASE("validate_metric names the failing pair or triple", "[metric][errors]") {
    using K = MetricViolation::Kind;
    auto tri = validate_metric({{0, 1, 5}, {1, 0, 1}, {5, 1, 0}});
    REQUIRE_FALSE(tri.valid());
    CHECK(tri.violation->kind == K::TriangleViolation);
    CHECK(tri.violation->indices() == std::vector<std::size_t>{0, 1, 2});

    auto asym = validate_metric({{0, 1}, {2, 0}});
    CHECK(asym.violation->kind == K::Asymmetric);
    CHECK(asym.violation->indices() == std::vector<std::size_t>{0, 1});

    auto neg = validate_metric({{0, -1}, {-1, 0}});
    CHECK(neg.violation->kind == K::NegativeOrNaN);

    auto nan = validate_metric({{0, std::nan("")}, {1, 0}});
    CHECK(nan.violation->kind == K::NegativeOrNaN);

    auto diag = validate_metric({{0, 1}, {1, 3}});
    CHECK(diag.violation->kind == K::NonzeroDiagonal);
    CHECK(diag.violation->indices() == std::vector<std::size_t>{1});

    auto zero = validate_metric({{0, 0}, {0, 0}});
    CHECK(zero.violation->kind == K::ZeroOffDiagonal);

    REQUIRE_THROWS_AS(validate_metric({{0, 1}, {1}}), Error);
    REQUIRE_THROWS_AS(make_space({{0, 1, 5}, {1, 0, 1}, {5, 1, 0}}), Error);
}

TEST_CASE("validate_metric accepts Euclidean clouds", "[metric][property]") {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<std::size_t> size(2, 60);
    for (int t = 0; t < 100; ++t) {
        auto v = validate_metric(euclidean_matrix(oracle::random_cloud(rng, size(rng))));
        REQUIRE(v.valid());
    }
}

TEST_CASE("open_ball uses strict inequality", "[metric]") {
    const auto g = oracle::grid16();
    CHECK(open_ball(g, 1, 2.0) == PointSet{0, 1, 2});
    CHECK(open_ball(g, 5, 0.0).empty());
    CHECK(open_ball(g, 0, 100.0).size() == 16);
}

TEST_CASE("open_ball properties", "[metric][property]") {
    std::mt19937_64 rng(5);
    const auto s = oracle::random_space(rng, 40);
    const auto radii = s.realized_distances();
    for (PointIndex x = 0; x < s.size(); ++x) {
        CHECK(open_ball(s, x, 0.0).empty());
        PointSet prev;
        for (double r : radii) {
            auto b = open_ball(s, x, r);
            CHECK(std::binary_search(b.begin(), b.end(), x));
            CHECK(std::includes(b.begin(), b.end(), prev.begin(), prev.end()));
            CHECK(b == oracle::ball(s, x, r));
            prev = std::move(b);
        }
    }
}

TEST_CASE("dist_to_set", "[metric]") {
    const auto g = oracle::grid16();
    const PointSet upper{8, 9, 10, 11, 12, 13, 14, 15};
    CHECK(dist_to_set(g, 0, upper) == 8.0);
    CHECK(dist_to_set(g, 9, upper) == 0.0);
    CHECK(dist_to_set(g, 3, PointSet{}) == kUnbounded);
    CHECK(dist_to_set(g, 3, SubsetMask(16)) == kUnbounded);
    CHECK(dist_to_set(g, 0, SubsetMask::from_indices(16, upper)) == 8.0);
}

TEST_CASE("dist_to_set of a union is the min", "[metric][property]") {
    std::mt19937_64 rng(8);
    const auto s = oracle::random_space(rng, 30);
    for (int t = 0; t < 50; ++t) {
        const auto S = oracle::random_subset(rng, 30, 0.2), T = oracle::random_subset(rng, 30, 0.2);
        SubsetMask U(30);
        for (PointIndex i = 0; i < 30; ++i) U.set(i, S.contains(i) || T.contains(i));
        for (PointIndex x = 0; x < 30; ++x)
            CHECK(dist_to_set(s, x, U) == std::min(dist_to_set(s, x, S), dist_to_set(s, x, T)));
    }
}

TEST_CASE("subset mask complement is an involution", "[metric]") {
    std::mt19937_64 rng(3);
    const auto m = oracle::random_subset(rng, 25);
    CHECK(m.complement().complement() == m);
    CHECK(m.count() + m.complement().count() == 25);
    REQUIRE_THROWS_AS(SubsetMask::from_indices(3, PointSet{3}), Error);
}

TEST_CASE("doubling constant", "[metric][doubling]") {
    CHECK(doubling_constant(make_space({{0.0}})).constant == 1);

    // frozen from the exhaustive-combination oracle
    const auto g = oracle::grid16();
    const auto r = doubling_constant(g);
    CHECK(r.exact);
    CHECK(r.constant == 3);

    const auto two = make_space({{0, 1}, {1, 0}});
    CHECK(doubling_constant(two).constant == 2);
}

TEST_CASE("doubling constant agrees with the combination oracle", "[metric][doubling][oracle]") {
    std::mt19937_64 rng(21);
    for (int t = 0; t < 8; ++t) {
        const auto s = oracle::random_space(rng, 9);
        CHECK(doubling_constant(s).constant == oracle::doubling(s));
    }
    CHECK(doubling_constant(oracle::grid16()).constant == oracle::doubling(oracle::grid16()));
}

TEST_CASE("doubling constant falls back to a greedy bound above 64 points", "[metric][doubling]") {
    const auto line = make_space(oracle::line_matrix(70));
    const auto r = doubling_constant(line);
    CHECK_FALSE(r.exact);
    CHECK(r.constant >= 3);
}

#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dyadic/error.hpp"
#include "dyadic/metric.hpp"
#include "dyadic/plumpness.hpp"

namespace dyadic {

/// Which part of the space a centre is constrained to: the target subset E,
/// its complement, or neither (plain levels).
enum class Side : std::uint8_t { unconstrained, inside, outside };

inline std::string to_string(Side s) {
    switch (s) {
        case Side::inside: return "inside";
        case Side::outside: return "outside";
        default: return "unconstrained";
    }
}

struct NetParams {
    double delta = 1.0 / 16.0;
    double c0 = 1.0; // separation factor
    double C0 = 1.0; // covering factor
    int k_min = 0;
    int k_max = 0;
};

inline void validate(const NetParams& p) {
    if (!(p.delta > 0.0 && p.delta < 1.0)) throw Error("InvalidParams", "delta must lie in (0,1)");
    if (!(p.c0 > 0.0) || !(p.C0 >= p.c0) || !std::isfinite(p.C0))
        throw Error("InvalidParams", "need 0 < c0 <= C0");
    if (p.k_min > p.k_max) throw Error("InvalidParams", "k_min must not exceed k_max");
}

/// Largest k with factor*delta^k > diameter: a single centre covers X.
inline int default_k_min(const FiniteMetricSpace& space, double factor, double delta) {
    if (space.size() <= 1) return 0;
    int k = static_cast<int>(std::floor(std::log(space.diameter() / factor) / std::log(delta)));
    while (!(factor * generation_scale(delta, k) > space.diameter())) --k;
    while (factor * generation_scale(delta, k + 1) > space.diameter()) ++k;
    return k;
}

/// Smallest k >= from with factor*delta^k below the minimum positive
/// distance: every point is a centre at that level.
inline int default_k_max(const FiniteMetricSpace& space, double factor, double delta, int from) {
    int k = from;
    while (!(factor * generation_scale(delta, k) < space.min_positive_distance())) ++k;
    return k;
}

inline NetParams make_net_params(const FiniteMetricSpace& space, double delta, double c0, double C0,
                                 std::optional<int> k_min = {}, std::optional<int> k_max = {}) {
    NetParams p{delta, c0, C0, 0, 0};
    validate(NetParams{delta, c0, C0, 0, 0});
    p.k_min = k_min.value_or(default_k_min(space, c0, delta));
    p.k_max = k_max.value_or(default_k_max(space, C0, delta, p.k_min));
    validate(p);
    return p;
}

struct Center {
    PointIndex point = 0;
    Side side = Side::unconstrained;
    friend bool operator==(const Center&, const Center&) = default;
};

struct NetLevel {
    int k = 0;
    std::vector<Center> centers; // sorted by point index; alpha = position
};

/// Per-generation centre lists. Adapted systems additionally carry the
/// target subset, the first constrained generation m and the index alpha0
/// of the single inside centre at generation m.
struct DyadicPointSystem {
    NetParams params;
    std::optional<int> constrained_from;
    std::optional<SubsetMask> subset;
    std::optional<std::size_t> alpha0;
    std::vector<NetLevel> levels;

    bool adapted() const noexcept { return constrained_from.has_value(); }
    bool constrained(int k) const noexcept { return adapted() && k >= *constrained_from; }
    const NetLevel& level(int k) const { return levels.at(static_cast<std::size_t>(k - params.k_min)); }
    NetLevel& level(int k) { return levels.at(static_cast<std::size_t>(k - params.k_min)); }
    double separation(int k) const { return params.c0 * generation_scale(params.delta, k); }
    double covering(int k) const { return params.C0 * generation_scale(params.delta, k); }

    /// Position of `point` among the centres of generation k, if present.
    std::optional<std::size_t> index_of(int k, PointIndex point) const {
        const auto& cs = level(k).centers;
        auto it = std::lower_bound(cs.begin(), cs.end(), point,
                                   [](const Center& c, PointIndex p) { return c.point < p; });
        if (it == cs.end() || it->point != point) return std::nullopt;
        return static_cast<std::size_t>(it - cs.begin());
    }
};

namespace detail {

// Greedy maximal separated subset of `eligible`, seeded with `seeds`.
// Points are swept in ascending index.
inline std::vector<PointIndex> greedy_net(const FiniteMetricSpace& space, const std::vector<PointIndex>& seeds,
                                          const std::vector<std::uint8_t>& eligible, double separation) {
    std::vector<std::uint8_t> is_center(space.size(), 0);
    std::vector<PointIndex> centers = seeds;
    for (PointIndex s : seeds) is_center[s] = 1;
    for (PointIndex x = 0; x < space.size(); ++x) {
        if (!eligible[x] || is_center[x]) continue;
        bool blocked = false;
        for (std::uint32_t p : space.by_distance(x)) {
            if (!(space(x, p) < separation)) break;
            if (is_center[p]) {
                blocked = true;
                break;
            }
        }
        if (!blocked) {
            is_center[x] = 1;
            centers.push_back(x);
        }
    }
    std::sort(centers.begin(), centers.end());
    return centers;
}

inline NetLevel plain_level(int k, const std::vector<PointIndex>& points) {
    NetLevel level{k, {}};
    for (PointIndex p : points) level.centers.push_back({p, Side::unconstrained});
    return level;
}

} // namespace detail

/// Nested greedy maximal c0*delta^k-separated nets, coarse to fine.
inline DyadicPointSystem build_plain_points(const FiniteMetricSpace& space, const NetParams& params) {
    validate(params);
    DyadicPointSystem sys;
    sys.params = params;
    const std::vector<std::uint8_t> all(space.size(), 1);
    std::vector<PointIndex> prev;
    for (int k = params.k_min; k <= params.k_max; ++k) {
        auto centers = detail::greedy_net(space, prev, all, sys.separation(k));
        const double cover = sys.covering(k);
        for (PointIndex x = 0; x < space.size(); ++x) {
            if (!(dist_to_set(space, x, centers) < cover))
                throw Error("CoveringFailure", "point not covered at generation " + std::to_string(k),
                            {k, static_cast<std::int64_t>(x)});
        }
        sys.levels.push_back(detail::plain_level(k, centers));
        prev = std::move(centers);
    }
    return sys;
}

/// Optional overrides of the generation range.
struct LevelRange {
    std::optional<int> k_min;
    std::optional<int> k_max;
};

/// Dyadic points adapted to E: from generation m on, centres are kept at
/// distance >= b0*delta^k from the other side, each side is covered by its
/// own centres, and generation m has exactly one inside centre.
inline DyadicPointSystem build_adapted_points(const FiniteMetricSpace& space, const SubsetMask& subset,
                                              const DPlumpParams& p, LevelRange range = {}) {
    validate(p);
    if (subset.size() != space.size()) throw Error("SizeMismatch", "subset size differs from space size");
    if (subset.none()) throw Error("EmptySubset", "the empty set cannot be a cube");

    const std::size_t n = space.size();
    DyadicPointSystem sys;
    sys.params.delta = p.delta;
    sys.params.c0 = p.b0;
    sys.params.C0 = p.B0;
    sys.params.k_min = range.k_min.value_or(std::min(p.m, default_k_min(space, p.b0, p.delta)));
    sys.params.k_max = range.k_max.value_or(default_k_max(space, p.B0, p.delta, p.m));
    if (sys.params.k_min > p.m || sys.params.k_max < p.m)
        throw Error("InvalidParams", "level range must contain generation m", {sys.params.k_min, sys.params.k_max});
    sys.constrained_from = p.m;
    sys.subset = subset;

    const SubsetMask outside_mask = subset.complement();
    // margin[x] = dist(x, X \ F) for the side F containing x
    std::vector<double> margin(n);
    for (PointIndex x = 0; x < n; ++x)
        margin[x] = dist_to_set(space, x, subset.contains(x) ? outside_mask : subset);

    const std::vector<std::uint8_t> all(n, 1);
    std::vector<PointIndex> prev;
    for (int k = sys.params.k_min; k < p.m; ++k) {
        auto centers = detail::greedy_net(space, prev, all, sys.separation(k));
        sys.levels.push_back(detail::plain_level(k, centers));
        prev = std::move(centers);
    }

    std::vector<PointIndex> prev_side[2];
    for (int k = p.m; k <= sys.params.k_max; ++k) {
        const double sep = sys.separation(k);
        const double cover = sys.covering(k);
        std::vector<PointIndex> side_centers[2];
        for (int s = 0; s < 2; ++s) {
            const SubsetMask& F = s == 0 ? subset : outside_mask;
            const Side tag = s == 0 ? Side::inside : Side::outside;
            if (F.none()) continue;
            std::vector<std::uint8_t> eligible(n, 0);
            bool any = false;
            for (PointIndex x = 0; x < n; ++x) {
                eligible[x] = F.contains(x) && margin[x] >= sep;
                any |= eligible[x] != 0;
            }
            if (!any)
                throw Error("EmptyEligibleSet", "no point of the " + to_string(tag) + " side is deep enough at generation " +
                                                    std::to_string(k),
                            {k, s});
            auto centers = detail::greedy_net(space, k == p.m ? std::vector<PointIndex>{} : prev_side[s], eligible, sep);
            if (k == p.m && s == 0) {
                // one inside centre at generation m: the deepest eligible point
                PointIndex best = n;
                for (PointIndex x = 0; x < n; ++x)
                    if (eligible[x] && (best == n || margin[x] > margin[best])) best = x;
                centers = {best};
            }
            for (PointIndex x = 0; x < n; ++x) {
                if (F.contains(x) && !(dist_to_set(space, x, centers) < cover))
                    throw Error("SideCoveringFailure",
                                to_string(tag) + " point " + std::to_string(x) + " has no same-side centre within B0*delta^" +
                                    std::to_string(k),
                                {k, static_cast<std::int64_t>(x), s});
            }
            side_centers[s] = std::move(centers);
        }

        NetLevel level{k, {}};
        for (PointIndex x : side_centers[0]) level.centers.push_back({x, Side::inside});
        for (PointIndex x : side_centers[1]) level.centers.push_back({x, Side::outside});
        std::sort(level.centers.begin(), level.centers.end(),
                  [](const Center& a, const Center& b) { return a.point < b.point; });
        sys.levels.push_back(std::move(level));
        prev_side[0] = std::move(side_centers[0]);
        prev_side[1] = std::move(side_centers[1]);
    }

    const auto& level_m = sys.level(p.m).centers;
    for (std::size_t a = 0; a < level_m.size(); ++a)
        if (level_m[a].side == Side::inside) sys.alpha0 = a;
    return sys;
}

/// Checks separation, covering and nesting, plus the side constraints of
/// adapted systems. Never throws on a bad system; every failure is a
/// report entry.
inline VerificationReport verify_point_system(const FiniteMetricSpace& space, const DyadicPointSystem& sys) {
    VerificationReport report;
    auto add = [&](std::string check, std::vector<std::int64_t> loc, std::string detail = {}) {
        report.violations.push_back({std::move(check), std::move(loc), std::move(detail)});
    };
    const auto& P = sys.params;
    const std::size_t n = space.size();
    if (sys.levels.size() != static_cast<std::size_t>(P.k_max - P.k_min + 1)) {
        add("level_range", {P.k_min, P.k_max}, "level count does not match the generation range");
        return report;
    }
    if (sys.adapted() && (!sys.subset || sys.subset->size() != n)) {
        add("subset", {}, "adapted system without a subset of matching size");
        return report;
    }

    for (std::size_t li = 0; li < sys.levels.size(); ++li) {
        const auto& level = sys.levels[li];
        const int k = P.k_min + static_cast<int>(li);
        if (level.k != k) add("level_range", {k}, "generation label mismatch");
        const auto& cs = level.centers;
        bool in_range = true;
        for (std::size_t a = 0; a < cs.size(); ++a) {
            if (cs[a].point >= n) {
                add("index", {k, static_cast<std::int64_t>(a)}, "centre outside the space");
                in_range = false;
            }
        }
        if (!in_range) continue;

        const double sep = sys.separation(k), cover = sys.covering(k);
        for (std::size_t a = 0; a < cs.size(); ++a)
            for (std::size_t b = a + 1; b < cs.size(); ++b)
                if (!(space(cs[a].point, cs[b].point) >= sep))
                    add("separation", {k, static_cast<std::int64_t>(a), static_cast<std::int64_t>(b)});

        std::vector<PointIndex> pts;
        for (const auto& c : cs) pts.push_back(c.point);
        for (PointIndex x = 0; x < n; ++x)
            if (!(dist_to_set(space, x, pts) < cover)) add("covering", {k, static_cast<std::int64_t>(x)});

        const bool check_nesting = k < P.k_max && (!sys.adapted() || k >= *sys.constrained_from);
        if (check_nesting) {
            const auto& next = sys.levels[li + 1].centers;
            for (std::size_t a = 0; a < cs.size(); ++a) {
                bool found = std::any_of(next.begin(), next.end(), [&](const Center& c) { return c.point == cs[a].point; });
                if (!found) add("nesting", {k, static_cast<std::int64_t>(a)});
            }
        }

        if (!sys.adapted()) continue;
        const auto& E = *sys.subset;
        if (!sys.constrained(k)) {
            for (std::size_t a = 0; a < cs.size(); ++a)
                if (cs[a].side != Side::unconstrained) add("side_tag", {k, static_cast<std::int64_t>(a)});
            continue;
        }
        const SubsetMask outside_mask = E.complement();
        std::vector<PointIndex> side_pts[2];
        for (std::size_t a = 0; a < cs.size(); ++a) {
            const bool inside = E.contains(cs[a].point);
            if (cs[a].side != (inside ? Side::inside : Side::outside)) add("side_tag", {k, static_cast<std::int64_t>(a)});
            const double margin = dist_to_set(space, cs[a].point, inside ? outside_mask : E);
            if (!(margin >= sep)) add("margin", {k, static_cast<std::int64_t>(a)});
            side_pts[inside ? 0 : 1].push_back(cs[a].point);
        }
        for (PointIndex x = 0; x < n; ++x) {
            const int s = E.contains(x) ? 0 : 1;
            if (!(dist_to_set(space, x, side_pts[s]) < cover)) add("side_covering", {k, static_cast<std::int64_t>(x), s});
        }
        if (k == *sys.constrained_from) {
            std::size_t inside_count = side_pts[0].size();
            bool alpha_ok = sys.alpha0 && *sys.alpha0 < cs.size() && cs[*sys.alpha0].side == Side::inside &&
                            E.contains(cs[*sys.alpha0].point);
            if (inside_count != 1 || !alpha_ok)
                add("level_m_uniqueness", {k, static_cast<std::int64_t>(inside_count)});
        }
    }
    std::sort(report.violations.begin(), report.violations.end());
    return report;
}

} // namespace dyadic

#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dyadic/error.hpp"
#include "dyadic/metric.hpp"

namespace dyadic {

/// Corkscrew parameters: every ball B(y, r), y in E, r <= R, holds a ball of
/// radius b*r inside E.
struct PlumpParams {
    double R = 1.0;
    double b = 0.5;
};

/// Scale-quantised corkscrew parameters: radii B0*delta^k, k >= m, with
/// inner balls of radius b0*delta^k.
struct DPlumpParams {
    double delta = 0.5;
    int m = 0;
    double b0 = 0.5;
    double B0 = 1.0;
};

inline void validate(const PlumpParams& p) {
    if (!(p.R > 0.0) || !std::isfinite(p.R))
        throw Error("InvalidParams", "R must be positive and finite");
    if (!(p.b > 0.0 && p.b < 1.0)) throw Error("InvalidParams", "b must lie in (0,1)");
}

inline void validate(const DPlumpParams& p) {
    if (!(p.delta > 0.0 && p.delta < 1.0)) throw Error("InvalidParams", "delta must lie in (0,1)");
    if (!(p.b0 > 0.0) || !std::isfinite(p.b0)) throw Error("InvalidParams", "b0 must be positive");
    if (!(p.B0 >= p.b0) || !std::isfinite(p.B0)) throw Error("InvalidParams", "B0 must satisfy B0 >= b0");
}

/// z found for the check at (y, scale). `scale` is the generation k for
/// d-plumpness and the radius r for plumpness.
struct Witness {
    PointIndex y = 0;
    double scale = 0.0;
    PointIndex z = 0;
    friend bool operator==(const Witness&, const Witness&) = default;
};

/// A candidate centre z together with the nearest point of B(z, inner) that
/// falls outside B(y, outer) ∩ E.
struct Blocker {
    PointIndex z = 0;
    PointIndex blocking_point = 0;
};

struct Counterexample {
    PointIndex y = 0;
    double scale = 0.0;
    std::vector<Blocker> rejected;
};

struct PlumpnessVerdict {
    std::variant<PlumpParams, DPlumpParams> params;
    bool certified = false;
    std::vector<Witness> witnesses;
    std::optional<Counterexample> counterexample;

    bool generational() const { return std::holds_alternative<DPlumpParams>(params); }
};

struct CheckOptions {
    // keep the full (y, scale) -> z map; off for bulk verification
    bool record_witnesses = true;
};

namespace detail {

/// Nearest point of B(z, inner) outside B(y, outer) ∩ set, if any.
inline std::optional<PointIndex> blocking_point(const FiniteMetricSpace& space, const SubsetMask& set,
                                                PointIndex y, double outer, double inner, PointIndex z) {
    for (std::uint32_t p : space.by_distance(z)) {
        if (!(space(z, p) < inner)) break;
        if (!set.contains(p) || !(space(y, p) < outer)) return p;
    }
    return std::nullopt;
}

/// Lowest-index z with B(z, inner) ⊆ B(y, outer) ∩ set. Only points of the
/// target can qualify (z lies in its own ball), so the scan is restricted
/// to them.
inline std::optional<PointIndex> find_inner_ball(const FiniteMetricSpace& space, const SubsetMask& set,
                                                 PointIndex y, double outer, double inner,
                                                 std::vector<PointIndex>& scratch) {
    scratch.clear();
    auto ord = space.by_distance(y);
    const std::size_t cnt = space.ball_count(y, outer);
    for (std::size_t t = 0; t < cnt; ++t)
        if (set.contains(ord[t])) scratch.push_back(ord[t]);
    std::sort(scratch.begin(), scratch.end());
    for (PointIndex z : scratch)
        if (!blocking_point(space, set, y, outer, inner, z)) return z;
    return std::nullopt;
}

inline Counterexample make_counterexample(const FiniteMetricSpace& space, const SubsetMask& set, PointIndex y,
                                          double scale, double outer, double inner) {
    Counterexample cx{y, scale, {}};
    cx.rejected.reserve(space.size());
    for (PointIndex z = 0; z < space.size(); ++z) {
        auto p = blocking_point(space, set, y, outer, inner, z);
        cx.rejected.push_back({z, p.value_or(z)});
    }
    return cx;
}

} // namespace detail

/// Last generation that needs checking: the first k >= m whose inner radius
/// b0*delta^k drops below the minimum positive distance. Beyond it the
/// inner ball is {y} and z = y always succeeds.
inline int resolution_generation(const FiniteMetricSpace& space, const DPlumpParams& p) {
    int k = p.m;
    while (!(p.b0 * generation_scale(p.delta, k) < space.min_positive_distance())) ++k;
    return k;
}

/// Single-instance d-plump check at (y, k).
inline std::optional<PointIndex> check_dplump_at(const FiniteMetricSpace& space, const SubsetMask& set,
                                                 const DPlumpParams& p, PointIndex y, int k) {
    std::vector<PointIndex> scratch;
    const double s = generation_scale(p.delta, k);
    return detail::find_inner_ball(space, set, y, p.B0 * s, p.b0 * s, scratch);
}

/// Single-instance plump check at (y, r).
inline std::optional<PointIndex> check_plump_at(const FiniteMetricSpace& space, const SubsetMask& set,
                                                const PlumpParams& p, PointIndex y, double r) {
    std::vector<PointIndex> scratch;
    return detail::find_inner_ball(space, set, y, r, p.b * r, scratch);
}

/// Decides d-plumpness of `set`. The counterexample, when there is one, is
/// the lexicographically smallest failing (y, k).
inline PlumpnessVerdict check_dplump(const FiniteMetricSpace& space, const SubsetMask& set, const DPlumpParams& p,
                                     const CheckOptions& options = {}) {
    validate(p);
    PlumpnessVerdict verdict{p, true, {}, std::nullopt};
    const int k_res = resolution_generation(space, p);
    std::vector<PointIndex> scratch;
    for (PointIndex y = 0; y < space.size(); ++y) {
        if (!set.contains(y)) continue;
        for (int k = p.m; k <= k_res; ++k) {
            const double s = generation_scale(p.delta, k);
            const double outer = p.B0 * s, inner = p.b0 * s;
            auto z = detail::find_inner_ball(space, set, y, outer, inner, scratch);
            if (!z) {
                verdict.certified = false;
                verdict.witnesses.clear();
                verdict.counterexample =
                    detail::make_counterexample(space, set, y, static_cast<double>(k), outer, inner);
                return verdict;
            }
            if (options.record_witnesses) verdict.witnesses.push_back({y, static_cast<double>(k), *z});
        }
    }
    return verdict;
}

/// Radii at which B(y, r) ∩ E or the family {B(z, b r)} can change, capped
/// at R, plus R itself. Both sets are constant on every interval between
/// consecutive entries, so checking these radii decides the condition.
inline std::vector<double> critical_radii(const FiniteMetricSpace& space, const PlumpParams& p) {
    std::vector<double> radii{p.R};
    for (double d : space.realized_distances()) {
        if (d <= p.R) radii.push_back(d);
        if (d / p.b <= p.R) radii.push_back(d / p.b);
    }
    std::sort(radii.begin(), radii.end());
    radii.erase(std::unique(radii.begin(), radii.end()), radii.end());
    return radii;
}

inline PlumpnessVerdict check_plump(const FiniteMetricSpace& space, const SubsetMask& set, const PlumpParams& p,
                                    const CheckOptions& options = {}) {
    validate(p);
    PlumpnessVerdict verdict{p, true, {}, std::nullopt};
    const auto radii = critical_radii(space, p);
    std::vector<PointIndex> scratch;
    for (PointIndex y = 0; y < space.size(); ++y) {
        if (!set.contains(y)) continue;
        for (double r : radii) {
            auto z = detail::find_inner_ball(space, set, y, r, p.b * r, scratch);
            if (!z) {
                verdict.certified = false;
                verdict.witnesses.clear();
                verdict.counterexample = detail::make_counterexample(space, set, y, r, r, p.b * r);
                return verdict;
            }
            if (options.record_witnesses) verdict.witnesses.push_back({y, r, *z});
        }
    }
    return verdict;
}

/// Whether plumpness with `from` implies plumpness with `to` by shrinking
/// both parameters, or by enlarging R while keeping R*b bounded.
inline bool weaken_plump_params(const PlumpParams& from, const PlumpParams& to) {
    if (to.R <= from.R && to.b <= from.b) return true;
    return to.R >= from.R && to.R * to.b <= from.R * from.b;
}

/// Canonical d-plump parameters implied by plumpness: B0 = 1, b0 = b and m
/// the least integer with delta^m <= R.
inline DPlumpParams plump_to_dplump(const PlumpParams& p, double delta) {
    validate(p);
    if (!(delta > 0.0 && delta < 1.0)) throw Error("InvalidParams", "delta must lie in (0,1)");
    int m = static_cast<int>(std::ceil(std::log(p.R) / std::log(delta)));
    while (generation_scale(delta, m - 1) <= p.R) --m;
    while (generation_scale(delta, m) > p.R) ++m;
    return DPlumpParams{delta, m, p.b, 1.0};
}

/// Extremal plump parameters implied by d-plumpness: b = delta*b0/B0 and
/// R = B0*delta^(m-1).
inline PlumpParams dplump_to_plump(const DPlumpParams& p) {
    validate(p);
    return PlumpParams{p.B0 * generation_scale(p.delta, p.m - 1), p.delta * p.b0 / p.B0};
}

} // namespace dyadic

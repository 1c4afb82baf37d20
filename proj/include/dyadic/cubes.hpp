#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "dyadic/error.hpp"
#include "dyadic/metric.hpp"
#include "dyadic/nets.hpp"
#include "dyadic/parallel.hpp"
#include "dyadic/partial_order.hpp"

namespace dyadic {

struct CubeParams {
    double delta = 1.0 / 16.0;
    double c1 = 1.0 / 3.0; // inner-ball factor
    double C1 = 2.0;       // outer-ball factor
};

/// Cube parameters induced by a net with factors (c0, C0).
inline CubeParams cube_params_for(const NetParams& p) { return {p.delta, p.c0 / 3.0, 2.0 * p.C0}; }

struct Cube {
    PointIndex center = 0;
    PointSet members; // Q
    PointSet closed;  // descendant centres
    PointSet open;    // complement of the other closed cubes of the generation
};

struct CubeLevel {
    int k = 0;
    std::vector<Cube> cubes;
};

class CubeSystem {
public:
    CubeSystem() = default;
    CubeSystem(CubeParams params, std::size_t n, std::vector<CubeLevel> levels)
        : params_(params), n_(n), levels_(std::move(levels)) {
        owner_.resize(levels_.size());
        for (std::size_t li = 0; li < levels_.size(); ++li) {
            owner_[li].assign(n_, kNoCube);
            for (std::size_t a = 0; a < levels_[li].cubes.size(); ++a)
                for (PointIndex p : levels_[li].cubes[a].members)
                    if (p < n_ && owner_[li][p] == kNoCube) owner_[li][p] = a;
        }
    }

    static constexpr std::size_t kNoCube = static_cast<std::size_t>(-1);

    const CubeParams& params() const noexcept { return params_; }
    std::size_t space_size() const noexcept { return n_; }
    const std::vector<CubeLevel>& levels() const noexcept { return levels_; }
    int k_min() const { return levels_.front().k; }
    int k_max() const { return levels_.back().k; }
    const CubeLevel& level(int k) const { return levels_.at(static_cast<std::size_t>(k - k_min())); }
    const Cube& cube(int k, std::size_t alpha) const { return level(k).cubes.at(alpha); }

    double inner_radius(int k) const { return params_.c1 * generation_scale(params_.delta, k); }
    double outer_radius(int k) const { return params_.C1 * generation_scale(params_.delta, k); }

    /// B(Q^k_alpha) = B(x^k_alpha, C1 delta^k).
    PointSet outer_ball(const FiniteMetricSpace& space, int k, std::size_t alpha) const {
        return open_ball(space, cube(k, alpha).center, outer_radius(k));
    }

    /// Index of the generation-k cube containing x.
    std::size_t locate(PointIndex x, int k) const {
        return owner_.at(static_cast<std::size_t>(k - k_min())).at(x);
    }

private:
    CubeParams params_;
    std::size_t n_ = 0;
    std::vector<CubeLevel> levels_;
    std::vector<std::vector<std::size_t>> owner_;
};

inline std::size_t locate(const CubeSystem& cubes, PointIndex x, int k) { return cubes.locate(x, k); }

/// Closed cubes of generation k: for each alpha, every centre x^l_beta with
/// (l, beta) <= (k, alpha).
inline std::vector<PointSet> closed_cubes(const DyadicPointSystem& sys, const ParentOrder& order, int k) {
    std::vector<PointSet> closed(sys.level(k).centers.size());
    for (int l = k; l <= sys.params.k_max; ++l) {
        const auto& cs = sys.level(l).centers;
        for (std::size_t beta = 0; beta < cs.size(); ++beta) closed[order.ancestor(l, beta, k)].push_back(cs[beta].point);
    }
    for (auto& c : closed) {
        std::sort(c.begin(), c.end());
        c.erase(std::unique(c.begin(), c.end()), c.end());
    }
    return closed;
}

/// Open cubes: points outside the union of the other closed cubes.
inline std::vector<PointSet> open_cubes(std::size_t n, const std::vector<PointSet>& closed) {
    std::vector<std::uint32_t> cover_count(n, 0);
    for (const auto& c : closed)
        for (PointIndex p : c) ++cover_count[p];
    std::vector<PointSet> open(closed.size());
    for (std::size_t a = 0; a < closed.size(); ++a) {
        std::vector<std::uint8_t> mine(n, 0);
        for (PointIndex p : closed[a]) mine[p] = 1;
        for (PointIndex p = 0; p < n; ++p)
            if (cover_count[p] == mine[p]) open[a].push_back(p);
    }
    return open;
}

/// Materialises the cube system generated by a point system and a parent
/// order: members are leaf descendants, closed cubes are descendant
/// centres, open cubes follow the complement formula.
inline CubeSystem build_cube_system(const FiniteMetricSpace& space, const DyadicPointSystem& sys,
                                    const ParentOrder& order) {
    const auto& P = sys.params;
    if (12.0 * P.C0 * P.delta > P.c0)
        throw Error("HypothesisViolated", "need 12*C0*delta <= c0");
    const std::size_t n = space.size();
    const auto& leaves = sys.level(P.k_max).centers;
    if (leaves.size() != n)
        throw Error("IncompleteLeaves", "finest generation does not contain every point",
                    {P.k_max, static_cast<std::int64_t>(leaves.size())});

    std::vector<CubeLevel> levels;
    for (int k = P.k_min; k <= P.k_max; ++k) {
        CubeLevel level{k, {}};
        const auto& cs = sys.level(k).centers;
        level.cubes.resize(cs.size());
        for (std::size_t a = 0; a < cs.size(); ++a) level.cubes[a].center = cs[a].point;
        for (std::size_t beta = 0; beta < leaves.size(); ++beta)
            level.cubes[order.ancestor(P.k_max, beta, k)].members.push_back(leaves[beta].point);
        auto closed = closed_cubes(sys, order, k);
        auto open = open_cubes(n, closed);
        for (std::size_t a = 0; a < cs.size(); ++a) {
            auto& cube = level.cubes[a];
            std::sort(cube.members.begin(), cube.members.end());
            cube.closed = std::move(closed[a]);
            cube.open = std::move(open[a]);
        }
        levels.push_back(std::move(level));
    }
    return CubeSystem(cube_params_for(P), n, std::move(levels));
}

/// Exhaustive check of the cube axioms: partition, nesting, inner/outer
/// balls, monotone outer balls, the open/closed sandwich and the outer ball
/// of the closed cube. Above 2000 points the pairwise families only compare
/// consecutive generations and the extreme pair, and the report is marked
/// non-exhaustive.
inline VerificationReport verify_cube_system(const FiniteMetricSpace& space, const CubeSystem& cubes) {
    VerificationReport report;
    const std::size_t n = space.size();
    const auto& levels = cubes.levels();
    if (levels.empty() || cubes.space_size() != n) {
        report.violations.push_back({"structure", {}, "empty system or size mismatch"});
        return report;
    }
    const std::size_t L = levels.size();
    const bool exhaustive = n <= 2000;
    report.exhaustive = exhaustive;

    auto loc = [](std::initializer_list<std::int64_t> xs) { return std::vector<std::int64_t>(xs); };
    auto I = [](std::size_t v) { return static_cast<std::int64_t>(v); };

    // owners[li][p]: every cube of generation li listing p
    std::vector<std::vector<std::vector<std::uint32_t>>> owners(L, std::vector<std::vector<std::uint32_t>>(n));
    for (std::size_t li = 0; li < L; ++li) {
        const int k = levels[li].k;
        if (li > 0 && k != levels[li - 1].k + 1) report.violations.push_back({"structure", loc({k}), "gap in generations"});
        for (std::size_t a = 0; a < levels[li].cubes.size(); ++a) {
            const auto& cube = levels[li].cubes[a];
            bool bad = cube.center >= n;
            for (const PointSet* s : {&cube.members, &cube.closed, &cube.open})
                for (PointIndex p : *s) bad |= p >= n;
            if (bad) {
                report.violations.push_back({"structure", loc({k, I(a)}), "index outside the space"});
                return report;
            }
            for (PointIndex p : cube.members) owners[li][p].push_back(static_cast<std::uint32_t>(a));
        }
    }

    // one work item per (generation, cube)
    std::vector<std::pair<std::size_t, std::size_t>> items;
    for (std::size_t li = 0; li < L; ++li)
        for (std::size_t a = 0; a < levels[li].cubes.size(); ++a) items.emplace_back(li, a);
    std::vector<std::vector<Violation>> found(items.size() + 1);

    // (2.1) partition
    for (std::size_t li = 0; li < L; ++li)
        for (PointIndex p = 0; p < n; ++p)
            if (owners[li][p].size() != 1)
                found.back().push_back({"partition", loc({levels[li].k, I(p)}),
                                        std::to_string(owners[li][p].size()) + " cubes contain the point"});

    auto pair_levels = [&](std::size_t lj) {
        // coarser generations compared against generation lj
        std::vector<std::size_t> out;
        for (std::size_t li = 0; li <= lj; ++li)
            if (exhaustive || li == lj || li + 1 == lj || (li == 0 && lj == L - 1)) out.push_back(li);
        return out;
    };

    parallel_for(items.size(), [&](std::size_t item) {
        const auto [lj, b] = items[item];
        auto& out = found[item];
        const int l = levels[lj].k;
        const Cube& q = levels[lj].cubes[b];
        const double inner = cubes.inner_radius(l), outer = cubes.outer_radius(l);
        const PointSet& M = q.members;

        // (2.3)
        for (PointIndex p : open_ball(space, q.center, inner))
            if (!std::binary_search(M.begin(), M.end(), p)) out.push_back({"inner_ball", loc({l, I(b), I(p)}), {}});
        for (PointIndex p : M)
            if (!(space(q.center, p) < outer)) out.push_back({"outer_ball", loc({l, I(b), I(p)}), {}});

        // sandwich open ⊆ members ⊆ closed, and closed ⊆ outer ball
        if (!std::includes(M.begin(), M.end(), q.open.begin(), q.open.end()))
            out.push_back({"sandwich", loc({l, I(b)}), "open cube not inside the cube"});
        if (!std::includes(q.closed.begin(), q.closed.end(), M.begin(), M.end()))
            out.push_back({"sandwich", loc({l, I(b)}), "cube not inside the closed cube"});
        for (PointIndex p : q.closed)
            if (!(space(q.center, p) < outer)) out.push_back({"closed_outer_ball", loc({l, I(b), I(p)}), {}});

        // (2.2) and (2.4) against every coarser generation
        const PointSet ball = open_ball(space, q.center, outer);
        for (std::size_t li : pair_levels(lj)) {
            const int k = levels[li].k;
            std::vector<std::size_t> hits(levels[li].cubes.size(), 0);
            for (PointIndex p : M)
                for (auto a : owners[li][p]) ++hits[a];
            for (std::size_t a = 0; a < hits.size(); ++a) {
                if (hits[a] == 0) continue;
                if (hits[a] != M.size()) {
                    out.push_back({"nested", loc({k, I(a), l, I(b)}), "partial overlap"});
                    continue;
                }
                if (li == lj && a == b) continue;
                const Cube& parent = levels[li].cubes[a];
                const double parent_outer = cubes.outer_radius(k);
                for (PointIndex p : ball)
                    if (!(space(parent.center, p) < parent_outer)) {
                        out.push_back({"monotone", loc({k, I(a), l, I(b)}), "outer ball escapes at point " + std::to_string(p)});
                        break;
                    }
            }
        }
    });

    for (auto& f : found) report.violations.insert(report.violations.end(), f.begin(), f.end());
    std::sort(report.violations.begin(), report.violations.end());
    return report;
}

} // namespace dyadic

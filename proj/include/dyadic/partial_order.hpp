#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "dyadic/error.hpp"
#include "dyadic/metric.hpp"
#include "dyadic/nets.hpp"

namespace dyadic {

/// Child-to-parent links between consecutive generations. The partial order
/// is the reflexive-transitive closure of these links; it is never
/// materialised.
class ParentOrder {
public:
    ParentOrder() = default;

    /// parents[i] holds, for generation k_min + i, the parent index of each
    /// centre in generation k_min + i - 1; parents[0] is empty.
    ParentOrder(int k_min, std::vector<std::vector<std::size_t>> parents)
        : k_min_(k_min), parents_(std::move(parents)) {
        if (parents_.empty()) parents_.emplace_back();
        rebuild_children();
    }

    int k_min() const noexcept { return k_min_; }
    int k_max() const noexcept { return k_min_ + static_cast<int>(parents_.size()) - 1; }

    /// Number of centres at generation k (k > k_min), as seen by the links.
    std::size_t level_size(int k) const { return parents_.at(offset(k)).size(); }

    /// Parent of (k, beta) at generation k - 1.
    std::size_t parent(int k, std::size_t beta) const { return parents_.at(offset(k)).at(beta); }

    const std::vector<std::vector<std::size_t>>& links() const noexcept { return parents_; }

    /// Ancestor of (l, beta) at generation k <= l.
    std::size_t ancestor(int l, std::size_t beta, int k) const {
        for (int j = l; j > k; --j) beta = parent(j, beta);
        return beta;
    }

    /// (l, beta) <= (k, alpha).
    bool precedes(int l, std::size_t beta, int k, std::size_t alpha) const {
        if (l <= k) return l == k && beta == alpha;
        return ancestor(l, beta, k) == alpha;
    }

    /// Children of (k, alpha) at generation k + 1.
    const std::vector<std::size_t>& children(int k, std::size_t alpha) const {
        static const std::vector<std::size_t> none;
        const auto off = offset(k);
        if (off >= children_.size() || alpha >= children_[off].size()) return none;
        return children_[off][alpha];
    }

private:
    std::size_t offset(int k) const { return static_cast<std::size_t>(k - k_min_); }

    void rebuild_children() {
        children_.assign(parents_.size(), {});
        for (std::size_t i = 1; i < parents_.size(); ++i) {
            for (std::size_t beta = 0; beta < parents_[i].size(); ++beta) {
                const std::size_t a = parents_[i][beta];
                if (children_[i - 1].size() <= a) children_[i - 1].resize(a + 1);
                children_[i - 1][a].push_back(beta);
            }
        }
    }

    int k_min_ = 0;
    std::vector<std::vector<std::size_t>> parents_;
    std::vector<std::vector<std::vector<std::size_t>>> children_;
};

/// Assigns each centre of generation k+1 a parent at generation k: the
/// unique centre within half the separation radius if there is one,
/// otherwise the nearest centre within the covering radius (lowest index on
/// ties). On constrained generations of adapted systems only same-side
/// centres are admissible.
inline ParentOrder build_order(const FiniteMetricSpace& space, const DyadicPointSystem& sys) {
    const auto& P = sys.params;
    std::vector<std::vector<std::size_t>> parents(static_cast<std::size_t>(P.k_max - P.k_min + 1));
    for (int k = P.k_min; k < P.k_max; ++k) {
        const auto& upper = sys.level(k).centers;
        const auto& lower = sys.level(k + 1).centers;
        const double half = 0.5 * sys.separation(k);
        const double cover = sys.covering(k);
        const bool same_side = sys.constrained(k);
        auto& out = parents[static_cast<std::size_t>(k + 1 - P.k_min)];
        out.resize(lower.size());
        for (std::size_t beta = 0; beta < lower.size(); ++beta) {
            const PointIndex child = lower[beta].point;
            std::size_t close = upper.size(), nearest = upper.size();
            for (std::size_t a = 0; a < upper.size(); ++a) {
                if (same_side && upper[a].side != lower[beta].side) continue;
                const double d = space(child, upper[a].point);
                if (d < half && close == upper.size()) close = a;
                if (d < cover && (nearest == upper.size() || d < space(child, upper[nearest].point))) nearest = a;
            }
            const std::size_t chosen = close != upper.size() ? close : nearest;
            if (chosen == upper.size())
                throw Error("OrphanChild", "no admissible parent", {k + 1, static_cast<std::int64_t>(beta)});
            out[beta] = chosen;
        }
    }
    return ParentOrder(P.k_min, std::move(parents));
}

/// All generation-l indices below (k, alpha), sorted.
inline std::vector<std::size_t> descendants(const ParentOrder& order, int k, std::size_t alpha, int l) {
    if (l < k) return {};
    std::vector<std::size_t> frontier{alpha};
    for (int j = k; j < l; ++j) {
        std::vector<std::size_t> next;
        for (std::size_t a : frontier) {
            const auto& ch = order.children(j, a);
            next.insert(next.end(), ch.begin(), ch.end());
        }
        frontier = std::move(next);
    }
    std::sort(frontier.begin(), frontier.end());
    return frontier;
}

/// Checks totality, both proximity implications, side purity on constrained
/// generations, and order axioms of the derived relation. The pairwise
/// axioms are exhaustive up to 256 points and sampled beyond.
inline VerificationReport verify_order(const FiniteMetricSpace& space, const DyadicPointSystem& sys,
                                       const ParentOrder& order) {
    VerificationReport report;
    auto add = [&](std::string check, std::vector<std::int64_t> loc) {
        report.violations.push_back({std::move(check), std::move(loc), {}});
    };
    const auto& P = sys.params;
    if (order.k_min() != P.k_min || order.k_max() != P.k_max) {
        add("level_range", {order.k_min(), order.k_max()});
        return report;
    }

    bool links_valid = true;
    for (int k = P.k_min; k < P.k_max; ++k) {
        const auto& upper = sys.level(k).centers;
        const auto& lower = sys.level(k + 1).centers;
        if (order.level_size(k + 1) != lower.size()) {
            add("totality", {k + 1, -1});
            links_valid = false;
            continue;
        }
        const double half = 0.5 * sys.separation(k);
        const double cover = sys.covering(k);
        for (std::size_t beta = 0; beta < lower.size(); ++beta) {
            const std::size_t par = order.parent(k + 1, beta);
            if (par >= upper.size()) {
                add("totality", {k + 1, static_cast<std::int64_t>(beta)});
                links_valid = false;
                continue;
            }
            const PointIndex child = lower[beta].point;
            for (std::size_t a = 0; a < upper.size(); ++a)
                if (a != par && space(child, upper[a].point) < half)
                    add("lower_implication", {k + 1, static_cast<std::int64_t>(beta), static_cast<std::int64_t>(a)});
            if (!(space(child, upper[par].point) < cover))
                add("upper_implication", {k + 1, static_cast<std::int64_t>(beta), static_cast<std::int64_t>(par)});
            if (sys.constrained(k) && upper[par].side != lower[beta].side)
                add("side_purity", {k + 1, static_cast<std::int64_t>(beta), static_cast<std::int64_t>(par)});
        }
    }

    if (links_valid) {
        struct Node {
            int k;
            std::size_t a;
        };
        std::vector<Node> nodes;
        for (int k = P.k_min; k <= P.k_max; ++k)
            for (std::size_t a = 0; a < sys.level(k).centers.size(); ++a) nodes.push_back({k, a});
        auto leq = [&](const Node& x, const Node& y) { return order.precedes(x.k, x.a, y.k, y.a); };
        auto check_pair = [&](const Node& x, const Node& y) {
            if (x.k <= y.k && leq(x, y) != (x.k == y.k && x.a == y.a))
                add("same_or_coarser", {x.k, static_cast<std::int64_t>(x.a), y.k, static_cast<std::int64_t>(y.a)});
            if (leq(x, y) && leq(y, x) && !(x.k == y.k && x.a == y.a))
                add("antisymmetry", {x.k, static_cast<std::int64_t>(x.a), y.k, static_cast<std::int64_t>(y.a)});
        };
        auto check_triple = [&](const Node& x, const Node& y, const Node& z) {
            if (leq(x, y) && leq(y, z) && !leq(x, z))
                add("transitivity", {x.k, static_cast<std::int64_t>(x.a), y.k, static_cast<std::int64_t>(y.a), z.k,
                                     static_cast<std::int64_t>(z.a)});
        };
        if (space.size() <= 256) {
            for (const auto& x : nodes)
                for (const auto& y : nodes) check_pair(x, y);
            // transitivity along every ancestor chain
            for (const auto& x : nodes)
                for (int j = P.k_min; j <= x.k; ++j) {
                    Node y{j, order.ancestor(x.k, x.a, j)};
                    for (int i = P.k_min; i <= j; ++i) check_triple(x, y, Node{i, order.ancestor(j, y.a, i)});
                }
        } else {
            report.exhaustive = false;
            std::mt19937_64 rng(0x5eed);
            std::uniform_int_distribution<std::size_t> pick(0, nodes.size() - 1);
            for (int s = 0; s < 20000; ++s) {
                const Node& x = nodes[pick(rng)];
                const Node& y = nodes[pick(rng)];
                check_pair(x, y);
                check_triple(x, y, nodes[pick(rng)]);
            }
        }
    }
    std::sort(report.violations.begin(), report.violations.end());
    report.violations.erase(std::unique(report.violations.begin(), report.violations.end()), report.violations.end());
    return report;
}

} // namespace dyadic

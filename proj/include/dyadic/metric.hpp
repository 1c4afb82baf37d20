#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dyadic/error.hpp"

namespace dyadic {

using PointIndex = std::size_t;
/// Sorted, duplicate-free list of point indices.
using PointSet = std::vector<PointIndex>;

/// Sentinel returned by distance queries against an empty set.
inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

/// delta^k for an integer generation k.
inline double generation_scale(double delta, int k) {
    return std::pow(delta, static_cast<double>(k));
}

/// Membership flags for a subset of a finite space.
class SubsetMask {
public:
    SubsetMask() = default;
    explicit SubsetMask(std::size_t n, bool value = false) : member_(n, value ? 1 : 0) {}

    static SubsetMask from_indices(std::size_t n, std::span<const PointIndex> indices) {
        SubsetMask mask(n);
        for (PointIndex i : indices) {
            if (i >= n) throw Error("IndexOutOfRange", "subset index " + std::to_string(i) +
                                                           " outside space of size " + std::to_string(n),
                                    {static_cast<std::int64_t>(i)});
            mask.member_[i] = 1;
        }
        return mask;
    }

    std::size_t size() const noexcept { return member_.size(); }
    bool contains(PointIndex i) const noexcept { return member_[i] != 0; }
    void set(PointIndex i, bool value = true) { member_[i] = value ? 1 : 0; }

    std::size_t count() const noexcept {
        return static_cast<std::size_t>(std::count(member_.begin(), member_.end(), std::uint8_t{1}));
    }
    bool none() const noexcept { return count() == 0; }
    bool all() const noexcept { return count() == size(); }

    SubsetMask complement() const {
        SubsetMask out(size());
        for (std::size_t i = 0; i < size(); ++i) out.member_[i] = member_[i] ? 0 : 1;
        return out;
    }

    PointSet members() const {
        PointSet out;
        for (std::size_t i = 0; i < size(); ++i)
            if (member_[i]) out.push_back(i);
        return out;
    }

    friend bool operator==(const SubsetMask&, const SubsetMask&) = default;

private:
    std::vector<std::uint8_t> member_;
};

struct MetricValidation;

/// Why a raw matrix is not a metric. Indices follow the failing pair/triple;
/// for triangle violations dist[i][k] > dist[i][j] + dist[j][k].
struct MetricViolation {
    enum class Kind { Asymmetric, NegativeOrNaN, NonzeroDiagonal, ZeroOffDiagonal, TriangleViolation };
    Kind kind;
    std::size_t i = 0, j = 0, k = 0;

    std::string name() const {
        switch (kind) {
            case Kind::Asymmetric: return "Asymmetric";
            case Kind::NegativeOrNaN: return "NegativeOrNaN";
            case Kind::NonzeroDiagonal: return "NonzeroDiagonal";
            case Kind::ZeroOffDiagonal: return "ZeroOffDiagonal";
            case Kind::TriangleViolation: return "TriangleViolation";
        }
        return "Unknown";
    }
    /// The indices that identify the violation (1, 2 or 3 of them).
    std::vector<std::size_t> indices() const {
        switch (kind) {
            case Kind::NonzeroDiagonal: return {i};
            case Kind::TriangleViolation: return {i, j, k};
            default: return {i, j};
        }
    }
};

/// Immutable finite metric space with a dense distance matrix and, per point,
/// every point ordered by distance (ties by index). Balls are prefixes of
/// those orderings.
class FiniteMetricSpace {
public:
    std::size_t size() const noexcept { return n_; }
    double operator()(PointIndex i, PointIndex j) const noexcept { return dist_[i * n_ + j]; }
    std::span<const double> row(PointIndex i) const { return {dist_.data() + i * n_, n_}; }
    const std::vector<std::string>& labels() const noexcept { return labels_; }

    /// All points sorted by distance from x; the first entry is x itself.
    std::span<const std::uint32_t> by_distance(PointIndex x) const {
        return {order_.data() + x * n_, n_};
    }

    /// Number of points at distance strictly less than r from x.
    std::size_t ball_count(PointIndex x, double r) const {
        auto ord = by_distance(x);
        auto it = std::partition_point(ord.begin(), ord.end(),
                                       [&](std::uint32_t p) { return (*this)(x, p) < r; });
        return static_cast<std::size_t>(it - ord.begin());
    }

    double diameter() const noexcept { return diameter_; }
    /// Smallest nonzero distance; kUnbounded for a single point.
    double min_positive_distance() const noexcept { return min_positive_; }

    /// Sorted list of distinct positive distances.
    std::vector<double> realized_distances() const {
        std::vector<double> out;
        out.reserve(n_ * (n_ - 1) / 2);
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = i + 1; j < n_; ++j) out.push_back((*this)(i, j));
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    double diameter_of(std::span<const PointIndex> set) const {
        double d = 0.0;
        for (std::size_t a = 0; a < set.size(); ++a)
            for (std::size_t b = a + 1; b < set.size(); ++b) d = std::max(d, (*this)(set[a], set[b]));
        return d;
    }

private:
    friend MetricValidation validate_metric(const std::vector<std::vector<double>>&, std::vector<std::string>);

    FiniteMetricSpace(std::size_t n, std::vector<double> dist, std::vector<std::string> labels)
        : n_(n), dist_(std::move(dist)), labels_(std::move(labels)), order_(n * n) {
        diameter_ = 0.0;
        min_positive_ = kUnbounded;
        for (std::size_t i = 0; i < n_; ++i) {
            for (std::size_t j = i + 1; j < n_; ++j) {
                diameter_ = std::max(diameter_, (*this)(i, j));
                min_positive_ = std::min(min_positive_, (*this)(i, j));
            }
            auto* ord = order_.data() + i * n_;
            std::iota(ord, ord + n_, std::uint32_t{0});
            std::stable_sort(ord, ord + n_, [&](std::uint32_t a, std::uint32_t b) {
                return (*this)(i, a) < (*this)(i, b);
            });
        }
    }

    std::size_t n_ = 0;
    std::vector<double> dist_;
    std::vector<std::string> labels_;
    std::vector<std::uint32_t> order_;
    double diameter_ = 0.0;
    double min_positive_ = kUnbounded;
};

struct MetricValidation {
    std::optional<FiniteMetricSpace> space;
    std::optional<MetricViolation> violation;

    bool valid() const noexcept { return space.has_value(); }
};

/// Checks the metric axioms and returns either the space or the first
/// violation found. Pair checks run before the triangle sweep; both scan
/// indices lexicographically.
inline MetricValidation validate_metric(const std::vector<std::vector<double>>& raw,
                                        std::vector<std::string> labels = {}) {
    using Kind = MetricViolation::Kind;
    const std::size_t n = raw.size();
    if (n == 0) throw Error("EmptyMatrix", "distance matrix has no rows");
    for (std::size_t i = 0; i < n; ++i)
        if (raw[i].size() != n)
            throw Error("NotSquare", "row " + std::to_string(i) + " has " + std::to_string(raw[i].size()) +
                                         " entries, expected " + std::to_string(n),
                        {static_cast<std::int64_t>(i)});
    if (!labels.empty() && labels.size() != n)
        throw Error("LabelCount", "expected " + std::to_string(n) + " labels");

    MetricValidation out;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double d = raw[i][j];
            if (!std::isfinite(d) || d < 0.0) {
                out.violation = MetricViolation{Kind::NegativeOrNaN, i, j};
                return out;
            }
            if (i == j && d != 0.0) {
                out.violation = MetricViolation{Kind::NonzeroDiagonal, i, i};
                return out;
            }
            if (i != j && d == 0.0) {
                out.violation = MetricViolation{Kind::ZeroOffDiagonal, i, j};
                return out;
            }
            if (d != raw[j][i]) {
                out.violation = MetricViolation{Kind::Asymmetric, std::min(i, j), std::max(i, j)};
                return out;
            }
        }
    }

    std::vector<double> flat(n * n);
    for (std::size_t i = 0; i < n; ++i) std::copy(raw[i].begin(), raw[i].end(), flat.begin() + i * n);

    for (std::size_t i = 0; i < n; ++i) {
        const double* di = flat.data() + i * n;
        for (std::size_t j = 0; j < n; ++j) {
            const double* dj = flat.data() + j * n;
            const double dij = di[j];
            bool bad = false;
            for (std::size_t k = 0; k < n; ++k) bad |= di[k] > dij + dj[k];
            if (!bad) continue;
            for (std::size_t k = 0; k < n; ++k) {
                if (di[k] > dij + dj[k]) {
                    out.violation = MetricViolation{Kind::TriangleViolation, i, j, k};
                    return out;
                }
            }
        }
    }

    out.space = FiniteMetricSpace(n, std::move(flat), std::move(labels));
    return out;
}

/// Validates and throws on failure.
inline FiniteMetricSpace make_space(const std::vector<std::vector<double>>& raw,
                                    std::vector<std::string> labels = {}) {
    auto result = validate_metric(raw, std::move(labels));
    if (!result.valid()) {
        const auto& v = *result.violation;
        std::vector<std::int64_t> loc;
        for (auto idx : v.indices()) loc.push_back(static_cast<std::int64_t>(idx));
        throw Error(v.name(), "matrix is not a metric", std::move(loc));
    }
    return std::move(*result.space);
}

/// Euclidean distance matrix of a point cloud (rows are coordinates).
inline std::vector<std::vector<double>> euclidean_matrix(const std::vector<std::vector<double>>& coords) {
    const std::size_t n = coords.size();
    std::vector<std::vector<double>> dist(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        if (coords[i].size() != coords[0].size())
            throw Error("RaggedCoordinates", "row " + std::to_string(i) + " has a different dimension",
                        {static_cast<std::int64_t>(i)});
        for (std::size_t j = i + 1; j < n; ++j) {
            double s = 0.0;
            for (std::size_t c = 0; c < coords[i].size(); ++c) {
                const double t = coords[i][c] - coords[j][c];
                s += t * t;
            }
            dist[i][j] = dist[j][i] = std::sqrt(s);
        }
    }
    return dist;
}

/// Open ball B(x, r) = { y : d(y, x) < r }, sorted by index.
inline PointSet open_ball(const FiniteMetricSpace& space, PointIndex x, double r) {
    auto ord = space.by_distance(x);
    PointSet out(ord.begin(), ord.begin() + static_cast<std::ptrdiff_t>(space.ball_count(x, r)));
    std::sort(out.begin(), out.end());
    return out;
}

/// min_{s in S} d(x, s); kUnbounded when S is empty.
inline double dist_to_set(const FiniteMetricSpace& space, PointIndex x, std::span<const PointIndex> set) {
    double best = kUnbounded;
    for (PointIndex s : set) best = std::min(best, space(x, s));
    return best;
}

inline double dist_to_set(const FiniteMetricSpace& space, PointIndex x, const SubsetMask& set) {
    for (std::uint32_t p : space.by_distance(x))
        if (set.contains(p)) return space(x, p);
    return kUnbounded;
}

// ---------------------------------------------------------------------------
// Doubling constant

struct DoublingReport {
    std::size_t constant = 1;
    bool exact = true;
    // a ball attaining the constant
    PointIndex x = 0;
    double r = 0.0;
};

namespace detail {

inline std::size_t greedy_cover(std::vector<std::uint8_t> uncovered, std::size_t remaining,
                                const std::vector<std::vector<PointIndex>>& balls) {
    std::size_t used = 0;
    while (remaining > 0) {
        std::size_t best = 0, best_gain = 0;
        for (std::size_t b = 0; b < balls.size(); ++b) {
            std::size_t gain = 0;
            for (PointIndex p : balls[b]) gain += uncovered[p];
            if (gain > best_gain) best_gain = gain, best = b;
        }
        for (PointIndex p : balls[best]) {
            remaining -= uncovered[p];
            uncovered[p] = 0;
        }
        ++used;
    }
    return used;
}

// Is `target` coverable by at most `budget` of the masks?
inline bool cover_within(std::uint64_t target, const std::vector<std::uint64_t>& masks, std::size_t budget) {
    if (target == 0) return true;
    if (budget == 0) return false;
    const int p = std::countr_zero(target);
    for (std::uint64_t m : masks) {
        if (!((m >> p) & 1u)) continue;
        if (cover_within(target & ~m, masks, budget - 1)) return true;
    }
    return false;
}

} // namespace detail

/// Least A such that every ball B(x, r), r in {d, 2d : d realized}, is
/// covered by A balls of radius r/2 centred in X. Exact (branch and bound)
/// for n <= 64, greedy upper bound otherwise.
inline DoublingReport doubling_constant(const FiniteMetricSpace& space) {
    const std::size_t n = space.size();
    DoublingReport report;
    report.exact = n <= 64;
    if (n == 1) return report;

    std::vector<double> radii = space.realized_distances();
    const std::size_t base = radii.size();
    for (std::size_t i = 0; i < base; ++i) radii.push_back(2.0 * radii[i]);
    std::sort(radii.begin(), radii.end());
    radii.erase(std::unique(radii.begin(), radii.end()), radii.end());

    for (PointIndex x = 0; x < n; ++x) {
        for (double r : radii) {
            const PointSet target = open_ball(space, x, r);
            if (target.size() <= report.constant) continue;

            // restrict half-radius balls to the target, dropping duplicates
            std::vector<std::vector<PointIndex>> balls;
            std::vector<std::uint8_t> in_target(n, 0);
            for (PointIndex p : target) in_target[p] = 1;
            for (PointIndex c = 0; c < n; ++c) {
                std::vector<PointIndex> hit;
                auto ord = space.by_distance(c);
                for (std::size_t t = 0, cnt = space.ball_count(c, r / 2.0); t < cnt; ++t)
                    if (in_target[ord[t]]) hit.push_back(ord[t]);
                if (hit.empty()) continue;
                std::sort(hit.begin(), hit.end());
                balls.push_back(std::move(hit));
            }
            std::sort(balls.begin(), balls.end());
            balls.erase(std::unique(balls.begin(), balls.end()), balls.end());

            const std::size_t greedy = detail::greedy_cover(in_target, target.size(), balls);
            if (greedy <= report.constant) continue;

            std::size_t value = greedy;
            if (report.exact) {
                std::vector<std::uint64_t> masks;
                for (const auto& b : balls) {
                    std::uint64_t m = 0;
                    for (PointIndex p : b) m |= std::uint64_t{1} << p;
                    masks.push_back(m);
                }
                // larger balls first prunes faster
                std::sort(masks.begin(), masks.end(), [](std::uint64_t a, std::uint64_t b) {
                    return std::popcount(a) > std::popcount(b) || (std::popcount(a) == std::popcount(b) && a < b);
                });
                std::uint64_t target_mask = 0;
                for (PointIndex p : target) target_mask |= std::uint64_t{1} << p;
                if (detail::cover_within(target_mask, masks, report.constant)) continue;
                value = report.constant + 1;
                while (!detail::cover_within(target_mask, masks, value)) ++value;
            }
            report.constant = value;
            report.x = x;
            report.r = r;
        }
    }
    return report;
}

} // namespace dyadic

#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "dyadic/cubes.hpp"
#include "dyadic/error.hpp"
#include "dyadic/metric.hpp"
#include "dyadic/nets.hpp"
#include "dyadic/parallel.hpp"
#include "dyadic/partial_order.hpp"
#include "dyadic/plumpness.hpp"

namespace dyadic {

// ---------------------------------------------------------------------------
// Forward direction: every cube and its complement are d-plump.

struct CubePlumpness {
    DPlumpParams dplump;
    // absent for a zero-diameter cube (empty radius range)
    std::optional<PlumpParams> plump;
};

/// Parameters certified for a generation-m cube: b0 = c1, B0 = c1 + C1,
/// b = delta*c1/(c1+C1), R = (c1+C1)/(2*delta*C1) * diam(Q).
inline CubePlumpness cube_plumpness_params(const CubeParams& p, int m, double cube_diam) {
    CubePlumpness out;
    out.dplump = DPlumpParams{p.delta, m, p.c1, p.c1 + p.C1};
    const double R = (p.c1 + p.C1) / (2.0 * p.delta * p.C1) * cube_diam;
    if (R > 0.0) out.plump = PlumpParams{R, p.delta * p.c1 / (p.c1 + p.C1)};
    return out;
}

struct CubeForwardCheck {
    int k = 0;
    std::size_t alpha = 0;
    bool inside_certified = false;
    bool outside_certified = false;
    std::optional<Counterexample> inside_counterexample;
    std::optional<Counterexample> outside_counterexample;
};

struct ForwardReport {
    std::vector<CubeForwardCheck> cubes;
    std::size_t failures = 0;
    bool ok() const noexcept { return failures == 0; }
};

/// Runs the d-plump check on every cube and on its complement.
inline ForwardReport verify_all_cubes_plump(const FiniteMetricSpace& space, const CubeSystem& cubes) {
    ForwardReport report;
    for (const auto& level : cubes.levels())
        for (std::size_t a = 0; a < level.cubes.size(); ++a) report.cubes.push_back(CubeForwardCheck{level.k, a, false, false, std::nullopt, std::nullopt});
    const CheckOptions quiet{false};
    parallel_for(report.cubes.size(), [&](std::size_t i) {
        auto& entry = report.cubes[i];
        const Cube& q = cubes.cube(entry.k, entry.alpha);
        const auto params = cube_plumpness_params(cubes.params(), entry.k, 0.0).dplump;
        const SubsetMask inside = SubsetMask::from_indices(space.size(), q.members);
        auto vin = check_dplump(space, inside, params, quiet);
        auto vout = check_dplump(space, inside.complement(), params, quiet);
        entry.inside_certified = vin.certified;
        entry.outside_certified = vout.certified;
        entry.inside_counterexample = std::move(vin.counterexample);
        entry.outside_counterexample = std::move(vout.counterexample);
    });
    for (const auto& e : report.cubes) report.failures += !e.inside_certified + !e.outside_certified;
    return report;
}

// ---------------------------------------------------------------------------
// Converse direction: realise a two-sided d-plump set as a cube.

struct ConstraintRecord {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = false;
};

/// Comparison of the generation-m cube at alpha0 with the subset.
struct MatchRecord {
    // "full": leaves resolve every point, so Q is compared with E directly.
    // "capped": only descendant centres are available.
    std::string mode;
    bool open_in_subset = false;   // Q~ ⊆ E
    bool subset_in_closed = false; // E ⊆ Q̄
    bool equal = false;            // Q == E (full mode only)
    PointSet open;
    PointSet closed;
    PointSet members; // empty in capped mode
};

struct CubeCandidateCert {
    SubsetMask subset;
    DPlumpParams params;
    std::vector<ConstraintRecord> constraints;
    std::optional<PlumpnessVerdict> dplump_inside;
    std::optional<PlumpnessVerdict> dplump_outside;
    std::optional<DyadicPointSystem> points;
    std::optional<ParentOrder> order;
    std::optional<CubeSystem> cubes;
    std::optional<CubeParams> cube_params;
    std::optional<std::size_t> cube_alpha;
    std::optional<MatchRecord> match;
    std::optional<VerificationReport> points_report;
    std::optional<VerificationReport> order_report;
    std::optional<VerificationReport> cubes_report;
    // stage names, in pipeline order; empty when accepted
    std::vector<std::string> failed_stages;
    std::string failure_detail;
    std::vector<std::int64_t> failure_location;

    bool accepted() const noexcept { return failed_stages.empty(); }
};

/// The d-plump parameters' side conditions: diam E <= B0*delta^m and
/// 12*B0*delta <= b0.
inline std::vector<ConstraintRecord> candidate_constraints(const FiniteMetricSpace& space, const SubsetMask& subset,
                                                           const DPlumpParams& p) {
    const double diam = space.diameter_of(subset.members());
    const double bound = p.B0 * generation_scale(p.delta, p.m);
    return {
        {"diameter", diam, bound, diam <= bound},
        {"separation_ratio", 12.0 * p.B0 * p.delta, p.b0, 12.0 * p.B0 * p.delta <= p.b0},
    };
}

/// Full pipeline: constraints and two-sided d-plumpness, then adapted
/// points, adapted order, cubes with c1 = b0/3 and C1 = 2*B0, and finally
/// the comparison of the generation-m cube with E. The two precondition
/// stages are always both evaluated; construction stops at the first
/// failure.
inline CubeCandidateCert certify_cube_candidate(const FiniteMetricSpace& space, const SubsetMask& subset,
                                                const DPlumpParams& p, LevelRange range = {}) {
    validate(p);
    if (subset.size() != space.size()) throw Error("SizeMismatch", "subset size differs from space size");
    if (subset.none()) throw Error("EmptySubset", "the empty set cannot be a cube");

    CubeCandidateCert cert;
    cert.subset = subset;
    cert.params = p;
    cert.constraints = candidate_constraints(space, subset, p);
    for (const auto& c : cert.constraints)
        if (!c.holds) {
            cert.failed_stages.push_back("constraints");
            cert.failure_detail = c.name + " constraint fails";
            break;
        }

    cert.dplump_inside = check_dplump(space, subset, p);
    cert.dplump_outside = check_dplump(space, subset.complement(), p);
    auto record_verdict = [&](const PlumpnessVerdict& v, const char* stage) {
        if (v.certified) return;
        cert.failed_stages.push_back(stage);
        if (cert.failure_detail.empty()) {
            cert.failure_detail = std::string(stage) + " counterexample";
            cert.failure_location = {static_cast<std::int64_t>(v.counterexample->y),
                                     static_cast<std::int64_t>(v.counterexample->scale)};
        }
    };
    record_verdict(*cert.dplump_inside, "dplump_inside");
    record_verdict(*cert.dplump_outside, "dplump_outside");
    if (!cert.accepted()) return cert;

    auto fail = [&](const char* stage, const Error& e) {
        cert.failed_stages.push_back(stage);
        cert.failure_detail = e.what();
        cert.failure_location = e.location();
    };

    try {
        cert.points = build_adapted_points(space, subset, p, range);
    } catch (const Error& e) {
        fail("points", e);
        return cert;
    }
    try {
        cert.order = build_order(space, *cert.points);
    } catch (const Error& e) {
        fail("order", e);
        return cert;
    }
    cert.points_report = verify_point_system(space, *cert.points);
    cert.order_report = verify_order(space, *cert.points, *cert.order);

    const auto& sys = *cert.points;
    cert.cube_params = cube_params_for(sys.params);
    cert.cube_alpha = sys.alpha0;
    const bool full = sys.level(sys.params.k_max).centers.size() == space.size();

    MatchRecord match;
    match.mode = full ? "full" : "capped";
    auto closed = closed_cubes(sys, *cert.order, p.m);
    auto open = open_cubes(space.size(), closed);
    match.closed = closed[*sys.alpha0];
    match.open = open[*sys.alpha0];

    if (full) {
        try {
            cert.cubes = build_cube_system(space, sys, *cert.order);
        } catch (const Error& e) {
            fail("cubes", e);
            return cert;
        }
        cert.cubes_report = verify_cube_system(space, *cert.cubes);
        match.members = cert.cubes->cube(p.m, *sys.alpha0).members;
    }

    const PointSet E = subset.members();
    match.open_in_subset = std::includes(E.begin(), E.end(), match.open.begin(), match.open.end());
    match.subset_in_closed = std::includes(match.closed.begin(), match.closed.end(), E.begin(), E.end());
    match.equal = full && match.members == E;
    cert.match = std::move(match);

    if (!cert.points_report->ok() || !cert.order_report->ok() || (cert.cubes_report && !cert.cubes_report->ok())) {
        cert.failed_stages.push_back("verification");
        cert.failure_detail = "constructed system failed verification";
        return cert;
    }
    const auto& m = *cert.match;
    if (!m.open_in_subset || !m.subset_in_closed || (full && !m.equal)) {
        cert.failed_stages.push_back("match");
        cert.failure_detail = "generation-m cube does not reproduce the subset";
    }
    return cert;
}

// ---------------------------------------------------------------------------
// Parameter search

struct AutoParamsResult {
    std::optional<DPlumpParams> params;
    // when no b0 works: the constraint or side that fails at the smallest
    // admissible b0, with its counterexample if it is a plumpness failure
    std::string binding;
    std::optional<PlumpnessVerdict> failure;
};

/// Searches b0 for m = 0 and B0 just above max(diam E, min distance): the
/// largest b0 in [12*B0*delta, B0] for which both sides are d-plump.
/// Candidates are B0 and every d*delta^-k (d a realised distance) in range;
/// the open-ball conditions only change at those values.
inline AutoParamsResult auto_params(const FiniteMetricSpace& space, const SubsetMask& subset, double delta) {
    if (subset.size() != space.size()) throw Error("SizeMismatch", "subset size differs from space size");
    if (subset.none()) throw Error("EmptySubset", "the empty set cannot be a cube");
    if (!(delta > 0.0 && delta < 1.0)) throw Error("InvalidParams", "delta must lie in (0,1)");
    AutoParamsResult result;
    if (12.0 * delta > 1.0) {
        result.binding = "separation_ratio: 12*delta > 1 leaves no b0 with 12*B0*delta <= b0 <= B0";
        return result;
    }

    const double diam = space.diameter_of(subset.members());
    const double min_pos = std::isfinite(space.min_positive_distance()) ? space.min_positive_distance() : 1.0;
    // strictly above diam E so the single inside centre covers E with open balls
    const double B0 = std::nextafter(std::max(diam, min_pos), kUnbounded);
    const double lo = 12.0 * B0 * delta;

    const int k_res = resolution_generation(space, DPlumpParams{delta, 0, lo, B0});
    std::vector<double> candidates{B0, lo};
    for (double d : space.realized_distances())
        for (int k = 0; k <= k_res; ++k) {
            const double c = d / generation_scale(delta, k);
            if (c >= lo && c <= B0) candidates.push_back(c);
        }
    std::sort(candidates.begin(), candidates.end(), std::greater<>());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    const SubsetMask outside = subset.complement();
    const CheckOptions quiet{false};
    for (double b0 : candidates) {
        const DPlumpParams p{delta, 0, b0, B0};
        if (check_dplump(space, subset, p, quiet).certified && check_dplump(space, outside, p, quiet).certified) {
            result.params = p;
            return result;
        }
    }
    const DPlumpParams weakest{delta, 0, lo, B0};
    auto vin = check_dplump(space, subset, weakest, quiet);
    if (!vin.certified) {
        result.binding = "dplump_inside at b0 = 12*B0*delta";
        result.failure = std::move(vin);
    } else {
        result.binding = "dplump_outside at b0 = 12*B0*delta";
        result.failure = check_dplump(space, outside, weakest, quiet);
    }
    return result;
}

} // namespace dyadic

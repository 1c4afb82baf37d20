#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dyadic/characterization.hpp"
#include "dyadic/cubes.hpp"
#include "dyadic/error.hpp"
#include "dyadic/metric.hpp"
#include "dyadic/nets.hpp"
#include "dyadic/partial_order.hpp"
#include "dyadic/plumpness.hpp"

// JSON documents use nlohmann::json's default object type, so keys are
// emitted sorted and floats in shortest round-trip form.

namespace dyadic {

using json = nlohmann::json;

/// Member lists longer than this are replaced by a size and digest.
inline constexpr std::size_t kElideThreshold = 4096;

inline std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline std::string digest_of(const PointSet& points) {
    std::string text;
    for (PointIndex p : points) text += std::to_string(p) + ",";
    return fnv1a_hex(text);
}

/// Stamps doc["digest"] with the hash of the document without it.
inline void stamp_digest(json& doc) {
    doc.erase("digest");
    doc["digest"] = fnv1a_hex(doc.dump());
}

/// Canonical text form: two-space indent plus trailing newline.
inline std::string render(const json& doc) { return doc.dump(2) + "\n"; }

// ---------------------------------------------------------------------------

inline json to_json(const PlumpParams& p) { return {{"R", p.R}, {"b", p.b}}; }
inline json to_json(const DPlumpParams& p) { return {{"delta", p.delta}, {"m", p.m}, {"b0", p.b0}, {"B0", p.B0}}; }
inline json to_json(const CubeParams& p) { return {{"delta", p.delta}, {"c1", p.c1}, {"C1", p.C1}}; }

inline json to_json(const NetParams& p) {
    return {{"delta", p.delta}, {"c0", p.c0}, {"C0", p.C0}, {"k_min", p.k_min}, {"k_max", p.k_max}};
}

inline json to_json(const VerificationReport& r) {
    json violations = json::array();
    for (const auto& v : r.violations) {
        json entry{{"check", v.check}, {"location", v.location}};
        if (!v.detail.empty()) entry["detail"] = v.detail;
        violations.push_back(std::move(entry));
    }
    return {{"ok", r.ok()}, {"exhaustive", r.exhaustive}, {"violations", std::move(violations)}};
}

inline json to_json(const PlumpnessVerdict& v) {
    const bool gen = v.generational();
    const char* scale_key = gen ? "k" : "r";
    auto scale = [&](double s) -> json {
        if (gen) return static_cast<int>(s);
        return s;
    };
    json doc;
    doc["certified"] = v.certified;
    doc["kind"] = gen ? "dplump" : "plump";
    doc["params"] = gen ? to_json(std::get<DPlumpParams>(v.params)) : to_json(std::get<PlumpParams>(v.params));
    json witnesses = json::array();
    for (const auto& w : v.witnesses) witnesses.push_back({{"y", w.y}, {scale_key, scale(w.scale)}, {"z", w.z}});
    doc["witnesses"] = std::move(witnesses);
    if (v.counterexample) {
        json rejected = json::array();
        for (const auto& b : v.counterexample->rejected)
            rejected.push_back({{"z", b.z}, {"blocking_point", b.blocking_point}});
        doc["counterexample"] = {{"y", v.counterexample->y},
                                 {scale_key, scale(v.counterexample->scale)},
                                 {"rejected", std::move(rejected)}};
    } else {
        doc["counterexample"] = nullptr;
    }
    return doc;
}

inline json to_json(const DyadicPointSystem& sys) {
    json doc;
    doc["params"] = to_json(sys.params);
    if (sys.constrained_from) doc["params"]["m"] = *sys.constrained_from;
    json levels = json::array();
    for (const auto& level : sys.levels) {
        json centers = json::array();
        for (const auto& c : level.centers) centers.push_back({{"point", c.point}, {"side", to_string(c.side)}});
        levels.push_back({{"k", level.k}, {"centers", std::move(centers)}});
    }
    doc["levels"] = std::move(levels);
    doc["alpha0"] = sys.alpha0 ? json(*sys.alpha0) : json(nullptr);
    doc["subset"] = sys.subset ? json(sys.subset->members()) : json(nullptr);
    if (sys.subset) doc["n"] = sys.subset->size();
    return doc;
}

inline json to_json(const ParentOrder& order) {
    json edges = json::array();
    for (int k = order.k_min() + 1; k <= order.k_max(); ++k)
        for (std::size_t b = 0; b < order.level_size(k); ++b)
            edges.push_back({{"child", {k, b}}, {"parent", {k - 1, order.parent(k, b)}}});
    return {{"k_min", order.k_min()}, {"k_max", order.k_max()}, {"edges", std::move(edges)}};
}

inline json cube_to_json(const Cube& cube, std::size_t alpha) {
    json doc{{"alpha", alpha}, {"center", cube.center}};
    if (cube.members.size() > kElideThreshold) {
        doc["members"] = nullptr;
        doc["elided"] = true;
        doc["size"] = cube.members.size();
        doc["members_digest"] = digest_of(cube.members);
        return doc;
    }
    doc["members"] = cube.members;
    // closed/open only listed when they differ from the members
    if (cube.closed != cube.members) doc["closed"] = cube.closed;
    if (cube.open != cube.members) doc["open"] = cube.open;
    return doc;
}

inline json to_json(const CubeSystem& cubes) {
    json levels = json::array();
    for (const auto& level : cubes.levels()) {
        json cs = json::array();
        for (std::size_t a = 0; a < level.cubes.size(); ++a) cs.push_back(cube_to_json(level.cubes[a], a));
        levels.push_back({{"k", level.k}, {"cubes", std::move(cs)}});
    }
    return {{"params", to_json(cubes.params())}, {"n", cubes.space_size()}, {"levels", std::move(levels)}};
}

inline json to_json(const ForwardReport& r) {
    json failures = json::array();
    for (const auto& c : r.cubes) {
        if (c.inside_certified && c.outside_certified) continue;
        json entry{{"k", c.k}, {"alpha", c.alpha}};
        if (c.inside_counterexample)
            entry["inside"] = {{"y", c.inside_counterexample->y}, {"k", static_cast<int>(c.inside_counterexample->scale)}};
        if (c.outside_counterexample)
            entry["outside"] = {{"y", c.outside_counterexample->y}, {"k", static_cast<int>(c.outside_counterexample->scale)}};
        failures.push_back(std::move(entry));
    }
    return {{"ok", r.ok()}, {"cubes_checked", r.cubes.size()}, {"failures", std::move(failures)}};
}

inline json to_json(const CubeCandidateCert& cert) {
    json doc;
    doc["accepted"] = cert.accepted();
    doc["subset"] = cert.subset.members();
    doc["n"] = cert.subset.size();
    doc["params"] = to_json(cert.params);
    json constraints = json::array();
    for (const auto& c : cert.constraints)
        constraints.push_back({{"name", c.name}, {"lhs", c.lhs}, {"rhs", c.rhs}, {"holds", c.holds}});
    doc["constraints"] = std::move(constraints);
    doc["verdicts"] = {{"inside", cert.dplump_inside ? to_json(*cert.dplump_inside) : json(nullptr)},
                       {"outside", cert.dplump_outside ? to_json(*cert.dplump_outside) : json(nullptr)}};
    doc["points"] = cert.points ? to_json(*cert.points) : json(nullptr);
    doc["order"] = cert.order ? to_json(*cert.order) : json(nullptr);
    doc["cube_params"] = cert.cube_params ? to_json(*cert.cube_params) : json(nullptr);
    if (cert.match && cert.cube_alpha) {
        const auto& m = *cert.match;
        json cube{{"k", cert.params.m}, {"alpha", *cert.cube_alpha}, {"open", m.open}, {"closed", m.closed}};
        cube["center"] = cert.points->level(cert.params.m).centers[*cert.cube_alpha].point;
        cube["members"] = m.mode == "full" ? json(m.members) : json(nullptr);
        doc["cube"] = std::move(cube);
        doc["match"] = {{"mode", m.mode},
                        {"open_in_subset", m.open_in_subset},
                        {"subset_in_closed", m.subset_in_closed},
                        {"equal", m.equal}};
    } else {
        doc["cube"] = nullptr;
        doc["match"] = nullptr;
    }
    json verification;
    verification["points"] = cert.points_report ? to_json(*cert.points_report) : json(nullptr);
    verification["order"] = cert.order_report ? to_json(*cert.order_report) : json(nullptr);
    verification["cubes"] = cert.cubes_report ? to_json(*cert.cubes_report) : json(nullptr);
    doc["verification"] = std::move(verification);
    doc["failed_stages"] = cert.failed_stages;
    doc["failure"] = cert.accepted() ? json(nullptr)
                                     : json{{"detail", cert.failure_detail}, {"location", cert.failure_location}};
    stamp_digest(doc);
    return doc;
}

// ---------------------------------------------------------------------------
// Readers (for re-verification of serialized systems)

inline Side side_from_string(const std::string& s) {
    if (s == "inside") return Side::inside;
    if (s == "outside") return Side::outside;
    if (s == "unconstrained") return Side::unconstrained;
    throw Error("Schema", "unknown side tag '" + s + "'");
}

inline DyadicPointSystem point_system_from_json(const json& doc) {
    DyadicPointSystem sys;
    const auto& p = doc.at("params");
    sys.params = NetParams{p.at("delta").get<double>(), p.at("c0").get<double>(), p.at("C0").get<double>(),
                           p.at("k_min").get<int>(), p.at("k_max").get<int>()};
    if (p.contains("m")) sys.constrained_from = p.at("m").get<int>();
    for (const auto& level : doc.at("levels")) {
        NetLevel l{level.at("k").get<int>(), {}};
        for (const auto& c : level.at("centers"))
            l.centers.push_back({c.at("point").get<PointIndex>(), side_from_string(c.at("side").get<std::string>())});
        sys.levels.push_back(std::move(l));
    }
    if (doc.contains("alpha0") && !doc.at("alpha0").is_null()) sys.alpha0 = doc.at("alpha0").get<std::size_t>();
    if (doc.contains("subset") && !doc.at("subset").is_null()) {
        const auto idx = doc.at("subset").get<std::vector<PointIndex>>();
        sys.subset = SubsetMask::from_indices(doc.at("n").get<std::size_t>(), idx);
    }
    return sys;
}

inline ParentOrder order_from_json(const json& doc) {
    const int k_min = doc.at("k_min").get<int>();
    const int k_max = doc.at("k_max").get<int>();
    if (k_max < k_min) throw Error("Schema", "order has k_max < k_min");
    std::vector<std::vector<std::size_t>> parents(static_cast<std::size_t>(k_max - k_min + 1));
    for (const auto& e : doc.at("edges")) {
        const int k = e.at("child").at(0).get<int>();
        const auto b = e.at("child").at(1).get<std::size_t>();
        if (k <= k_min || k > k_max || e.at("parent").at(0).get<int>() != k - 1)
            throw Error("Schema", "edge outside the generation range");
        auto& row = parents[static_cast<std::size_t>(k - k_min)];
        if (row.size() <= b) row.resize(b + 1, static_cast<std::size_t>(-1));
        row[b] = e.at("parent").at(1).get<std::size_t>();
    }
    return ParentOrder(k_min, std::move(parents));
}

/// Reads a cube system. Elided member lists cannot be restored here; they
/// are rejected.
inline CubeSystem cube_system_from_json(const json& doc) {
    const auto& p = doc.at("params");
    CubeParams params{p.at("delta").get<double>(), p.at("c1").get<double>(), p.at("C1").get<double>()};
    std::vector<CubeLevel> levels;
    for (const auto& level : doc.at("levels")) {
        CubeLevel l{level.at("k").get<int>(), {}};
        for (const auto& c : level.at("cubes")) {
            if (c.at("members").is_null()) throw Error("Elided", "cube member list was elided");
            Cube cube;
            cube.center = c.at("center").get<PointIndex>();
            cube.members = c.at("members").get<PointSet>();
            cube.closed = c.contains("closed") ? c.at("closed").get<PointSet>() : cube.members;
            cube.open = c.contains("open") ? c.at("open").get<PointSet>() : cube.members;
            l.cubes.push_back(std::move(cube));
        }
        levels.push_back(std::move(l));
    }
    return CubeSystem(params, doc.at("n").get<std::size_t>(), std::move(levels));
}

} // namespace dyadic

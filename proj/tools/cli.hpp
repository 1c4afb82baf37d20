#pragma once

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "dyadic/dyadic.hpp"
#include "dyadic/serialize.hpp"

namespace dyadic::cli {

/// Exit codes shared by every command.
enum Exit : int { kOk = 0, kError = 1, kRejected = 2 };

/// I/O or schema problem; always exit code 1.
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline json parse_json(const std::string& text, const std::string& path) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw InputError("malformed JSON in '" + path + "': " + e.what());
    }
}

inline bool looks_like_json(const std::string& text) {
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) continue;
        return c == '{' || c == '[';
    }
    return false;
}

/// Raw distance matrix from either a coordinate CSV (Euclidean metric) or a
/// JSON document {"n": int, "dist": [[...]], "labels": [...]?}.
struct RawSpace {
    std::vector<std::vector<double>> dist;
    std::vector<std::string> labels;
};

inline RawSpace read_space(const std::string& path) {
    const std::string text = read_file(path);
    RawSpace raw;
    if (looks_like_json(text)) {
        const json doc = parse_json(text, path);
        try {
            const auto n = doc.at("n").get<std::size_t>();
            raw.dist = doc.at("dist").get<std::vector<std::vector<double>>>();
            if (raw.dist.size() != n) throw InputError("'dist' has " + std::to_string(raw.dist.size()) + " rows, n = " + std::to_string(n));
            for (const auto& row : raw.dist)
                if (row.size() != n) throw InputError("'dist' is not an n x n matrix");
            if (doc.contains("labels")) raw.labels = doc.at("labels").get<std::vector<std::string>>();
        } catch (const json::exception& e) {
            throw InputError("bad distance-matrix schema in '" + path + "': " + e.what());
        }
        if (raw.dist.empty()) throw InputError("empty distance matrix");
        return raw;
    }

    std::vector<std::vector<double>> coords;
    std::istringstream lines(text);
    std::string line;
    std::size_t lineno = 0;
    bool header_allowed = true;
    while (std::getline(lines, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos || line[line.find_first_not_of(" \t")] == '#') continue;
        std::vector<double> row;
        std::istringstream cells(line);
        std::string cell;
        bool numeric = true;
        while (std::getline(cells, cell, ',')) {
            try {
                std::size_t used = 0;
                row.push_back(std::stod(cell, &used));
                if (cell.find_first_not_of(" \t", used) != std::string::npos) numeric = false;
            } catch (const std::exception&) {
                numeric = false;
            }
        }
        if (!numeric) {
            if (std::exchange(header_allowed, false)) continue; // header row
            throw InputError("non-numeric CSV cell on line " + std::to_string(lineno));
        }
        header_allowed = false;
        if (!coords.empty() && row.size() != coords.front().size())
            throw InputError("CSV line " + std::to_string(lineno) + " has a different column count");
        coords.push_back(std::move(row));
    }
    if (coords.empty()) throw InputError("no points in '" + path + "'");
    raw.dist = euclidean_matrix(coords);
    return raw;
}

inline FiniteMetricSpace load_space(const std::string& path) {
    RawSpace raw = read_space(path);
    auto v = validate_metric(raw.dist, std::move(raw.labels));
    if (!v.valid()) {
        std::string idx;
        for (auto i : v.violation->indices()) idx += (idx.empty() ? "" : ",") + std::to_string(i);
        throw InputError("input is not a metric: " + v.violation->name() + "(" + idx + ")");
    }
    return std::move(*v.space);
}

inline SubsetMask load_subset(const std::string& path, std::size_t n) {
    const json doc = parse_json(read_file(path), path);
    std::vector<PointIndex> idx;
    try {
        idx = (doc.is_object() ? doc.at("subset") : doc).get<std::vector<PointIndex>>();
    } catch (const json::exception& e) {
        throw InputError("subset must be a JSON list of point indices: " + std::string(e.what()));
    }
    return SubsetMask::from_indices(n, idx);
}

struct RunConfig {
    std::string command;
    std::string input;
    std::string system;
    std::string subset;
    std::string out;
    bool auto_params = false;
    double delta = 0, b0 = 0, B0 = 0, c0 = 0, C0 = 0, R = 0, b = 0;
    int m = 0, k_min = 0, k_max = 0;
    CLI::Option *o_delta = nullptr, *o_m = nullptr, *o_b0 = nullptr, *o_B0 = nullptr, *o_c0 = nullptr,
                *o_C0 = nullptr, *o_kmin = nullptr, *o_kmax = nullptr, *o_R = nullptr, *o_b = nullptr;

    static bool given(const CLI::Option* o) { return o != nullptr && o->count() > 0; }
    std::optional<int> kmin() const { return given(o_kmin) ? std::optional<int>(k_min) : std::nullopt; }
    std::optional<int> kmax() const { return given(o_kmax) ? std::optional<int>(k_max) : std::nullopt; }

    DPlumpParams dplump() const {
        for (auto* o : {o_delta, o_m, o_b0, o_B0})
            if (!given(o)) throw InputError("d-plump parameters need --delta, --m, --b0 and --B0");
        DPlumpParams p{delta, m, b0, B0};
        validate(p);
        return p;
    }
};

struct Output {
    std::ostream& out;
    std::ostream& err;
    std::string path;

    void emit(const json& doc) const {
        const std::string text = render(doc);
        if (path.empty()) {
            out << text;
        } else {
            std::ofstream f(path, std::ios::binary);
            if (!f) throw InputError("cannot write '" + path + "'");
            f << text;
        }
    }
};

inline int cmd_validate(const RunConfig& cfg, const Output& io) {
    RawSpace raw = read_space(cfg.input);
    auto v = validate_metric(raw.dist, std::move(raw.labels));
    json doc;
    doc["valid"] = v.valid();
    doc["n"] = raw.dist.size();
    if (v.valid()) {
        doc["diameter"] = v.space->diameter();
        doc["min_positive_distance"] =
            std::isfinite(v.space->min_positive_distance()) ? json(v.space->min_positive_distance()) : json(nullptr);
        doc["violation"] = nullptr;
    } else {
        doc["violation"] = {{"kind", v.violation->name()}, {"indices", v.violation->indices()}};
    }
    io.emit(doc);
    return v.valid() ? kOk : kRejected;
}

inline int cmd_doubling(const RunConfig& cfg, const Output& io) {
    const auto space = load_space(cfg.input);
    const auto r = doubling_constant(space);
    io.emit({{"n", space.size()},
             {"constant", r.constant},
             {"mode", r.exact ? "exact" : "greedy_upper_bound"},
             {"witness", {{"x", r.x}, {"r", r.r}}}});
    return kOk;
}

inline int cmd_plump_check(const RunConfig& cfg, const Output& io) {
    const auto space = load_space(cfg.input);
    if (cfg.subset.empty()) throw InputError("--subset is required");
    const auto subset = load_subset(cfg.subset, space.size());
    const bool plain = RunConfig::given(cfg.o_R) || RunConfig::given(cfg.o_b);
    const bool dyadic = RunConfig::given(cfg.o_delta) || RunConfig::given(cfg.o_b0) || RunConfig::given(cfg.o_B0) ||
                        RunConfig::given(cfg.o_m);
    if (plain == dyadic) throw InputError("give either --R/--b or --delta/--m/--b0/--B0");
    PlumpnessVerdict verdict;
    if (plain) {
        if (!RunConfig::given(cfg.o_R) || !RunConfig::given(cfg.o_b)) throw InputError("plumpness needs --R and --b");
        verdict = check_plump(space, subset, PlumpParams{cfg.R, cfg.b});
    } else {
        verdict = check_dplump(space, subset, cfg.dplump());
    }
    io.emit(to_json(verdict));
    return verdict.certified ? kOk : kRejected;
}

inline json mode_block(bool exhaustive, bool full) {
    return {{"verification", exhaustive ? "exhaustive" : "partial"}, {"resolution", full ? "full" : "capped"}};
}

inline int cmd_build_system(const RunConfig& cfg, const Output& io) {
    const auto space = load_space(cfg.input);
    for (auto* o : {cfg.o_delta, cfg.o_c0, cfg.o_C0})
        if (!RunConfig::given(o)) throw InputError("build-system needs --delta, --c0 and --C0");
    const auto params = make_net_params(space, cfg.delta, cfg.c0, cfg.C0, cfg.kmin(), cfg.kmax());
    if (12.0 * params.C0 * params.delta > params.c0) throw Error("HypothesisViolated", "need 12*C0*delta <= c0");
    const auto points = build_plain_points(space, params);
    const auto order = build_order(space, points);
    const auto cubes = build_cube_system(space, points, order);
    const auto rp = verify_point_system(space, points);
    const auto ro = verify_order(space, points, order);
    const auto rc = verify_cube_system(space, cubes);
    json doc{{"points", to_json(points)},
             {"order", to_json(order)},
             {"cubes", to_json(cubes)},
             {"verification", {{"points", to_json(rp)}, {"order", to_json(ro)}, {"cubes", to_json(rc)}}},
             {"mode", mode_block(rp.exhaustive && ro.exhaustive && rc.exhaustive, true)}};
    stamp_digest(doc);
    io.emit(doc);
    return rp.ok() && ro.ok() && rc.ok() ? kOk : kRejected;
}

inline int cmd_certify_cube(const RunConfig& cfg, const Output& io) {
    const auto space = load_space(cfg.input);
    if (cfg.subset.empty()) throw InputError("--subset is required");
    const auto subset = load_subset(cfg.subset, space.size());
    if (subset.none()) throw Error("EmptySubset", "the empty set cannot be a cube");

    DPlumpParams params;
    json auto_block;
    if (cfg.auto_params) {
        if (!RunConfig::given(cfg.o_delta)) throw InputError("--auto needs --delta");
        for (auto* o : {cfg.o_m, cfg.o_b0, cfg.o_B0})
            if (RunConfig::given(o)) throw InputError("--auto chooses m, b0 and B0 itself");
        auto found = auto_params(space, subset, cfg.delta);
        if (!found.params) {
            json doc{{"accepted", false},
                     {"auto", {{"feasible", false},
                               {"binding", found.binding},
                               {"failure", found.failure ? to_json(*found.failure) : json(nullptr)}}}};
            stamp_digest(doc);
            io.emit(doc);
            return kRejected;
        }
        params = *found.params;
        auto_block = {{"feasible", true}, {"params", to_json(params)}};
    } else {
        params = cfg.dplump();
    }

    const auto cert = certify_cube_candidate(space, subset, params, LevelRange{cfg.kmin(), cfg.kmax()});
    json doc = to_json(cert);
    if (!auto_block.is_null()) {
        doc["auto"] = auto_block;
        stamp_digest(doc);
    }
    io.emit(doc);
    return cert.accepted() ? kOk : kRejected;
}

inline int cmd_verify_system(const RunConfig& cfg, const Output& io) {
    const auto space = load_space(cfg.input);
    const json doc = parse_json(read_file(cfg.system), cfg.system);
    DyadicPointSystem points;
    ParentOrder order;
    std::optional<CubeSystem> cubes;
    bool rebuilt = false;
    try {
        points = point_system_from_json(doc.at("points"));
        order = order_from_json(doc.at("order"));
        if (doc.contains("cubes") && !doc.at("cubes").is_null()) {
            try {
                cubes = cube_system_from_json(doc.at("cubes"));
            } catch (const Error& e) {
                if (e.code() != "Elided") throw;
                rebuilt = true;
            }
        }
    } catch (const json::exception& e) {
        throw InputError("bad system schema: " + std::string(e.what()));
    }
    if (points.subset && points.subset->size() != space.size()) throw InputError("system subset size differs from space");

    const auto rp = verify_point_system(space, points);
    const auto ro = verify_order(space, points, order);
    json verification{{"points", to_json(rp)}, {"order", to_json(ro)}, {"cubes", nullptr}};
    bool ok = rp.ok() && ro.ok();
    bool exhaustive = rp.exhaustive && ro.exhaustive;
    if (rebuilt && ok) {
        // elided members: rebuild from points and order, then compare digests
        cubes = build_cube_system(space, points, order);
        const json again = to_json(*cubes);
        if (again != doc.at("cubes")) {
            ok = false;
            verification["cubes_digest_mismatch"] = true;
        }
    }
    if (cubes) {
        const auto rc = verify_cube_system(space, *cubes);
        verification["cubes"] = to_json(rc);
        ok = ok && rc.ok();
        exhaustive = exhaustive && rc.exhaustive;
    }
    io.emit({{"ok", ok}, {"verification", verification}, {"mode", mode_block(exhaustive, true)}, {"rebuilt_cubes", rebuilt}});
    return ok ? kOk : kRejected;
}

/// Parses `args` (without the program name) and runs one command.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Dyadic cube systems on finite metric spaces", "dyadic"};
    app.require_subcommand(1);
    RunConfig cfg;

    auto add_input = [&](CLI::App* sub) { sub->add_option("input", cfg.input, "CSV coordinates or JSON distance matrix")->required(); };
    auto add_dplump = [&](CLI::App* sub) {
        cfg.o_delta = sub->add_option("--delta", cfg.delta, "scale ratio in (0,1)");
        cfg.o_m = sub->add_option("--m", cfg.m, "coarsest constrained generation");
        cfg.o_b0 = sub->add_option("--b0", cfg.b0, "inner-ball factor");
        cfg.o_B0 = sub->add_option("--B0", cfg.B0, "outer-ball factor");
    };
    auto add_levels = [&](CLI::App* sub) {
        cfg.o_kmin = sub->add_option("--kmin", cfg.k_min, "coarsest generation");
        cfg.o_kmax = sub->add_option("--kmax", cfg.k_max, "finest generation");
    };
    auto add_out = [&](CLI::App* sub) { sub->add_option("--out", cfg.out, "write JSON here instead of stdout"); };

    auto* validate_cmd = app.add_subcommand("validate", "check the metric axioms");
    add_input(validate_cmd);
    add_out(validate_cmd);

    auto* doubling_cmd = app.add_subcommand("doubling", "doubling constant");
    add_input(doubling_cmd);
    add_out(doubling_cmd);

    auto* plump_cmd = app.add_subcommand("plump-check", "plumpness or d-plumpness of a subset");
    add_input(plump_cmd);
    add_dplump(plump_cmd);
    plump_cmd->add_option("--subset", cfg.subset, "JSON list of point indices");
    auto* o_R = plump_cmd->add_option("--R", cfg.R, "radius bound");
    auto* o_b = plump_cmd->add_option("--b", cfg.b, "corkscrew fraction");
    add_out(plump_cmd);

    auto* build_cmd = app.add_subcommand("build-system", "points, order and cubes with verification");
    add_input(build_cmd);
    auto* d_build = build_cmd->add_option("--delta", cfg.delta, "scale ratio in (0,1)");
    auto* c0_build = build_cmd->add_option("--c0", cfg.c0, "separation factor");
    auto* C0_build = build_cmd->add_option("--C0", cfg.C0, "covering factor");
    add_levels(build_cmd);
    add_out(build_cmd);

    auto* certify_cmd = app.add_subcommand("certify-cube", "realise a subset as a dyadic cube");
    add_input(certify_cmd);
    auto* d_cert = certify_cmd->add_option("--delta", cfg.delta, "scale ratio in (0,1)");
    auto* m_cert = certify_cmd->add_option("--m", cfg.m, "generation of the cube");
    auto* b0_cert = certify_cmd->add_option("--b0", cfg.b0, "inner-ball factor");
    auto* B0_cert = certify_cmd->add_option("--B0", cfg.B0, "outer-ball factor");
    certify_cmd->add_option("--subset", cfg.subset, "JSON list of point indices");
    certify_cmd->add_flag("--auto", cfg.auto_params, "search b0 and B0 for the given delta");
    auto* kmin_cert = certify_cmd->add_option("--kmin", cfg.k_min, "coarsest generation");
    auto* kmax_cert = certify_cmd->add_option("--kmax", cfg.k_max, "finest generation");
    add_out(certify_cmd);

    auto* verify_cmd = app.add_subcommand("verify-system", "re-verify a serialized system");
    add_input(verify_cmd);
    verify_cmd->add_option("system", cfg.system, "output of build-system")->required();
    add_out(verify_cmd);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << json{{"error", "Usage"}, {"message", e.what()}}.dump() << "\n";
        return kError;
    }

    // options registered per subcommand share RunConfig storage; point the
    // handles at the subcommand that actually ran
    cfg.o_R = o_R;
    cfg.o_b = o_b;
    if (*build_cmd) {
        cfg.o_delta = d_build;
        cfg.o_c0 = c0_build;
        cfg.o_C0 = C0_build;
    } else if (*certify_cmd) {
        cfg.o_delta = d_cert;
        cfg.o_m = m_cert;
        cfg.o_b0 = b0_cert;
        cfg.o_B0 = B0_cert;
        cfg.o_kmin = kmin_cert;
        cfg.o_kmax = kmax_cert;
    }

    const Output io{out, err, cfg.out};
    try {
        if (*validate_cmd) return cmd_validate(cfg, io);
        if (*doubling_cmd) return cmd_doubling(cfg, io);
        if (*plump_cmd) return cmd_plump_check(cfg, io);
        if (*build_cmd) return cmd_build_system(cfg, io);
        if (*certify_cmd) return cmd_certify_cube(cfg, io);
        if (*verify_cmd) return cmd_verify_system(cfg, io);
    } catch (const InputError& e) {
        err << json{{"error", "Input"}, {"message", e.what()}}.dump() << "\n";
        return kError;
    } catch (const Error& e) {
        err << json{{"error", e.code()}, {"message", e.what()}, {"location", e.location()}}.dump() << "\n";
        return kError;
    }
    return kError;
}

} // namespace dyadic::cli

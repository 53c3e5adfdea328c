#include "cohevo/config.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

namespace cohevo {

using nlohmann::json;

namespace {

const json& require(const json& j, const char* field, const char* where) {
    const auto it = j.find(field);
    if (it == j.end())
        throw ConfigError(std::string("config: missing field '") + where + "." + field + "'");
    return *it;
}

double require_number(const json& j, const char* field, const char* where) {
    const json& v = require(j, field, where);
    if (!v.is_number())
        throw ConfigError(std::string("config: field '") + where + "." + field +
                          "' must be a number");
    return v.get<double>();
}

double optional_number(const json& j, const char* field, double fallback) {
    const auto it = j.find(field);
    return it == j.end() ? fallback : it->get<double>();
}

Vec optional_vec(const json& j, const char* field) {
    const auto it = j.find(field);
    if (it == j.end()) return {};
    return it->get<Vec>();
}

TimeSignal parse_signal(const json& j, const char* where) {
    TimeSignal sig;
    const std::string family = require(j, "family", where).get<std::string>();
    if (family == "constant")
        sig.family = TimeFamily::Constant;
    else if (family == "ramp")
        sig.family = TimeFamily::Ramp;
    else if (family == "triangle")
        sig.family = TimeFamily::Triangle;
    else if (family == "sinusoid")
        sig.family = TimeFamily::Sinusoid;
    else
        throw ConfigError(std::string("config: unknown time family '") + family + "' in " + where);
    sig.scale = require_number(j, "scale", where);
    sig.t_peak = optional_number(j, "t_peak", 0.5);
    sig.omega = optional_number(j, "omega", 1.0);
    return sig;
}

json signal_to_json(const TimeSignal& sig) {
    const char* family = "constant";
    switch (sig.family) {
        case TimeFamily::Constant: family = "constant"; break;
        case TimeFamily::Ramp: family = "ramp"; break;
        case TimeFamily::Triangle: family = "triangle"; break;
        case TimeFamily::Sinusoid: family = "sinusoid"; break;
    }
    return json{{"family", family}, {"scale", sig.scale}, {"t_peak", sig.t_peak},
                {"omega", sig.omega}};
}

MeshSpec parse_mesh(const json& j) {
    MeshSpec spec;
    spec.type = require(j, "type", "mesh").get<std::string>();
    spec.field_dim = static_cast<int>(optional_number(j, "field_dim", 1));
    if (spec.type == "rod") {
        spec.length = require_number(j, "length", "mesh");
        spec.elements = static_cast<int>(require_number(j, "elements", "mesh"));
        spec.interface_position = require_number(j, "interface_position", "mesh");
    } else if (spec.type == "rect") {
        spec.width = require_number(j, "width", "mesh");
        spec.height = require_number(j, "height", "mesh");
        spec.nx = static_cast<int>(require_number(j, "nx", "mesh"));
        spec.ny = static_cast<int>(require_number(j, "ny", "mesh"));
        spec.crack_x0 = require_number(j, "crack_x0", "mesh");
        spec.crack_x1 = require_number(j, "crack_x1", "mesh");
        if (j.contains("dirichlet_sides"))
            spec.dirichlet_sides = j["dirichlet_sides"].get<std::vector<std::string>>();
    } else {
        throw ConfigError("config: mesh.type must be 'rod' or 'rect'");
    }
    return spec;
}

BulkModel parse_bulk(const json& j) {
    BulkModel model;
    const std::string variant = require(j, "variant", "bulk").get<std::string>();
    if (variant == "quadratic_scalar") {
        model.variant = BulkVariant::QuadraticScalar;
    } else if (variant == "p_power") {
        model.variant = BulkVariant::PPower;
        model.p = require_number(j, "p", "bulk");
        if (!(model.p > 1.0)) throw ConfigError("config: bulk.p must be > 1");
    } else if (variant == "linear_elasticity") {
        model.variant = BulkVariant::LinearElasticity;
        model.lambda_lame = require_number(j, "lambda", "bulk");
        model.mu_lame = require_number(j, "mu", "bulk");
        if (!(model.mu_lame > 0.0)) throw ConfigError("config: bulk.mu must be > 0");
        if (model.lambda_lame < 0.0) throw ConfigError("config: bulk.lambda must be >= 0");
    } else {
        throw ConfigError(std::string("config: unknown bulk.variant '") + variant + "'");
    }
    model.element_scale = optional_vec(j, "element_scale");
    for (double s : model.element_scale)
        if (!(s > 0.0)) throw ConfigError("config: bulk.element_scale entries must be > 0");
    return model;
}

CohesiveLaw parse_law(const json& j) {
    CohesiveLaw law;
    const std::string variant = require(j, "variant", "law").get<std::string>();
    if (variant == "linear")
        law.variant = CohesiveVariant::Linear;
    else if (variant == "griffith")
        law.variant = CohesiveVariant::Griffith;
    else if (variant == "smooth_saturating")
        law.variant = CohesiveVariant::SmoothSaturating;
    else
        throw ConfigError(std::string("config: unknown law.variant '") + variant + "'");
    law.a = optional_number(j, "a", 0.0);
    law.b = require_number(j, "b", "law");
    law.c_sat = optional_number(j, "c", 1.0);
    law.node_a = optional_vec(j, "node_a");
    law.node_b = optional_vec(j, "node_b");
    if (law.a < 0.0) throw ConfigError("config: law.a must be >= 0");
    if (law.b < 0.0) throw ConfigError("config: law.b must be >= 0");
    if (!(law.c_sat > 0.0)) throw ConfigError("config: law.c must be > 0");
    law.validate();
    return law;
}

LoadProgram parse_load(const json& j) {
    LoadProgram prog;
    const json& psi = require(j, "psi", "load");
    const json& profile = require(psi, "profile", "load.psi");
    prog.psi_profile.matrix = require(profile, "matrix", "load.psi.profile").get<Vec>();
    prog.psi_profile.offset = require(profile, "offset", "load.psi.profile").get<Vec>();
    prog.psi_signal = parse_signal(require(psi, "signal", "load.psi"), "load.psi.signal");

    const auto parse_term = [&](const char* name, Vec& value, TimeSignal& sig) {
        if (!j.contains(name)) return;
        const json& term = j[name];
        value = require(term, "value", name).get<Vec>();
        sig = parse_signal(require(term, "signal", name), name);
    };
    parse_term("f", prog.f_value, prog.f_signal);
    parse_term("H", prog.h_value, prog.h_signal);
    parse_term("g", prog.g_value, prog.g_signal);
    if (j.contains("H") && j["H"].contains("per_element"))
        prog.h_per_element = j["H"]["per_element"].get<Vec>();
    if (j.contains("g_plus")) {
        prog.g_plus_value = require(j["g_plus"], "value", "load.g_plus").get<Vec>();
        prog.g_pm_signal = parse_signal(require(j["g_plus"], "signal", "load.g_plus"),
                                        "load.g_plus.signal");
    }
    if (j.contains("g_minus")) {
        prog.g_minus_value = require(j["g_minus"], "value", "load.g_minus").get<Vec>();
        if (!j.contains("g_plus"))
            prog.g_pm_signal = parse_signal(require(j["g_minus"], "signal", "load.g_minus"),
                                            "load.g_minus.signal");
    }
    return prog;
}

json load_to_json(const LoadProgram& prog) {
    json j;
    j["psi"] = {{"profile", {{"matrix", prog.psi_profile.matrix},
                             {"offset", prog.psi_profile.offset}}},
                {"signal", signal_to_json(prog.psi_signal)}};
    if (!prog.f_value.empty())
        j["f"] = {{"value", prog.f_value}, {"signal", signal_to_json(prog.f_signal)}};
    if (!prog.h_value.empty() || !prog.h_per_element.empty()) {
        j["H"] = {{"value", prog.h_value}, {"signal", signal_to_json(prog.h_signal)}};
        if (!prog.h_per_element.empty()) j["H"]["per_element"] = prog.h_per_element;
    }
    if (!prog.g_value.empty())
        j["g"] = {{"value", prog.g_value}, {"signal", signal_to_json(prog.g_signal)}};
    if (!prog.g_plus_value.empty())
        j["g_plus"] = {{"value", prog.g_plus_value}, {"signal", signal_to_json(prog.g_pm_signal)}};
    if (!prog.g_minus_value.empty())
        j["g_minus"] = {{"value", prog.g_minus_value},
                        {"signal", signal_to_json(prog.g_pm_signal)}};
    return j;
}

SolverOptions parse_solver(const json& j) {
    SolverOptions opts;
    if (j.contains("algorithm")) {
        const std::string alg = j["algorithm"].get<std::string>();
        if (alg == "proximal_gradient_accelerated")
            opts.algorithm = Algorithm::ProximalGradientAccelerated;
        else if (alg == "schur_coordinate_descent")
            opts.algorithm = Algorithm::SchurCoordinateDescent;
        else
            throw ConfigError(std::string("config: unknown solver.algorithm '") + alg + "'");
    }
    opts.max_iterations = static_cast<int>(optional_number(j, "max_iterations", 20000));
    opts.objective_tolerance = optional_number(j, "objective_tolerance", 1e-13);
    opts.residual_tolerance = optional_number(j, "residual_tolerance", 1e-10);
    opts.power_iterations = static_cast<int>(optional_number(j, "power_iterations", 50));
    opts.step_safety = optional_number(j, "step_safety", 1.05);
    if (j.contains("restart_on_nonmonotone"))
        opts.restart_on_nonmonotone = j["restart_on_nonmonotone"].get<bool>();
    if (opts.max_iterations <= 0) throw ConfigError("config: solver.max_iterations must be > 0");
    if (!(opts.objective_tolerance > 0.0))
        throw ConfigError("config: solver.objective_tolerance must be > 0");
    if (!(opts.residual_tolerance > 0.0))
        throw ConfigError("config: solver.residual_tolerance must be > 0");
    return opts;
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    RunConfig config;
    config.mesh = parse_mesh(require(j, "mesh", "root"));
    config.bulk = parse_bulk(require(j, "bulk", "root"));
    config.law = parse_law(require(j, "law", "root"));
    config.load = parse_load(require(j, "load", "root"));

    const json& grid = require(j, "grid", "root");
    if (grid.contains("knots")) {
        config.grid.knots = grid["knots"].get<Vec>();
        if (config.grid.knots.size() < 2) throw ConfigError("config: grid.knots needs >= 2 knots");
        config.grid.horizon = config.grid.knots.back();
        config.grid.steps = config.grid.knots.size() - 1;
    } else {
        config.grid.steps = static_cast<std::size_t>(require_number(grid, "steps", "grid"));
        config.grid.horizon = require_number(grid, "horizon", "grid");
        if (config.grid.steps == 0) throw ConfigError("config: grid.steps must be > 0");
        if (!(config.grid.horizon > 0.0)) throw ConfigError("config: grid.horizon must be > 0");
    }
    config.load.horizon = config.grid.horizon;

    if (j.contains("initial_gamma")) {
        const json& g = j["initial_gamma"];
        if (g.is_number()) {
            config.initial_gamma = g.get<double>();
            if (config.initial_gamma < 0.0)
                throw ConfigError("config: initial_gamma must be >= 0");
        } else if (g.is_array()) {
            config.initial_gamma_nodes = g.get<Vec>();
            for (double v : config.initial_gamma_nodes)
                if (v < 0.0) throw ConfigError("config: initial_gamma entries must be >= 0");
        } else {
            throw ConfigError("config: initial_gamma must be a number or an array");
        }
    }
    if (j.contains("solver")) config.solver = parse_solver(j["solver"]);

    if (j.contains("run")) {
        const json& r = j["run"];
        if (r.contains("strict")) config.run.strict = r["strict"].get<bool>();
        if (r.contains("output_dir")) config.run.output_dir = r["output_dir"].get<std::string>();
        config.run.snapshot_times = optional_vec(r, "snapshot_times");
        config.run.stability_competitors =
            static_cast<std::size_t>(optional_number(r, "stability_competitors", 0));
        config.run.stability_stride =
            static_cast<std::size_t>(optional_number(r, "stability_stride", 10));
        config.run.stability_seed =
            static_cast<unsigned>(optional_number(r, "stability_seed", 20240101));
        if (r.contains("euler_check")) config.run.euler_check = r["euler_check"].get<bool>();
        config.run.balance_threshold_frac =
            optional_number(r, "balance_threshold_frac", 0.02);
    }
    return config;
}

std::string serialize_run_config(const RunConfig& config) {
    json j;
    json mesh;
    mesh["type"] = config.mesh.type;
    mesh["field_dim"] = config.mesh.field_dim;
    if (config.mesh.type == "rod") {
        mesh["length"] = config.mesh.length;
        mesh["elements"] = config.mesh.elements;
        mesh["interface_position"] = config.mesh.interface_position;
    } else {
        mesh["width"] = config.mesh.width;
        mesh["height"] = config.mesh.height;
        mesh["nx"] = config.mesh.nx;
        mesh["ny"] = config.mesh.ny;
        mesh["crack_x0"] = config.mesh.crack_x0;
        mesh["crack_x1"] = config.mesh.crack_x1;
        mesh["dirichlet_sides"] = config.mesh.dirichlet_sides;
    }
    j["mesh"] = mesh;

    json bulk;
    switch (config.bulk.variant) {
        case BulkVariant::QuadraticScalar: bulk["variant"] = "quadratic_scalar"; break;
        case BulkVariant::PPower:
            bulk["variant"] = "p_power";
            bulk["p"] = config.bulk.p;
            break;
        case BulkVariant::LinearElasticity:
            bulk["variant"] = "linear_elasticity";
            bulk["lambda"] = config.bulk.lambda_lame;
            bulk["mu"] = config.bulk.mu_lame;
            break;
    }
    if (!config.bulk.element_scale.empty()) bulk["element_scale"] = config.bulk.element_scale;
    j["bulk"] = bulk;

    json law;
    switch (config.law.variant) {
        case CohesiveVariant::Linear: law["variant"] = "linear"; break;
        case CohesiveVariant::Griffith: law["variant"] = "griffith"; break;
        case CohesiveVariant::SmoothSaturating: law["variant"] = "smooth_saturating"; break;
    }
    law["a"] = config.law.a;
    law["b"] = config.law.b;
    law["c"] = config.law.c_sat;
    if (!config.law.node_a.empty()) law["node_a"] = config.law.node_a;
    if (!config.law.node_b.empty()) law["node_b"] = config.law.node_b;
    j["law"] = law;

    j["load"] = load_to_json(config.load);

    if (!config.grid.knots.empty())
        j["grid"] = {{"knots", config.grid.knots}};
    else
        j["grid"] = {{"steps", config.grid.steps}, {"horizon", config.grid.horizon}};

    if (!config.initial_gamma_nodes.empty())
        j["initial_gamma"] = config.initial_gamma_nodes;
    else
        j["initial_gamma"] = config.initial_gamma;

    j["solver"] = {
        {"algorithm", config.solver.algorithm == Algorithm::ProximalGradientAccelerated
                          ? "proximal_gradient_accelerated"
                          : "schur_coordinate_descent"},
        {"max_iterations", config.solver.max_iterations},
        {"objective_tolerance", config.solver.objective_tolerance},
        {"residual_tolerance", config.solver.residual_tolerance},
        {"power_iterations", config.solver.power_iterations},
        {"step_safety", config.solver.step_safety},
        {"restart_on_nonmonotone", config.solver.restart_on_nonmonotone}};

    j["run"] = {{"strict", config.run.strict},
                {"output_dir", config.run.output_dir},
                {"snapshot_times", config.run.snapshot_times},
                {"stability_competitors", config.run.stability_competitors},
                {"stability_stride", config.run.stability_stride},
                {"stability_seed", config.run.stability_seed},
                {"euler_check", config.run.euler_check},
                {"balance_threshold_frac", config.run.balance_threshold_frac}};
    return j.dump(2);
}

StudyConfig parse_study_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    StudyConfig study;
    study.base = parse_run_config(require(j, "run", "root").dump());
    const json& spec = require(j, "study", "root");
    for (const auto& lvl : require(spec, "levels", "study"))
        study.spec.levels.push_back(lvl.get<std::size_t>());
    study.spec.checkpoints = require(spec, "checkpoints", "study").get<Vec>();
    const std::string oracle =
        spec.contains("oracle") ? spec["oracle"].get<std::string>() : "none";
    if (oracle == "none")
        study.spec.oracle = OracleFamily::None;
    else if (oracle == "analytic_1d_linear")
        study.spec.oracle = OracleFamily::Linear1d;
    else if (oracle == "analytic_1d_griffith")
        study.spec.oracle = OracleFamily::Griffith1d;
    else
        throw ConfigError(std::string("config: unknown study.oracle '") + oracle + "'");
    study.spec.min_rate = optional_number(spec, "min_rate", 0.9);
    return study;
}

Mesh build_mesh(const MeshSpec& spec) {
    if (spec.type == "rod")
        return build_rod_mesh(spec.length, spec.elements, spec.interface_position,
                              spec.field_dim);
    RectMeshOptions opts;
    opts.field_dim = spec.field_dim;
    opts.dirichlet_sides.clear();
    for (const std::string& s : spec.dirichlet_sides) {
        if (s == "top")
            opts.dirichlet_sides.push_back(Side::Top);
        else if (s == "bottom")
            opts.dirichlet_sides.push_back(Side::Bottom);
        else if (s == "left")
            opts.dirichlet_sides.push_back(Side::Left);
        else if (s == "right")
            opts.dirichlet_sides.push_back(Side::Right);
        else
            throw ConfigError(std::string("config: unknown Dirichlet side '") + s + "'");
    }
    return build_rect_mesh_with_crack(spec.width, spec.height, spec.nx, spec.ny, spec.crack_x0,
                                      spec.crack_x1, opts);
}

TimeGrid build_grid(const GridSpec& spec) {
    if (!spec.knots.empty()) {
        TimeGrid grid;
        grid.knots = spec.knots;
        grid.validate();
        return grid;
    }
    return TimeGrid::uniform(spec.horizon, spec.steps);
}

InternalVariable build_initial_gamma(const RunConfig& config, const Mesh& mesh) {
    InternalVariable gamma;
    if (!config.initial_gamma_nodes.empty()) {
        if (config.initial_gamma_nodes.size() != mesh.interface.size())
            throw ConfigError("config: initial_gamma array size does not match interface nodes");
        gamma.gamma = config.initial_gamma_nodes;
    } else {
        gamma.gamma.assign(mesh.interface.size(), config.initial_gamma);
    }
    gamma.validate();
    return gamma;
}

}  // namespace cohevo

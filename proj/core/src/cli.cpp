#include "cohevo/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cohevo/config.hpp"
#include "cohevo/euler_analysis.hpp"
#include "cohevo/io_util.hpp"

namespace cohevo::cli {

namespace fs = std::filesystem;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path.string());
    out << text;
}

// --------------------------------------------------------------------------
// run artifacts
// --------------------------------------------------------------------------

struct RunArtifacts {
    const RunConfig& config;
    const Mesh& mesh;
    const EvolutionTrace& trace;
    std::vector<EulerReport> euler;  // one per knot when enabled
    std::vector<StabilityReport> stability;
    Vec stability_times;
};

std::string trace_csv(const RunArtifacts& art) {
    std::ostringstream os;
    os << "time,bulk,load_work,crack_term,total,theta,dissipation_increment,dissipation_total,"
          "work_integral,balance_residual,balance_tolerance,grad_norm,gamma_l1,apriori_bound,"
          "solver_iterations,solver_objective,solver_residual,solver_converged,solver_candidate,"
          "euler_checked,euler_interior,euler_action_reaction,euler_condition,"
          "euler_lambda_violation,euler_max_traction,euler_deadzone_traction,"
          "euler_active_alignment\n";
    for (std::size_t i = 0; i < art.trace.steps.size(); ++i) {
        const StepRecord& s = art.trace.steps[i];
        os << g17(s.time) << ',' << g17(s.energy.bulk) << ',' << g17(s.energy.load_work) << ','
           << g17(s.energy.crack_term) << ',' << g17(s.energy.total) << ',' << g17(s.theta) << ','
           << g17(s.dissipation_increment) << ',' << g17(s.dissipation_total) << ','
           << g17(s.work_integral) << ',' << g17(s.balance_residual) << ','
           << g17(s.balance_tolerance) << ',' << g17(s.grad_norm) << ',' << g17(s.gamma_l1) << ','
           << g17(s.apriori_bound) << ',' << s.solver.iterations << ','
           << g17(s.solver.objective) << ',' << g17(s.solver.residual) << ','
           << (s.solver.converged ? 1 : 0) << ',' << s.solver.candidate;
        if (i < art.euler.size()) {
            const EulerReport& e = art.euler[i];
            os << ",1," << g17(e.interior_residual) << ',' << g17(e.action_reaction) << ','
               << g17(e.max_condition_residual) << ',' << g17(e.max_lambda_violation) << ','
               << g17(e.max_abs_traction) << ',' << g17(e.max_deadzone_traction) << ','
               << g17(e.min_active_alignment);
        } else {
            os << ",0,0,0,0,0,0,0,0";
        }
        os << '\n';
    }
    return os.str();
}

std::string matrix_csv(const char* prefix, const EvolutionTrace& trace,
                       const std::vector<Vec>& rows) {
    std::ostringstream os;
    os << "time";
    const std::size_t cols = rows.empty() ? 0 : rows.front().size();
    for (std::size_t e = 0; e < cols; ++e) os << ',' << prefix << e;
    os << '\n';
    for (std::size_t i = 0; i < rows.size(); ++i) {
        os << g17(trace.steps[i].time);
        for (double v : rows[i]) os << ',' << g17(v);
        os << '\n';
    }
    return os.str();
}

std::string field_json(const RunArtifacts& art, std::size_t knot) {
    nlohmann::json j;
    const Mesh& mesh = art.mesh;
    j["time"] = art.trace.steps[knot].time;
    j["field_dim"] = mesh.field_dim;
    j["dimension"] = mesh.dimension;
    nlohmann::json coords = nlohmann::json::array();
    for (std::size_t n = 0; n < mesh.n_nodes(); ++n) {
        nlohmann::json c = nlohmann::json::array();
        for (int d = 0; d < mesh.dimension; ++d) c.push_back(mesh.node_coord(n, d));
        coords.push_back(c);
    }
    j["coords"] = coords;
    j["u"] = art.trace.u_snapshots[knot];
    j["gamma"] = art.trace.gamma_snapshots[knot];
    j["phi"] = art.trace.phi_snapshots[knot];
    j["jump_magnitude"] = jump_magnitudes(mesh, art.trace.u_snapshots[knot]);
    return j.dump(2);
}

void write_run_artifacts(const fs::path& out, const RunArtifacts& art) {
    fs::create_directories(out);
    fs::create_directories(out / "fields");
    write_file(out / "config.json", serialize_run_config(art.config));
    write_file(out / "mesh.json", mesh_to_json(art.mesh));
    write_file(out / "trace.csv", trace_csv(art));
    write_file(out / "gamma.csv", matrix_csv("g", art.trace, art.trace.gamma_snapshots));
    write_file(out / "phi.csv", matrix_csv("phi", art.trace, art.trace.phi_snapshots));
    std::vector<Vec> jumps;
    jumps.reserve(art.trace.u_snapshots.size());
    for (const Vec& u : art.trace.u_snapshots) jumps.push_back(jump_magnitudes(art.mesh, u));
    write_file(out / "jumps.csv", matrix_csv("j", art.trace, jumps));

    if (!art.stability.empty()) {
        std::ostringstream os;
        os << "time,max_violation,competitors,pass\n";
        for (std::size_t i = 0; i < art.stability.size(); ++i)
            os << g17(art.stability_times[i]) << ',' << g17(art.stability[i].max_violation) << ','
               << art.stability[i].competitors << ',' << (art.stability[i].pass ? 1 : 0) << '\n';
        write_file(out / "stability.csv", os.str());
    }

    // field snapshots at requested times plus the final knot
    std::vector<std::size_t> snapshot_knots;
    TimeGrid grid;
    for (const auto& s : art.trace.steps) grid.knots.push_back(s.time);
    for (double t : art.config.run.snapshot_times) snapshot_knots.push_back(grid.index_at(t));
    snapshot_knots.push_back(art.trace.steps.size() - 1);
    std::sort(snapshot_knots.begin(), snapshot_knots.end());
    snapshot_knots.erase(std::unique(snapshot_knots.begin(), snapshot_knots.end()),
                         snapshot_knots.end());
    for (std::size_t knot : snapshot_knots) {
        char name[64];
        std::snprintf(name, sizeof(name), "u_%06zu.json", knot);
        write_file(out / "fields" / name, field_json(art, knot));
        if (knot < art.euler.size()) {
            std::snprintf(name, sizeof(name), "euler_%06zu.json", knot);
            write_file(out / "fields" / name, euler_report_to_json(art.euler[knot]));
        }
    }

    nlohmann::json info;
    info["completed"] = art.trace.completed;
    if (art.trace.non_converged_at)
        info["non_converged_at"] = *art.trace.non_converged_at;
    double peak = 0.0, max_residual = 0.0, max_tol = 0.0;
    bool apriori_ok = true;
    for (const auto& s : art.trace.steps) {
        peak = std::max(peak, std::fabs(s.energy.total));
        max_residual = std::max(max_residual, std::fabs(s.balance_residual));
        max_tol = std::max(max_tol, s.balance_tolerance);
        if (s.energy.total > s.apriori_bound + 1e-9 * (1.0 + std::fabs(s.apriori_bound)))
            apriori_ok = false;
    }
    info["peak_total_energy"] = peak;
    info["max_abs_balance_residual"] = max_residual;
    info["balance_threshold"] = art.config.run.balance_threshold_frac * peak;
    info["max_balance_tolerance"] = max_tol;
    info["apriori_bound_ok"] = apriori_ok;
    if (!art.stability.empty()) {
        double worst = 0.0;
        bool pass = true;
        for (const auto& r : art.stability) {
            worst = std::max(worst, r.max_violation);
            pass = pass && r.pass;
        }
        info["stability"] = {{"max_violation", worst}, {"pass", pass}};
    }
    write_file(out / "info.json", info.dump(2));
}

// --------------------------------------------------------------------------
// commands
// --------------------------------------------------------------------------

struct CommonFlags {
    std::string config_path;
    std::string out_dir;
    bool strict = false;
    bool no_strict = false;
    std::optional<unsigned> seed;
    std::string snapshots;
};

int cmd_run(const CommonFlags& flags) {
    RunConfig config;
    try {
        config = parse_run_config(read_file(flags.config_path));
        if (!flags.out_dir.empty()) config.run.output_dir = flags.out_dir;
        if (flags.strict) config.run.strict = true;
        if (flags.no_strict) config.run.strict = false;
        if (flags.seed) config.run.stability_seed = *flags.seed;
        if (!flags.snapshots.empty()) {
            config.run.snapshot_times.clear();
            std::stringstream ss(flags.snapshots);
            std::string tok;
            while (std::getline(ss, tok, ','))
                config.run.snapshot_times.push_back(std::stod(tok));
        }

        const Mesh mesh = build_mesh(config.mesh);
        if (!config.law.node_a.empty() && config.law.node_a.size() != mesh.interface.size())
            throw ConfigError("config: law.node_a size does not match interface nodes");
        if (!config.law.node_b.empty() && config.law.node_b.size() != mesh.interface.size())
            throw ConfigError("config: law.node_b size does not match interface nodes");
        if (!config.bulk.element_scale.empty() &&
            config.bulk.element_scale.size() != mesh.n_elements())
            throw ConfigError("config: bulk.element_scale size does not match elements");
        const TimeGrid grid = build_grid(config.grid);
        const InternalVariable gamma0 = build_initial_gamma(config, mesh);

        EvolutionOptions eopts;
        eopts.solver = config.solver;
        eopts.abort_on_nonconverged = config.run.strict;

        IncrementalSolver solver(mesh, config.bulk, config.law, config.load, config.solver);
        Configuration initial;
        initial.u.assign(mesh.n_dofs(), 0.0);
        initial.gamma = gamma0;
        initial.time = 0.0;
        auto [u0, info0] = solver.solve(0.0, gamma0, initial.u);
        initial.u = std::move(u0);

        const EvolutionTrace trace =
            run_evolution(mesh, config.bulk, config.law, config.load, grid, initial, eopts);

        RunArtifacts art{config, mesh, trace, {}, {}, {}};
        if (config.run.euler_check && !mesh.interface.empty()) {
            art.euler.reserve(trace.steps.size());
            for (std::size_t i = 0; i < trace.steps.size(); ++i) {
                InternalVariable g{trace.gamma_snapshots[i]};
                art.euler.push_back(euler_residuals(mesh, config.bulk, config.law, config.load,
                                                    trace.steps[i].time, trace.u_snapshots[i],
                                                    g));
            }
        }
        if (config.run.stability_competitors > 0) {
            for (std::size_t i = 0; i < trace.steps.size();
                 i += std::max<std::size_t>(1, config.run.stability_stride)) {
                Configuration cfg{trace.u_snapshots[i], InternalVariable{trace.gamma_snapshots[i]},
                                  trace.steps[i].time};
                const auto competitors = sample_competitors(
                    mesh, cfg.u, config.run.stability_competitors,
                    config.run.stability_seed + static_cast<unsigned>(i));
                art.stability.push_back(stability_check(cfg, competitors, config.bulk, config.law,
                                                        config.load, mesh, 1e-9));
                art.stability_times.push_back(trace.steps[i].time);
            }
        }

        write_run_artifacts(config.run.output_dir, art);
        if (trace.non_converged_at && config.run.strict) {
            std::cerr << "run: solver did not converge at knot " << *trace.non_converged_at
                      << " (strict mode)\n";
            return 2;
        }
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

// minimal CSV reader for the verify command ----------------------------------

struct CsvTable {
    std::vector<std::string> header;
    std::vector<Vec> rows;

    std::size_t column(const std::string& name) const {
        for (std::size_t c = 0; c < header.size(); ++c)
            if (header[c] == name) return c;
        throw ConfigError("verify: column '" + name + "' missing");
    }
};

CsvTable read_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("verify: missing artifact " + path.string());
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("verify: empty file " + path.string());
    std::stringstream hs(line);
    std::string tok;
    while (std::getline(hs, tok, ',')) table.header.push_back(tok);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ls(line);
        Vec row;
        while (std::getline(ls, tok, ',')) row.push_back(std::stod(tok));
        table.rows.push_back(std::move(row));
    }
    return table;
}

int fail_verify(const std::string& what) {
    std::cerr << "verify: FAIL " << what << '\n';
    return 3;
}

int cmd_verify(const std::string& dir) {
    try {
        const fs::path root(dir);
        const RunConfig config = parse_run_config(read_file((root / "config.json").string()));
        const CsvTable trace = read_csv(root / "trace.csv");
        const CsvTable gamma = read_csv(root / "gamma.csv");
        const CsvTable phi = read_csv(root / "phi.csv");
        if (gamma.rows.size() != trace.rows.size() || phi.rows.size() != trace.rows.size())
            throw ConfigError("verify: inconsistent row counts across artifacts");
        const std::size_t n = trace.rows.size();
        const std::size_t n_iface = gamma.header.size() - 1;

        // irreversibility: gamma pointwise nondecreasing, zero tolerance
        for (std::size_t i = 1; i < n; ++i)
            for (std::size_t e = 1; e <= n_iface; ++e)
                if (gamma.rows[i][e] < gamma.rows[i - 1][e])
                    return fail_verify("irreversibility: gamma decreased at knot " +
                                       std::to_string(i) + " node " + std::to_string(e - 1));
        std::cout << "verify: PASS irreversibility\n";

        // discrete ess-sup identity
        for (std::size_t e = 1; e <= n_iface; ++e) {
            double running = gamma.rows[0][e];
            for (std::size_t i = 0; i < n; ++i) {
                running = std::max(running, phi.rows[i][e]);
                if (std::fabs(gamma.rows[i][e] - running) > 1e-12)
                    return fail_verify("ess-sup identity at knot " + std::to_string(i) +
                                       " node " + std::to_string(e - 1));
            }
        }
        std::cout << "verify: PASS ess-sup identity\n";

        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t e = 1; e <= n_iface; ++e)
                if (phi.rows[i][e] > gamma.rows[i][e] + 1e-10)
                    return fail_verify("admissibility phi([u]) <= gamma at knot " +
                                       std::to_string(i) + " node " + std::to_string(e - 1));
        std::cout << "verify: PASS admissibility\n";

        const std::size_t c_total = trace.column("total");
        const std::size_t c_work = trace.column("work_integral");
        const std::size_t c_res = trace.column("balance_residual");
        const std::size_t c_tol = trace.column("balance_tolerance");
        double peak = 0.0;
        for (std::size_t i = 0; i < n; ++i) peak = std::max(peak, std::fabs(trace.rows[i][c_total]));
        for (std::size_t i = 0; i < n; ++i) {
            const double recomputed =
                trace.rows[i][c_total] - trace.rows[0][c_total] - trace.rows[i][c_work];
            if (std::fabs(recomputed - trace.rows[i][c_res]) > 1e-9 * (1.0 + peak))
                return fail_verify("balance residual column inconsistent at knot " +
                                   std::to_string(i));
            if (trace.rows[i][c_res] < -2.0 * trace.rows[i][c_tol] - 1e-12 * (1.0 + peak))
                return fail_verify("lower energy inequality at knot " + std::to_string(i));
            if (std::fabs(trace.rows[i][c_res]) > config.run.balance_threshold_frac * peak +
                                                      1e-12 * (1.0 + peak))
                return fail_verify("balance residual above threshold at knot " +
                                   std::to_string(i));
        }
        std::cout << "verify: PASS energy balance\n";

        const std::size_t c_echeck = trace.column("euler_checked");
        bool any_euler = false;
        for (std::size_t i = 0; i < n; ++i) any_euler = any_euler || trace.rows[i][c_echeck] > 0.5;
        if (any_euler && config.law.node_b.empty()) {
            const double b = config.law.b;
            const std::size_t c_max = trace.column("euler_max_traction");
            const std::size_t c_dead = trace.column("euler_deadzone_traction");
            const std::size_t c_align = trace.column("euler_active_alignment");
            const std::size_t c_conv = trace.column("solver_converged");
            for (std::size_t i = 0; i < n; ++i) {
                if (trace.rows[i][c_echeck] < 0.5 || trace.rows[i][c_conv] < 0.5) continue;
                if (trace.rows[i][c_max] > b + 1e-6)
                    return fail_verify("euler traction bound at knot " + std::to_string(i) +
                                       " (measured " + g17(trace.rows[i][c_max]) + ")");
                if (trace.rows[i][c_dead] > 1e-6)
                    return fail_verify("euler dead-zone traction at knot " + std::to_string(i) +
                                       " (measured " + g17(trace.rows[i][c_dead]) + ")");
                if (trace.rows[i][c_align] < -1e-9)
                    return fail_verify("euler opening alignment at knot " + std::to_string(i) +
                                       " (measured " + g17(trace.rows[i][c_align]) + ")");
            }
            std::cout << "verify: PASS euler residuals\n";
        }
        std::cout << "verify: all invariants hold\n";
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

int cmd_study(const CommonFlags& flags) {
    try {
        const StudyConfig study = parse_study_config(read_file(flags.config_path));
        RunConfig config = study.base;
        if (!flags.out_dir.empty()) config.run.output_dir = flags.out_dir;

        const Mesh mesh = build_mesh(config.mesh);
        const InternalVariable gamma0 = build_initial_gamma(config, mesh);
        EvolutionOptions eopts;
        eopts.solver = config.solver;

        const StudyTable table = convergence_study(mesh, config.bulk, config.law, config.load,
                                                   gamma0, study.spec, eopts);
        fs::create_directories(config.run.output_dir);
        write_file(fs::path(config.run.output_dir) / "study.csv", table.to_csv());

        bool ok = true;
        if (std::isfinite(table.worst_rate) && table.worst_rate < study.spec.min_rate) {
            std::cerr << "study: empirical rate " << g17(table.worst_rate) << " below "
                      << g17(study.spec.min_rate) << '\n';
            ok = false;
        }
        if (study.spec.oracle != OracleFamily::None) {
            // compare the finest level against the closed form
            const TimeGrid grid = TimeGrid::uniform(config.load.horizon, study.spec.levels.back());
            IncrementalSolver solver(mesh, config.bulk, config.law, config.load, config.solver);
            Configuration initial;
            initial.u.assign(mesh.n_dofs(), 0.0);
            initial.gamma = gamma0;
            auto [u0, info0] = solver.solve(0.0, gamma0, initial.u);
            initial.u = std::move(u0);
            const EvolutionTrace trace =
                run_evolution(mesh, config.bulk, config.law, config.load, grid, initial, eopts);
            const OracleError err = oracle_compare(mesh, config.bulk, config.law, config.load,
                                                   trace, study.spec.oracle);
            std::cout << "study: oracle errors sigma " << g17(err.max_sigma) << " delta "
                      << g17(err.max_delta) << " gamma " << g17(err.max_gamma) << '\n';
            if (err.max_sigma > 1e-6 || err.max_delta > 1e-6 || err.max_gamma > 1e-6) {
                std::cerr << "study: oracle deviation above 1e-6\n";
                ok = false;
            }
        }
        std::cout << table.to_csv();
        return ok ? 0 : 1;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace

int main(int argc, const char* const* argv) {
    CLI::App app{"cohevo: quasistatic cohesive crack evolution on a prescribed path"};
    app.require_subcommand(1);

    CommonFlags run_flags, study_flags;
    std::string verify_dir;

    CLI::App* run = app.add_subcommand("run", "run one evolution from a JSON config");
    run->add_option("--config", run_flags.config_path, "run configuration (JSON)")->required();
    run->add_option("--out", run_flags.out_dir, "output directory override");
    run->add_flag("--strict", run_flags.strict, "abort on non-converged steps (exit 2)");
    run->add_flag("--no-strict", run_flags.no_strict, "continue past non-converged steps");
    unsigned seed_val = 0;
    CLI::Option* seed_opt =
        run->add_option("--seed", seed_val, "seed for stability competitor sampling");
    run->add_option("--snapshots", run_flags.snapshots, "comma-separated snapshot times");

    CLI::App* verify = app.add_subcommand("verify", "check invariants of an existing run");
    verify->add_option("dir", verify_dir, "run output directory")->required();

    CLI::App* study = app.add_subcommand("study", "time-refinement convergence study");
    study->add_option("--config", study_flags.config_path, "study configuration (JSON)")
        ->required();
    study->add_option("--out", study_flags.out_dir, "output directory override");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    if (run->parsed()) {
        if (seed_opt->count() > 0) run_flags.seed = seed_val;
        return cmd_run(run_flags);
    }
    if (verify->parsed()) return cmd_verify(verify_dir);
    if (study->parsed()) return cmd_study(study_flags);
    return 1;
}

}  // namespace cohevo::cli

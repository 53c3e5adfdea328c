#include "cohevo/harness.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "cohevo/io_util.hpp"
#include "cohevo/parallel.hpp"

namespace cohevo {

double discrete_w12_norm(const Mesh& mesh, std::span<const double> v) {
    const double seminorm = grad_norm_p(mesh, v, 2.0);
    // mass-lumped L2 part
    double l2 = 0.0;
    const std::size_t npe = mesh.nodes_per_elem();
    const std::size_t m = static_cast<std::size_t>(mesh.field_dim);
    for (std::size_t e = 0; e < mesh.n_elements(); ++e) {
        const std::size_t* nd = mesh.element(e);
        const double w = mesh.elem_volume[e] / static_cast<double>(npe);
        for (std::size_t a = 0; a < npe; ++a)
            for (std::size_t c = 0; c < m; ++c) {
                const double x = v[nd[a] * m + c];
                l2 += w * x * x;
            }
    }
    return std::sqrt(seminorm * seminorm + l2);
}

StudyTable convergence_study(const Mesh& mesh, const BulkModel& model, const CohesiveLaw& law,
                             const LoadProgram& prog, const InternalVariable& gamma0,
                             const StudySpec& spec, const EvolutionOptions& opts) {
    if (spec.levels.size() < 3)
        throw std::invalid_argument("convergence_study: need at least 3 refinement levels");
    for (std::size_t l = 1; l < spec.levels.size(); ++l)
        if (spec.levels[l] <= spec.levels[l - 1])
            throw std::invalid_argument("convergence_study: levels must be strictly increasing");
    for (double c : spec.checkpoints)
        if (c < 0.0 || c > prog.horizon)
            throw std::invalid_argument("convergence_study: checkpoint outside [0, T]");

    const std::size_t n_levels = spec.levels.size();
    std::vector<EvolutionTrace> traces(n_levels);
    std::vector<TimeGrid> grids(n_levels);
    for (std::size_t l = 0; l < n_levels; ++l)
        grids[l] = TimeGrid::uniform(prog.horizon, spec.levels[l]);

    const auto run_level = [&](std::size_t l) {
        Configuration initial;
        initial.u.assign(mesh.n_dofs(), 0.0);
        initial.gamma = gamma0;
        initial.time = 0.0;
        IncrementalSolver solver(mesh, model, law, prog, opts.solver);
        auto [u0, info0] = solver.solve(0.0, gamma0, initial.u);
        initial.u = std::move(u0);
        traces[l] = run_evolution(mesh, model, law, prog, grids[l], initial, opts);
    };

    // levels run concurrently in batches of the capped width; results land
    // in per-level slots, so the merge order is deterministic
    const unsigned width = parallel_width(static_cast<unsigned>(n_levels));
    for (std::size_t base = 0; base < n_levels; base += width) {
        std::vector<std::future<void>> batch;
        for (std::size_t l = base; l < std::min(n_levels, base + width); ++l)
            batch.push_back(std::async(std::launch::async, run_level, l));
        for (auto& f : batch) f.get();
    }

    StudyTable table;
    table.levels = spec.levels;
    table.checkpoints = spec.checkpoints;
    table.cells.assign(n_levels, std::vector<StudyCell>(spec.checkpoints.size()));
    table.max_balance_residual.assign(n_levels, 0.0);

    for (std::size_t l = 0; l < n_levels; ++l) {
        for (const auto& s : traces[l].steps)
            table.max_balance_residual[l] =
                std::max(table.max_balance_residual[l], std::fabs(s.balance_residual));
        for (std::size_t c = 0; c < spec.checkpoints.size(); ++c) {
            const std::size_t i = grids[l].index_at(spec.checkpoints[c]);
            const std::size_t i_fine = grids[n_levels - 1].index_at(spec.checkpoints[c]);
            StudyCell& cell = table.cells[l][c];
            const auto& st = traces[l].steps[i];
            cell.bulk_minus_work = st.energy.bulk - st.energy.load_work;
            cell.gamma_l1 = st.gamma_l1;
            Vec diff = traces[l].u_snapshots[i];
            const Vec& fine = traces[n_levels - 1].u_snapshots[i_fine];
            for (std::size_t k = 0; k < diff.size(); ++k) diff[k] -= fine[k];
            cell.u_dist_to_finest = discrete_w12_norm(mesh, diff);
        }
    }

    table.worst_rate = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < spec.checkpoints.size(); ++c) {
        for (std::size_t l = 0; l + 1 < n_levels; ++l) {
            StudyCell& cell = table.cells[l][c];
            cell.gap_bw = std::fabs(cell.bulk_minus_work - table.cells[l + 1][c].bulk_minus_work);
            cell.gap_gamma = std::fabs(cell.gamma_l1 - table.cells[l + 1][c].gamma_l1);
        }
        for (std::size_t l = 0; l + 2 < n_levels; ++l) {
            StudyCell& cell = table.cells[l][c];
            const StudyCell& next = table.cells[l + 1][c];
            // rates only where both gaps are resolvable above solver noise;
            // a sequence already converged to solver precision passes as-is
            const double floor_bw = 1e-8 * (1.0 + std::fabs(cell.bulk_minus_work));
            const double floor_g = 1e-8 * (1.0 + std::fabs(cell.gamma_l1));
            if (cell.gap_bw > floor_bw && next.gap_bw > floor_bw) {
                cell.rate_bw = std::log2(cell.gap_bw / next.gap_bw);
                table.worst_rate = std::min(table.worst_rate, cell.rate_bw);
            }
            if (cell.gap_gamma > floor_g && next.gap_gamma > floor_g) {
                cell.rate_gamma = std::log2(cell.gap_gamma / next.gap_gamma);
                table.worst_rate = std::min(table.worst_rate, cell.rate_gamma);
            }
        }
    }
    if (!std::isfinite(table.worst_rate)) table.worst_rate = std::numeric_limits<double>::infinity();

    table.balance_rates.clear();
    for (std::size_t l = 0; l + 1 < n_levels; ++l) {
        const double a = table.max_balance_residual[l];
        const double b = table.max_balance_residual[l + 1];
        table.balance_rates.push_back(b > 0.0 ? a / b : std::numeric_limits<double>::infinity());
    }
    return table;
}

std::string StudyTable::to_csv() const {
    std::ostringstream os;
    os << "level,steps,checkpoint,bulk_minus_work,gamma_l1,gap_bulk_minus_work,gap_gamma,"
          "rate_bulk_minus_work,rate_gamma,u_dist_to_finest,max_balance_residual\n";
    for (std::size_t l = 0; l < levels.size(); ++l)
        for (std::size_t c = 0; c < checkpoints.size(); ++c) {
            const StudyCell& cell = cells[l][c];
            os << l << ',' << levels[l] << ',' << g17(checkpoints[c]) << ','
               << g17(cell.bulk_minus_work) << ',' << g17(cell.gamma_l1) << ','
               << g17(cell.gap_bw) << ',' << g17(cell.gap_gamma) << ',' << g17(cell.rate_bw)
               << ',' << g17(cell.rate_gamma) << ',' << g17(cell.u_dist_to_finest) << ','
               << g17(max_balance_residual[l]) << '\n';
        }
    return os.str();
}

RodOracle rod_oracle(OracleFamily family, double eta, double length, double a, double b,
                     double gamma0) {
    RodOracle out;
    const double L = length;
    if (family == OracleFamily::Linear1d) {
        const double dz = b > 0.0 ? gamma0 / b : std::numeric_limits<double>::infinity();
        if (eta <= dz)
            out.delta = eta;  // free opening inside the historical dead zone
        else if (eta <= dz + L * b)
            out.delta = dz;
        else
            out.delta = eta - L * b;
        out.sigma = (eta - out.delta) / L;
        out.gamma = std::max(gamma0, b * out.delta);
        return out;
    }
    if (family == OracleFamily::Griffith1d) {
        if (gamma0 != 0.0)
            throw std::invalid_argument("rod_oracle: griffith oracle requires gamma0 = 0");
        const double t_star = L * b + std::sqrt(2.0 * a * L);
        if (eta <= t_star) {
            out.delta = 0.0;
            out.sigma = eta / L;
            out.gamma = 0.0;
        } else {
            out.delta = eta - L * b;
            out.sigma = b;
            out.gamma = a + b * out.delta;
        }
        return out;
    }
    throw std::invalid_argument("rod_oracle: no closed form for this family");
}

OracleError oracle_compare(const Mesh& mesh, const BulkModel& model, const CohesiveLaw& law,
                           const LoadProgram& prog, const EvolutionTrace& trace,
                           OracleFamily family) {
    if (family == OracleFamily::None)
        throw std::invalid_argument("oracle_compare: no oracle selected");
    if (mesh.dimension != 1 || mesh.interface.size() != 1 || mesh.interface[0].tied())
        throw std::invalid_argument("oracle_compare: trace is not a single-interface rod");
    if (model.variant != BulkVariant::QuadraticScalar || !model.element_scale.empty())
        throw std::invalid_argument("oracle_compare: oracle requires uniform quadratic bulk");
    if (family == OracleFamily::Linear1d && law.variant != CohesiveVariant::Linear)
        throw std::invalid_argument("oracle_compare: linear oracle on a non-linear law");
    if (family == OracleFamily::Griffith1d && law.variant != CohesiveVariant::Griffith)
        throw std::invalid_argument("oracle_compare: griffith oracle on a non-griffith law");
    if (prog.psi_signal.family != TimeFamily::Ramp || prog.has_loads())
        throw std::invalid_argument("oracle_compare: oracle requires a pure monotone ramp");

    const std::size_t n_nodes = mesh.n_nodes();
    const double length = mesh.node_coord(n_nodes - 2, 0) - mesh.node_coord(0, 0);
    // right-end node is the last grid node before the appended plus copy
    const std::size_t right = n_nodes - 2;
    const double gamma0 = trace.gamma_snapshots.front()[0];

    OracleError err;
    for (std::size_t i = 0; i < trace.steps.size(); ++i) {
        const double t = trace.steps[i].time;
        const Vec psi = boundary_value(prog, mesh, t);
        const double eta = psi[right] - psi[0];
        const RodOracle ref = rod_oracle(family, eta, length, law.a, law.b, gamma0);

        const Vec& u = trace.u_snapshots[i];
        const std::size_t* el0 = mesh.element(0);
        const double h = mesh.node_coord(el0[1], 0) - mesh.node_coord(el0[0], 0);
        const double sigma = (u[el0[1]] - u[el0[0]]) / h;
        const Vec jm = jump_magnitudes(mesh, u);
        err.max_sigma = std::max(err.max_sigma, std::fabs(sigma - ref.sigma));
        err.max_delta = std::max(err.max_delta, std::fabs(jm[0] - ref.delta));
        err.max_gamma =
            std::max(err.max_gamma, std::fabs(trace.gamma_snapshots[i][0] - ref.gamma));
    }
    return err;
}

}  // namespace cohevo

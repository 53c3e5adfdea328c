#include "cohevo/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cohevo {

TimeGrid TimeGrid::uniform(double horizon, std::size_t steps) {
    if (!(horizon > 0.0) || steps == 0)
        throw std::invalid_argument("time grid: horizon and steps must be positive");
    TimeGrid g;
    g.knots.resize(steps + 1);
    for (std::size_t i = 0; i <= steps; ++i)
        g.knots[i] = horizon * static_cast<double>(i) / static_cast<double>(steps);
    return g;
}

void TimeGrid::validate() const {
    if (knots.size() < 2) throw std::invalid_argument("time grid: need at least two knots");
    if (knots.front() != 0.0) throw std::invalid_argument("time grid: first knot must be 0");
    for (std::size_t i = 1; i < knots.size(); ++i)
        if (!(knots[i] > knots[i - 1]))
            throw std::invalid_argument("time grid: knots must be strictly increasing");
}

std::size_t TimeGrid::index_at(double t) const {
    std::size_t i = 0;
    while (i + 1 < knots.size() && knots[i + 1] <= t) ++i;
    return i;
}

double theta(const Mesh& mesh, const BulkModel& model, const LoadProgram& prog, double t,
             std::span<const double> u) {
    const Vec psidot = boundary_rate(prog, mesh, t);
    Vec grad;
    bulk_gradient(model, mesh, u, grad);
    double first = 0.0;
    for (std::size_t i = 0; i < grad.size(); ++i) first += grad[i] * psidot[i];
    return first - load_apply(prog, mesh, t, psidot) - load_rate_apply(prog, mesh, t, u);
}

namespace {

/// Measured per-interval trapezoid error bound from neighboring slope jumps:
/// (dt^2 / 2) * kappa captures smooth curvature, slope corners, and value
/// jumps of theta alike.
Vec trapezoid_error_bounds(const Vec& t, const Vec& th) {
    const std::size_t n = t.size();
    Vec bound(n, 0.0);
    if (n < 2) return bound;
    Vec slope(n, 0.0);  // slope of interval i lives at index i (knots i-1..i)
    for (std::size_t i = 1; i < n; ++i) slope[i] = (th[i] - th[i - 1]) / (t[i] - t[i - 1]);
    Vec kink(n, 0.0);  // at interior knot i: |slope_{i+1} - slope_i|
    for (std::size_t i = 1; i + 1 < n; ++i) kink[i] = std::fabs(slope[i + 1] - slope[i]);
    double cumulative = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
        const double dt = t[i] - t[i - 1];
        double kappa = 0.0;
        if (i >= 1 && i + 1 < n) kappa = std::max(kappa, kink[i]);
        if (i >= 2) kappa = std::max(kappa, kink[i - 1]);
        if (n == 2) kappa = std::fabs(th[1] - th[0]) / dt;  // no curvature data at all
        cumulative += 0.5 * dt * dt * kappa;
        bound[i] = cumulative;
    }
    return bound;
}

}  // namespace

EvolutionTrace run_evolution(const Mesh& mesh, const BulkModel& model, const CohesiveLaw& law,
                             const LoadProgram& prog, const TimeGrid& grid,
                             const Configuration& initial, const EvolutionOptions& opts) {
    grid.validate();
    if (std::fabs(grid.horizon() - prog.horizon) > 1e-12 * (1.0 + prog.horizon))
        throw std::invalid_argument("run_evolution: grid horizon does not match the load program");
    if (initial.u.size() != mesh.n_dofs())
        throw std::invalid_argument("run_evolution: initial field size mismatch");
    if (initial.gamma.gamma.size() != mesh.interface.size())
        throw std::invalid_argument("run_evolution: initial gamma size mismatch");
    initial.gamma.validate();

    Configuration cfg = initial;
    cfg.time = grid.knots.front();
    if (!admissible(cfg, law, prog, mesh))
        throw std::invalid_argument("run_evolution: initial configuration is not admissible");

    IncrementalSolver solver(mesh, model, law, prog, opts.solver);
    EvolutionTrace trace;
    const std::size_t n_knots = grid.knots.size();
    trace.steps.reserve(n_knots);
    trace.u_snapshots.reserve(n_knots);

    Vec u = initial.u;
    InternalVariable gamma = initial.gamma;

    const auto push_step = [&](double t, const Vec& uu, const InternalVariable& gg,
                               const InternalVariable& gg_prev, const SolveInfo& info) {
        StepRecord rec;
        rec.time = t;
        Configuration c{uu, gg, t};
        rec.energy = total_energy(c, model, law, prog, mesh);
        rec.theta = theta(mesh, model, prog, t, uu);
        rec.dissipation_increment = dissipation_distance(mesh, gg_prev, gg);
        rec.grad_norm = grad_norm_p(mesh, uu, model.p);
        rec.gamma_l1 = crack_term(mesh, gg);
        rec.apriori_bound = apriori_energy_bound(model, law, prog, mesh, t, gg_prev);
        rec.solver = info;
        if (!trace.steps.empty()) {
            const StepRecord& prev = trace.steps.back();
            const double dt = t - prev.time;
            rec.work_integral = prev.work_integral + 0.5 * dt * (rec.theta + prev.theta);
            rec.dissipation_total = prev.dissipation_total + rec.dissipation_increment;
            rec.balance_residual =
                rec.energy.total - trace.steps.front().energy.total - rec.work_integral;
        }
        trace.steps.push_back(rec);
        trace.u_snapshots.push_back(uu);
        trace.gamma_snapshots.push_back(gg.gamma);
        trace.phi_snapshots.push_back(phi_of_jump(law, mesh, uu));
    };

    SolveInfo initial_info;
    initial_info.converged = true;
    push_step(cfg.time, u, gamma, gamma, initial_info);

    for (std::size_t i = 1; i < n_knots; ++i) {
        const double t = grid.knots[i];
        const double t_prev = grid.knots[i - 1];
        // warm start: previous field translated by the boundary increment,
        // the comparison construction of the a-priori energy estimate
        Vec warm = u;
        {
            const Vec psi_now = boundary_value(prog, mesh, t);
            const Vec psi_prev = boundary_value(prog, mesh, t_prev);
            for (std::size_t k = 0; k < warm.size(); ++k) warm[k] += psi_now[k] - psi_prev[k];
        }
        auto [u_next, info] = solver.solve(t, gamma, warm);

        const Vec phis = phi_of_jump(law, mesh, u_next);
        const InternalVariable gamma_next = join(gamma, phis);
        push_step(t, u_next, gamma_next, gamma, info);

        u = std::move(u_next);
        gamma = gamma_next;

        if (!info.converged) {
            trace.non_converged_at = i;
            if (opts.abort_on_nonconverged) break;
        }
    }

    // measured quadrature bounds need the whole theta history
    Vec times(trace.steps.size()), thetas(trace.steps.size());
    for (std::size_t i = 0; i < trace.steps.size(); ++i) {
        times[i] = trace.steps[i].time;
        thetas[i] = trace.steps[i].theta;
    }
    double peak = 0.0;
    for (const auto& s : trace.steps) peak = std::max(peak, std::fabs(s.energy.total));
    // the floor accounts for per-knot measurement noise (solver tolerance,
    // roundoff of the energy sums) accumulated along the trapezoid
    const Vec bounds = trapezoid_error_bounds(times, thetas);
    for (std::size_t i = 0; i < trace.steps.size(); ++i)
        trace.steps[i].balance_tolerance =
            bounds[i] + static_cast<double>(i + 1) * 1e-12 * (1.0 + peak);

    trace.completed = trace.steps.size() == n_knots;
    return trace;
}

std::vector<BalanceRow> energy_balance_report(const EvolutionTrace& trace) {
    std::vector<BalanceRow> rows;
    rows.reserve(trace.steps.size());
    for (const auto& s : trace.steps) {
        BalanceRow row;
        row.time = s.time;
        row.residual = s.balance_residual;
        row.tolerance = s.balance_tolerance;
        row.lower_ok = s.balance_residual >= -2.0 * s.balance_tolerance;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace cohevo

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "cohevo/solver.hpp"
#include "cohevo/state_energy.hpp"

namespace cohevo {

struct TimeGrid {
    Vec knots;  // 0 = t0 < t1 < ... < tk = T

    static TimeGrid uniform(double horizon, std::size_t steps);
    void validate() const;
    double horizon() const { return knots.back(); }
    /// Greatest index i with knots[i] <= t (the piecewise-constant
    /// interpolant convention).
    std::size_t index_at(double t) const;
};

struct StepRecord {
    double time = 0.0;
    EnergyBreakdown energy;
    double theta = 0.0;
    double dissipation_increment = 0.0;
    double dissipation_total = 0.0;
    double work_integral = 0.0;     // trapezoid of theta up to this knot
    double balance_residual = 0.0;  // E(t) - E(0) - work_integral
    double balance_tolerance = 0.0; // measured trapezoid error bound
    double grad_norm = 0.0;         // discrete W^{1,p} seminorm of u
    double gamma_l1 = 0.0;
    double apriori_bound = 0.0;     // E(t) of the lifted boundary datum
    SolveInfo solver;
};

struct EvolutionTrace {
    std::vector<StepRecord> steps;
    std::vector<Vec> u_snapshots;      // one per knot
    std::vector<Vec> gamma_snapshots;  // one per knot
    std::vector<Vec> phi_snapshots;    // phi([u]) per knot
    std::optional<std::size_t> non_converged_at;
    bool completed = false;

    const StepRecord& back() const { return steps.back(); }
};

struct EvolutionOptions {
    SolverOptions solver;
    bool abort_on_nonconverged = true;
};

/// theta(t) = <dW(grad u), grad psidot(t)> - <L(t), psidot(t)> - <Ldot(t), u>.
/// For linear elasticity the first pairing becomes <dQ(Eu), E psidot>.
double theta(const Mesh& mesh, const BulkModel& model, const LoadProgram& prog, double t,
             std::span<const double> u);

/// Discrete quasistatic driver: per knot, one incremental solve warm-started
/// from the translated previous field, then the history update
/// gamma_i = gamma_{i-1} v phi([u_i]).
EvolutionTrace run_evolution(const Mesh& mesh, const BulkModel& model, const CohesiveLaw& law,
                             const LoadProgram& prog, const TimeGrid& grid,
                             const Configuration& initial, const EvolutionOptions& opts = {});

struct BalanceRow {
    double time = 0.0;
    double residual = 0.0;
    double tolerance = 0.0;  // measured trapezoid error bound
    bool lower_ok = false;   // residual >= -2 * tolerance
};

/// Residuals of the integrated energy balance on the trace grid, and the
/// one-sided lower-inequality check at twice the measured quadrature bound.
std::vector<BalanceRow> energy_balance_report(const EvolutionTrace& trace);

}  // namespace cohevo

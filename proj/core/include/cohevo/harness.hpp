#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "cohevo/evolution.hpp"

namespace cohevo {

enum class OracleFamily { None, Linear1d, Griffith1d };

struct StudySpec {
    std::vector<std::size_t> levels;  // strictly increasing step counts
    Vec checkpoints;                  // inside [0, T]
    OracleFamily oracle = OracleFamily::None;
    double min_rate = 0.9;
};

struct StudyCell {
    double bulk_minus_work = 0.0;
    double gamma_l1 = 0.0;
    double u_dist_to_finest = 0.0;  // discrete W^{1,2} distance
    double gap_bw = 0.0;            // |value - next level value|
    double gap_gamma = 0.0;
    double rate_bw = 0.0;  // log2(gap_l / gap_{l+1})
    double rate_gamma = 0.0;
};

struct StudyTable {
    std::vector<std::size_t> levels;
    Vec checkpoints;
    std::vector<std::vector<StudyCell>> cells;  // [level][checkpoint]
    Vec max_balance_residual;                   // per level
    Vec balance_rates;                          // per doubling
    double worst_rate = 0.0;  // min empirical rate over measurable gaps

    std::string to_csv() const;
};

/// Runs the scenario on each refinement level (uniform grids over the load
/// horizon) and reports energy sequences, gaps, empirical rates and field
/// distances to the finest level. Fewer than 3 levels is rejected.
StudyTable convergence_study(const Mesh& mesh, const BulkModel& model, const CohesiveLaw& law,
                             const LoadProgram& prog, const InternalVariable& gamma0,
                             const StudySpec& spec, const EvolutionOptions& opts = {});

struct OracleError {
    double max_sigma = 0.0;
    double max_delta = 0.0;
    double max_gamma = 0.0;
};

/// Compares a 1d rod trace against the closed-form quasistatic solution.
/// The scenario must be a quadratic-bulk rod under a monotone ramp with the
/// matching law; anything else is rejected.
OracleError oracle_compare(const Mesh& mesh, const BulkModel& model, const CohesiveLaw& law,
                           const LoadProgram& prog, const EvolutionTrace& trace,
                           OracleFamily family);

/// Closed-form two-bar response at end displacement eta >= 0: opening delta,
/// stress sigma, history gamma. Rod length L, linear law with pre-seeded
/// gamma0 or griffith law with gamma0 = 0.
struct RodOracle {
    double delta = 0.0;
    double sigma = 0.0;
    double gamma = 0.0;
};
RodOracle rod_oracle(OracleFamily family, double eta, double length, double a, double b,
                     double gamma0);

double discrete_w12_norm(const Mesh& mesh, std::span<const double> v);

}  // namespace cohevo

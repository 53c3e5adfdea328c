#pragma once

#include <optional>
#include <span>
#include <vector>

#include "cohevo/geometry.hpp"
#include "cohevo/linalg.hpp"
#include "cohevo/loads.hpp"
#include "cohevo/materials.hpp"
#include "cohevo/state_energy.hpp"

namespace cohevo {

enum class Algorithm { ProximalGradientAccelerated, SchurCoordinateDescent };

struct SolverOptions {
    Algorithm algorithm = Algorithm::ProximalGradientAccelerated;
    int max_iterations = 20000;
    double objective_tolerance = 1e-13;  // absolute decrease threshold
    double residual_tolerance = 1e-10;   // scaled by (1 + |load covector|)
    int power_iterations = 50;
    double step_safety = 1.05;  // Lambda = safety * power-iteration estimate
    bool restart_on_nonmonotone = true;
};

struct SolveInfo {
    int iterations = 0;
    double objective = 0.0;  // W(grad u) - <L,u> + ||phi([u]) v gamma||_1
    double residual = 0.0;   // composite subgradient residual norm
    bool converged = false;
    double lambda_max = 0.0;
    int candidate = 0;  // 0 = accelerated iterations, 1 = fully closed, 2 = slope branch
};

/// One incremental minimization: minimize over u with u = psi(t) on
/// the Dirichlet set
///   W(grad u) - <L(t), u> + ||phi([u]) v gamma_prev||_1.
/// Construct once per scenario; the assembled Hessian and step bound are
/// reused across time steps.
class IncrementalSolver {
  public:
    IncrementalSolver(const Mesh& mesh, const BulkModel& model, const CohesiveLaw& law,
                      const LoadProgram& prog, SolverOptions opts = {});

    std::pair<Vec, SolveInfo> solve(double t, const InternalVariable& gamma_prev,
                                    std::span<const double> u_init) const;

    const SolverOptions& options() const { return opts_; }
    double lambda_max() const { return lambda_; }

  private:
    const Mesh& mesh_;
    const BulkModel& model_;
    const CohesiveLaw& law_;
    const LoadProgram& prog_;
    SolverOptions opts_;
    std::optional<CsrMatrix> hessian_;  // quadratic bulk only
    mutable double lambda_ = 0.0;
};

std::pair<Vec, SolveInfo> incremental_solve(const Mesh& mesh, const BulkModel& model,
                                            const CohesiveLaw& law, const LoadProgram& prog,
                                            double t, const InternalVariable& gamma_prev,
                                            std::span<const double> u_init,
                                            const SolverOptions& opts = {});

/// Exact elimination of every non-jump unknown for quadratic bulk: the full
/// problem is equivalent to
///   min over d of  1/2 d^T S d - r^T d + constant + sum_e w_e (phi(d_e) - gamma_e)^+.
struct SchurReduced {
    DenseMatrix S;
    Vec r;
    double constant = 0.0;  // smooth objective value at d = 0
    int m = 1;
    std::vector<std::size_t> pair_index;  // into mesh.interface, fully free pairs
    Vec weights;

    // elimination data
    Vec u_fix;  // full field with Dirichlet values, zero elsewhere
    std::vector<std::size_t> eta_dofs;  // kept unknowns (non-pair dofs and pair-mean plus dofs)
    std::vector<char> eta_is_mean;
    std::vector<std::size_t> eta_minus;             // minus dof of a mean column
    std::vector<std::size_t> jump_plus, jump_minus;  // dofs of each jump unknown
    DenseMatrix h_eta_j;
    Vec b_eta;
    std::optional<CholeskyFactor> factor;

    Vec recover_full(std::span<const double> d) const;
    std::size_t n_jump() const { return pair_index.size() * static_cast<std::size_t>(m); }
};

SchurReduced schur_reduce(const Mesh& mesh, const BulkModel& model, const LoadProgram& prog,
                          double t);

/// Minimizes the reduced objective by cyclic block coordinate descent with
/// exact scalar updates (m = 1) or majorized block steps (m = 2).
/// Returns the jump vector; value/iterations via info.
Vec solve_reduced(const SchurReduced& red, const CohesiveLaw& law, const InternalVariable& gamma,
                  const SolverOptions& opts, SolveInfo& info);

/// Exact global minimizer of the single-unknown reduced problem
///   1/2 S j^2 - r j + w (phi(j) - gamma)^+,
/// by closed-form candidate comparison; ties select the smaller |j| (the
/// unbroken state).
double griffith_global_1d(double S, double r, const LawParams& law, double gamma, double w);

}  // namespace cohevo

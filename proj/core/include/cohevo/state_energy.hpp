#pragma once

#include <span>
#include <vector>

#include "cohevo/geometry.hpp"
#include "cohevo/loads.hpp"
#include "cohevo/materials.hpp"

namespace cohevo {

/// Per-interface-node history variable, gamma >= 0 everywhere.
struct InternalVariable {
    Vec gamma;

    void validate() const;
};

struct EnergyBreakdown {
    double bulk = 0.0;
    double load_work = 0.0;
    double crack_term = 0.0;
    double total = 0.0;  // bulk - load_work + crack_term
};

struct Configuration {
    Vec u;
    InternalVariable gamma;
    double time = 0.0;
};

/// Weighted interface sum of gamma, i.e. ||gamma||_{1,M} under the lumped
/// quadrature.
double crack_term(const Mesh& mesh, const InternalVariable& gamma);

EnergyBreakdown total_energy(const Configuration& cfg, const BulkModel& model,
                             const CohesiveLaw& law, const LoadProgram& prog, const Mesh& mesh);

/// Pointwise maximum, the lattice join on internal variables.
InternalVariable join(const InternalVariable& gamma, std::span<const double> other);

/// ||g2 - g1||_{1,M}; requires g2 >= g1 pointwise (irreversibility), else
/// throws.
double dissipation_distance(const Mesh& mesh, const InternalVariable& g1,
                            const InternalVariable& g2);

/// phi([u]) at every interface pair.
Vec phi_of_jump(const CohesiveLaw& law, const Mesh& mesh, std::span<const double> u);

/// phi([u]) <= gamma + tol at every pair and u = psi(t) at Dirichlet nodes.
bool admissible(const Configuration& cfg, const CohesiveLaw& law, const LoadProgram& prog,
                const Mesh& mesh, double tol = 1e-10);

struct StabilityReport {
    double max_violation = 0.0;  // max over competitors of lhs - rhs
    std::size_t worst_competitor = 0;
    std::size_t competitors = 0;
    bool pass = true;
    double tolerance = 0.0;
};

/// Certifies the global stability inequality
///   W(grad u) - <L,u>  <=  W(grad v) - <L,v> + ||(phi([v]) - gamma)^+||_1
/// against the sampled competitor list. Competitors must match the Dirichlet
/// trace of psi(t); a mismatch is rejected.
StabilityReport stability_check(const Configuration& cfg, const std::vector<Vec>& competitors,
                                const BulkModel& model, const CohesiveLaw& law,
                                const LoadProgram& prog, const Mesh& mesh, double tol);

/// Seeded random competitors v = u + r with r zeroed on the Dirichlet set and
/// amplitudes log-spaced in [amp_min, amp_max].
std::vector<Vec> sample_competitors(const Mesh& mesh, std::span<const double> u, std::size_t count,
                                    unsigned seed, double amp_min = 1e-3, double amp_max = 1e-1);

/// Upper bound on E(t)(u(t),gamma) from minimality against the lifted
/// boundary datum: E(t)(psi(t), gamma v phi([psi])). Since [psi] = 0 the join
/// is a no-op.
double apriori_energy_bound(const BulkModel& model, const CohesiveLaw& law,
                            const LoadProgram& prog, const Mesh& mesh, double t,
                            const InternalVariable& gamma);

}  // namespace cohevo

#pragma once

#include <array>
#include <string>
#include <vector>

#include "cohevo/loads.hpp"
#include "cohevo/materials.hpp"
#include "cohevo/state_energy.hpp"

namespace cohevo {

/// Region of an interface node by the relation between phi([u]), gamma and
/// the activation part phi_0:
///   A: 0 < phi([u]) = gamma,  B: phi([u]) = 0 and gamma = phi_0,
///   D: gamma < phi_0,         Other: the rest. Tips (dM) are marked.
enum class EulerRegion { A, B, D, Other };

struct EulerNode {
    std::size_t pair = 0;  // into mesh.interface
    std::array<double, 2> traction{0.0, 0.0};
    EulerRegion region = EulerRegion::Other;
    bool tip = false;          // pair on dM, exempt from the conditions
    double lambda = 0.0;       // segment multiplier, A nodes only
    double condition_residual = 0.0;
};

struct EulerOptions {
    double region_tol = 1e-9;
    double lambda_tol = 1e-6;
    int directions = 64;  // sampled unit directions for the K(x) test (m = 2)
};

struct EulerReport {
    std::vector<EulerNode> nodes;
    double interior_residual = 0.0;       // discrete -div(dW - H) = f away from M
    double action_reaction = 0.0;         // plus/minus traction balance across M
    double max_condition_residual = 0.0;  // worst of (a), (b), (c) over non-tip nodes
    double max_lambda_violation = 0.0;    // distance of lambda from [0, 1]

    // scalar example diagnostics (m = 1, quadratic bulk, linear law)
    bool example_mode = false;
    double max_abs_traction = 0.0;        // max |du/dnu| over non-tip nodes
    double max_deadzone_traction = 0.0;   // |du/dnu| where |[u]| < gamma - tol
    double min_active_alignment = 0.0;    // min (du/dnu)[u] where |[u]| = gamma
};

/// Discrete consistent traction: minus the equilibrium residual at the plus
/// copy divided by the nodal weight. The sign convention makes h the force
/// exerted by the positive lip on the negative lip. Tips use the plus-side
/// element split.
std::vector<std::array<double, 2>> recover_traction(const Mesh& mesh, const BulkModel& model,
                                                    const LoadProgram& prog, double t,
                                                    std::span<const double> u);

std::vector<EulerRegion> classify_regions(const CohesiveLaw& law, const Vec& phis,
                                          const InternalVariable& gamma, double tol = 1e-9);

EulerReport euler_residuals(const Mesh& mesh, const BulkModel& model, const CohesiveLaw& law,
                            const LoadProgram& prog, double t, std::span<const double> u,
                            const InternalVariable& gamma, const EulerOptions& opts = {});

std::string euler_report_to_json(const EulerReport& report);

}  // namespace cohevo

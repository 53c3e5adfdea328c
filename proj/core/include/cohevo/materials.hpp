#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cohevo/geometry.hpp"
#include "cohevo/linalg.hpp"

namespace cohevo {

// ---------------------------------------------------------------------------
// Bulk energy densities
// ---------------------------------------------------------------------------

enum class BulkVariant {
    QuadraticScalar,   // W(xi) = 1/2 |xi|^2
    PPower,            // W(xi) = (1/p) |xi|^p, p > 1
    LinearElasticity,  // A(x) Eu : Eu with A xi = 2 mu xi + lambda tr(xi) I
};

struct BulkModel {
    BulkVariant variant = BulkVariant::QuadraticScalar;
    double p = 2.0;
    double lambda_lame = 0.0;
    double mu_lame = 0.0;
    // optional piecewise-constant heterogeneity, one multiplier per element
    Vec element_scale;

    double scale(std::size_t element) const {
        return element_scale.empty() ? 1.0 : element_scale[element];
    }
    bool quadratic() const {
        return variant == BulkVariant::LinearElasticity ||
               (variant != BulkVariant::PPower) || p == 2.0;
    }
    // coercivity witnesses for reporting: a0 |xi|^p - b0 <= W <= a1 |xi|^p + b1
    double coercivity_lower() const;
    double coercivity_upper() const;
};

/// Pointwise density W(xi) for an m x dim matrix xi (row-major).
double bulk_density(const BulkModel& model, std::span<const double> xi, int m, int dim);

/// dW/dxi, written into `stress` (same layout as xi).
void bulk_stress(const BulkModel& model, std::span<const double> xi, int m, int dim,
                 std::span<double> stress);

double bulk_energy(const BulkModel& model, const Mesh& mesh, std::span<const double> u);

/// Assembled discrete differential <dW(grad u), grad v> as a nodal covector.
void bulk_gradient(const BulkModel& model, const Mesh& mesh, std::span<const double> u, Vec& grad);

/// Hessian of the bulk energy for quadratic variants (p=2 or linear
/// elasticity); throws std::invalid_argument otherwise.
CsrMatrix bulk_hessian(const BulkModel& model, const Mesh& mesh);

/// Element-wise gradient of u: returns per-element m x dim matrices.
void element_gradients(const Mesh& mesh, std::span<const double> u, Vec& grads);

/// Discrete (sum over elements of vol*|grad u|^p)^(1/p).
double grad_norm_p(const Mesh& mesh, std::span<const double> u, double p);

/// Discrete L2 norm of the symmetric gradient (m must equal dim).
double sym_grad_norm(const Mesh& mesh, std::span<const double> u);

// ---------------------------------------------------------------------------
// Cohesive surface densities
// ---------------------------------------------------------------------------

enum class CohesiveVariant {
    Linear,            // phi(y) = b|y|
    Griffith,          // phi(y) = a + b|y| for y != 0, phi(0) = 0
    SmoothSaturating,  // phi(y) = a + c(1 - exp(-b|y|/c)) for y != 0, phi(0) = 0
};

/// Scalar parameters of a law at one interface node.
struct LawParams {
    CohesiveVariant variant = CohesiveVariant::Linear;
    double a = 0.0;      // activation energy (phi_0 part for griffith/saturating)
    double b = 0.0;      // slope, also the derivative bound phi_bar
    double c_sat = 1.0;  // saturation level of the exponential law
};

struct CohesiveLaw {
    CohesiveVariant variant = CohesiveVariant::Linear;
    double a = 0.0;
    double b = 0.0;
    double c_sat = 1.0;
    // optional per-interface-node heterogeneity
    Vec node_a;
    Vec node_b;

    LawParams at(std::size_t iface_node) const {
        LawParams q{variant, a, b, c_sat};
        if (!node_a.empty()) q.a = node_a[iface_node];
        if (!node_b.empty()) q.b = node_b[iface_node];
        return q;
    }
    double phi0(std::size_t iface_node) const {
        return variant == CohesiveVariant::Linear ? 0.0 : at(iface_node).a;
    }
    double phi_bar(std::size_t iface_node) const { return at(iface_node).b; }
    /// Increment cost (phi(y) - gamma)^+ is convex in y only for the linear
    /// law; the others need candidate-enriched solves.
    bool convex() const {
        return variant == CohesiveVariant::Linear ||
               (variant == CohesiveVariant::Griffith && a == 0.0);
    }
    void validate() const;
};

/// phi at opening magnitude r = |y| >= 0.
double phi_radial(const LawParams& q, double r);

double phi(const CohesiveLaw& law, std::span<const double> y);
double phi_at(const CohesiveLaw& law, std::size_t iface_node, std::span<const double> y);

/// (phi(y) - gamma)^+; throws for gamma < 0.
double increment_cost(const CohesiveLaw& law, std::span<const double> y, double gamma);

/// Global minimizer of r -> c/2 (r - r0)^2 + w (phi(r) - gamma)^+ over r >= 0,
/// exact by closed-form candidate comparison, ties toward smaller r.
double prox_increment_radial(const LawParams& q, double r0, double gamma, double c, double w);

/// Vector prox: global minimizer of y -> c/2 |y - y0|^2 + w (phi(y) - gamma)^+.
/// Radial laws give a minimizer collinear with y0.
Vec prox_increment(const CohesiveLaw& law, std::span<const double> y0, double gamma, double c,
                   double w, std::size_t iface_node = 0);

/// Homogenized limit psi_tilde(y) = lim_{eps->0+} d_y phi_tilde(eps y) . y;
/// equals b|y| for every shipped variant.
double psi_tilde(const CohesiveLaw& law, std::span<const double> y, std::size_t iface_node = 0);

/// |d_y phi_tilde(y)| at opening magnitude r > 0 (smooth part only).
double phi_tilde_derivative(const LawParams& q, double r);

}  // namespace cohevo

#pragma once

#include <span>
#include <vector>

#include "cohevo/geometry.hpp"
#include "cohevo/linalg.hpp"

namespace cohevo {

enum class TimeFamily { Constant, Ramp, Triangle, Sinusoid };

/// Absolutely continuous scalar time factor with an analytic derivative.
/// At the triangle apex the left-branch rate is used.
struct TimeSignal {
    TimeFamily family = TimeFamily::Constant;
    double scale = 0.0;   // constant value / ramp rate / sine amplitude
    double t_peak = 0.5;  // triangle apex
    double omega = 1.0;   // sine angular frequency

    double value(double t) const;
    double derivative(double t) const;
};

/// Spatially affine profile x -> G x + offset, one row per field component.
/// Affine profiles are continuous across M, so [psi] = 0 holds exactly.
struct AffineProfile {
    Vec matrix;  // field_dim x dimension, row-major
    Vec offset;  // field_dim

    Vec evaluate(const Mesh& mesh) const;  // nodal field on all nodes
};

/// Time-parameterized boundary deformation psi(t) and the external load
/// functional; every load term is a uniform spatial value times its own
/// time signal, except H which may also vary per element.
struct LoadProgram {
    double horizon = 1.0;

    AffineProfile psi_profile;
    TimeSignal psi_signal;

    Vec f_value;  // field_dim, per unit volume
    TimeSignal f_signal;
    Vec h_value;  // field_dim x dimension
    Vec h_per_element;  // optional override, n_elements x field_dim x dimension
    TimeSignal h_signal;
    Vec g_value;  // field_dim, on Neumann facets
    TimeSignal g_signal;
    Vec g_plus_value;   // field_dim, on the plus side of M
    Vec g_minus_value;  // field_dim, on the minus side of M
    TimeSignal g_pm_signal;

    bool has_loads() const {
        return !f_value.empty() || !h_value.empty() || !h_per_element.empty() ||
               !g_value.empty() || !g_plus_value.empty() || !g_minus_value.empty();
    }
};

/// psi(t) at all nodes; plus/minus twins coincide. Throws for t outside [0,T].
Vec boundary_value(const LoadProgram& prog, const Mesh& mesh, double t);
Vec boundary_rate(const LoadProgram& prog, const Mesh& mesh, double t);

/// <L(t), u> by quadrature of the volume, gradient, Neumann and crack-face
/// terms.
double load_apply(const LoadProgram& prog, const Mesh& mesh, double t, std::span<const double> u);

/// <Ldot(t), u> using the analytic signal derivatives.
double load_rate_apply(const LoadProgram& prog, const Mesh& mesh, double t,
                       std::span<const double> u);

/// L(t) assembled as a nodal covector: dot(load_covector, u) == load_apply.
Vec load_covector(const LoadProgram& prog, const Mesh& mesh, double t);

}  // namespace cohevo

#include "cohevo/loads.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

namespace cohevo {

double TimeSignal::value(double t) const {
    switch (family) {
        case TimeFamily::Constant:
            return scale;
        case TimeFamily::Ramp:
            return scale * t;
        case TimeFamily::Triangle:
            return t <= t_peak ? scale * t : scale * (2.0 * t_peak - t);
        case TimeFamily::Sinusoid:
            return scale * std::sin(omega * t);
    }
    return 0.0;
}

double TimeSignal::derivative(double t) const {
    switch (family) {
        case TimeFamily::Constant:
            return 0.0;
        case TimeFamily::Ramp:
            return scale;
        case TimeFamily::Triangle:
            return t <= t_peak ? scale : -scale;  // left branch at the apex
        case TimeFamily::Sinusoid:
            return scale * omega * std::cos(omega * t);
    }
    return 0.0;
}

Vec AffineProfile::evaluate(const Mesh& mesh) const {
    const std::size_t m = static_cast<std::size_t>(mesh.field_dim);
    const std::size_t dim = static_cast<std::size_t>(mesh.dimension);
    if (matrix.size() != m * dim || offset.size() != m)
        throw std::invalid_argument("affine profile: shape does not match mesh");
    Vec out(mesh.n_dofs(), 0.0);
    for (std::size_t n = 0; n < mesh.n_nodes(); ++n)
        for (std::size_t c = 0; c < m; ++c) {
            double v = offset[c];
            for (std::size_t d = 0; d < dim; ++d)
                v += matrix[c * dim + d] * mesh.node_coord(n, static_cast<int>(d));
            out[n * m + c] = v;
        }
    return out;
}

namespace {

void check_time(const LoadProgram& prog, double t) {
    if (t < 0.0 || t > prog.horizon * (1.0 + 1e-12))
        throw std::invalid_argument("load program: time outside [0, T]");
}

// assembles the covector of <L,u> with each term's signal evaluated by `eval`
Vec assemble_covector(const LoadProgram& prog, const Mesh& mesh,
                      const std::function<double(const TimeSignal&)>& eval) {
    const std::size_t m = static_cast<std::size_t>(mesh.field_dim);
    const std::size_t dim = static_cast<std::size_t>(mesh.dimension);
    const std::size_t npe = mesh.nodes_per_elem();
    Vec out(mesh.n_dofs(), 0.0);

    if (!prog.f_value.empty()) {
        const double s = eval(prog.f_signal);
        if (s != 0.0)
            for (std::size_t e = 0; e < mesh.n_elements(); ++e) {
                const double w = mesh.elem_volume[e] / static_cast<double>(npe);
                const std::size_t* nd = mesh.element(e);
                for (std::size_t a = 0; a < npe; ++a)
                    for (std::size_t c = 0; c < m; ++c)
                        out[nd[a] * m + c] += w * s * prog.f_value[c];
            }
    }
    if (!prog.h_value.empty() || !prog.h_per_element.empty()) {
        const double s = eval(prog.h_signal);
        if (s != 0.0)
            for (std::size_t e = 0; e < mesh.n_elements(); ++e) {
                const double* h = prog.h_per_element.empty()
                                      ? prog.h_value.data()
                                      : &prog.h_per_element[e * m * dim];
                const std::size_t* nd = mesh.element(e);
                const double* g = &mesh.elem_grad[e * npe * dim];
                for (std::size_t a = 0; a < npe; ++a)
                    for (std::size_t c = 0; c < m; ++c) {
                        double v = 0.0;
                        for (std::size_t d = 0; d < dim; ++d)
                            v += h[c * dim + d] * g[a * dim + d];
                        out[nd[a] * m + c] += mesh.elem_volume[e] * s * v;
                    }
            }
    }
    if (!prog.g_value.empty()) {
        const double s = eval(prog.g_signal);
        if (s != 0.0)
            for (const auto& facet : mesh.neumann_facets) {
                const double w = facet.measure / static_cast<double>(facet.node_count);
                for (std::size_t k = 0; k < facet.node_count; ++k)
                    for (std::size_t c = 0; c < m; ++c)
                        out[facet.nodes[k] * m + c] += w * s * prog.g_value[c];
            }
    }
    if (!prog.g_plus_value.empty() || !prog.g_minus_value.empty()) {
        const double s = eval(prog.g_pm_signal);
        if (s != 0.0)
            for (const auto& pair : mesh.interface) {
                for (std::size_t c = 0; c < m; ++c) {
                    if (!prog.g_plus_value.empty())
                        out[pair.plus_node * m + c] += pair.weight * s * prog.g_plus_value[c];
                    if (!prog.g_minus_value.empty())
                        out[pair.minus_node * m + c] += pair.weight * s * prog.g_minus_value[c];
                }
            }
    }
    return out;
}

}  // namespace

Vec boundary_value(const LoadProgram& prog, const Mesh& mesh, double t) {
    check_time(prog, t);
    Vec out = prog.psi_profile.evaluate(mesh);
    const double s = prog.psi_signal.value(t);
    for (double& v : out) v *= s;
    return out;
}

Vec boundary_rate(const LoadProgram& prog, const Mesh& mesh, double t) {
    check_time(prog, t);
    Vec out = prog.psi_profile.evaluate(mesh);
    const double s = prog.psi_signal.derivative(t);
    for (double& v : out) v *= s;
    return out;
}

Vec load_covector(const LoadProgram& prog, const Mesh& mesh, double t) {
    check_time(prog, t);
    return assemble_covector(prog, mesh, [t](const TimeSignal& sig) { return sig.value(t); });
}

double load_apply(const LoadProgram& prog, const Mesh& mesh, double t, std::span<const double> u) {
    if (u.size() != mesh.n_dofs())
        throw std::invalid_argument("load_apply: field length does not match mesh dofs");
    const Vec cov = load_covector(prog, mesh, t);
    double s = 0.0;
    for (std::size_t i = 0; i < cov.size(); ++i) s += cov[i] * u[i];
    return s;
}

double load_rate_apply(const LoadProgram& prog, const Mesh& mesh, double t,
                       std::span<const double> u) {
    if (u.size() != mesh.n_dofs())
        throw std::invalid_argument("load_rate_apply: field length does not match mesh dofs");
    check_time(prog, t);
    const Vec cov =
        assemble_covector(prog, mesh, [t](const TimeSignal& sig) { return sig.derivative(t); });
    double s = 0.0;
    for (std::size_t i = 0; i < cov.size(); ++i) s += cov[i] * u[i];
    return s;
}

}  // namespace cohevo

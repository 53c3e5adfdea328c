#include "cohevo/materials.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace cohevo {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double frobenius_sq(std::span<const double> xi) {
    double s = 0.0;
    for (double v : xi) s += v * v;
    return s;
}

double span_norm(std::span<const double> y) { return std::sqrt(frobenius_sq(y)); }

// opening magnitude where phi(r) first exceeds gamma; 0 if immediately, +inf
// if never
double dead_zone_edge(const LawParams& q, double gamma) {
    switch (q.variant) {
        case CohesiveVariant::Linear:
            return q.b > 0.0 ? gamma / q.b : kInf;
        case CohesiveVariant::Griffith:
            if (gamma < q.a) return 0.0;
            return q.b > 0.0 ? (gamma - q.a) / q.b : kInf;
        case CohesiveVariant::SmoothSaturating: {
            if (gamma < q.a) return 0.0;
            if (gamma >= q.a + q.c_sat) return kInf;
            if (q.b <= 0.0) return kInf;
            return -(q.c_sat / q.b) * std::log1p(-(gamma - q.a) / q.c_sat);
        }
    }
    return 0.0;
}

}  // namespace

// ---------------------------------------------------------------------------
// cohesive laws
// ---------------------------------------------------------------------------

void CohesiveLaw::validate() const {
    if (a < 0.0) throw std::invalid_argument("cohesive law: activation a must be >= 0");
    if (b < 0.0) throw std::invalid_argument("cohesive law: slope b must be >= 0");
    if (c_sat <= 0.0) throw std::invalid_argument("cohesive law: saturation c must be > 0");
    for (double v : node_a)
        if (v < 0.0) throw std::invalid_argument("cohesive law: node activation must be >= 0");
    for (double v : node_b)
        if (v < 0.0) throw std::invalid_argument("cohesive law: node slope must be >= 0");
}

double phi_radial(const LawParams& q, double r) {
    r = std::fabs(r);
    if (r == 0.0) return 0.0;
    switch (q.variant) {
        case CohesiveVariant::Linear:
            return q.b * r;
        case CohesiveVariant::Griffith:
            return q.a + q.b * r;
        case CohesiveVariant::SmoothSaturating:
            return q.a + q.c_sat * (-std::expm1(-q.b * r / q.c_sat));
    }
    return 0.0;
}

double phi(const CohesiveLaw& law, std::span<const double> y) {
    return phi_radial(law.at(0), span_norm(y));
}

double phi_at(const CohesiveLaw& law, std::size_t iface_node, std::span<const double> y) {
    return phi_radial(law.at(iface_node), span_norm(y));
}

double increment_cost(const CohesiveLaw& law, std::span<const double> y, double gamma) {
    if (gamma < 0.0) throw std::invalid_argument("increment_cost: gamma must be >= 0");
    return std::max(0.0, phi(law, y) - gamma);
}

double phi_tilde_derivative(const LawParams& q, double r) {
    r = std::fabs(r);
    switch (q.variant) {
        case CohesiveVariant::Linear:
        case CohesiveVariant::Griffith:
            return q.b;
        case CohesiveVariant::SmoothSaturating:
            return q.b * std::exp(-q.b * r / q.c_sat);
    }
    return 0.0;
}

double prox_increment_radial(const LawParams& q, double r0, double gamma, double c, double w) {
    if (gamma < 0.0) throw std::invalid_argument("prox_increment: gamma must be >= 0");
    if (!(c > 0.0) || !(w > 0.0))
        throw std::invalid_argument("prox_increment: stiffness and weight must be > 0");
    r0 = std::fabs(r0);

    const auto objective = [&](double r) {
        return 0.5 * c * (r - r0) * (r - r0) + w * std::max(0.0, phi_radial(q, r) - gamma);
    };

    const double r_dz = dead_zone_edge(q, gamma);
    if (r0 <= r_dz) return r0;  // increment cost vanishes at r0

    std::vector<double> cands{0.0};
    if (r_dz > 0.0) cands.push_back(std::min(r0, r_dz));
    if (std::isfinite(r_dz) && r_dz > 0.0) cands.push_back(r_dz);

    switch (q.variant) {
        case CohesiveVariant::Linear:
        case CohesiveVariant::Griffith: {
            const double soft = r0 - w * q.b / c;
            if (soft > 0.0) cands.push_back(soft);
            if (q.b == 0.0) cands.push_back(r0);  // flat branch
            break;
        }
        case CohesiveVariant::SmoothSaturating: {
            if (q.b == 0.0) {
                cands.push_back(r0);
                break;
            }
            // stationary points of the active branch solve
            // chi(r) = c (r - r0) + w b exp(-b r / c_sat) = 0, chi convex
            const auto chi = [&](double r) {
                return c * (r - r0) + w * q.b * std::exp(-q.b * r / q.c_sat);
            };
            const double ratio = c * q.c_sat / (w * q.b * q.b);
            double lo = 0.0;
            bool have_lo = false;
            if (ratio < 1.0) {
                const double r_m = -(q.c_sat / q.b) * std::log(ratio);
                if (r_m >= 0.0 && r_m < r0 && chi(r_m) < 0.0) {
                    lo = r_m;
                    have_lo = true;
                }
            }
            if (!have_lo && chi(0.0) < 0.0) {
                lo = 0.0;
                have_lo = true;
            }
            if (have_lo) {
                double hi = r0;  // chi(r0) = w b exp(...) > 0
                for (int it = 0; it < 200; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    (chi(mid) <= 0.0 ? lo : hi) = mid;
                }
                cands.push_back(0.5 * (lo + hi));
            }
            break;
        }
    }

    double best = 0.0;
    double best_val = objective(0.0);
    for (double r : cands) {
        if (!(r >= 0.0) || !std::isfinite(r)) continue;
        const double v = objective(r);
        if (v < best_val || (v == best_val && r < best)) {
            best = r;
            best_val = v;
        }
    }
    return best;
}

Vec prox_increment(const CohesiveLaw& law, std::span<const double> y0, double gamma, double c,
                   double w, std::size_t iface_node) {
    const LawParams q = law.at(iface_node);
    Vec out(y0.begin(), y0.end());
    const double r0 = span_norm(y0);
    const double r = prox_increment_radial(q, r0, gamma, c, w);
    if (r0 == 0.0) {
        std::fill(out.begin(), out.end(), 0.0);
        return out;
    }
    const double scale = r / r0;
    for (double& v : out) v *= scale;
    return out;
}

double psi_tilde(const CohesiveLaw& law, std::span<const double> y, std::size_t iface_node) {
    // lim_{eps->0+} d_y phi_tilde(eps y) . y = b |y| for every shipped law
    return law.phi_bar(iface_node) * span_norm(y);
}

// ---------------------------------------------------------------------------
// bulk models
// ---------------------------------------------------------------------------

double BulkModel::coercivity_lower() const {
    switch (variant) {
        case BulkVariant::QuadraticScalar:
            return 0.5;
        case BulkVariant::PPower:
            return 1.0 / p;
        case BulkVariant::LinearElasticity:
            return std::min(2.0 * mu_lame, 2.0 * mu_lame + 2.0 * lambda_lame);
    }
    return 0.0;
}

double BulkModel::coercivity_upper() const {
    switch (variant) {
        case BulkVariant::QuadraticScalar:
            return 0.5;
        case BulkVariant::PPower:
            return 1.0 / p;
        case BulkVariant::LinearElasticity:
            return std::max(2.0 * mu_lame, 2.0 * mu_lame + 2.0 * lambda_lame);
    }
    return 0.0;
}

double bulk_density(const BulkModel& model, std::span<const double> xi, int m, int dim) {
    switch (model.variant) {
        case BulkVariant::QuadraticScalar:
            return 0.5 * frobenius_sq(xi);
        case BulkVariant::PPower:
            return std::pow(frobenius_sq(xi), model.p / 2.0) / model.p;
        case BulkVariant::LinearElasticity: {
            if (m != dim) throw std::invalid_argument("linear elasticity requires m == n");
            double tr = 0.0, esq = 0.0;
            for (int i = 0; i < m; ++i) {
                tr += xi[static_cast<std::size_t>(i * dim + i)];
                for (int j = 0; j < dim; ++j) {
                    const double e = 0.5 * (xi[static_cast<std::size_t>(i * dim + j)] +
                                            xi[static_cast<std::size_t>(j * dim + i)]);
                    esq += e * e;
                }
            }
            return 2.0 * model.mu_lame * esq + model.lambda_lame * tr * tr;
        }
    }
    return 0.0;
}

void bulk_stress(const BulkModel& model, std::span<const double> xi, int m, int dim,
                 std::span<double> stress) {
    const std::size_t sz = static_cast<std::size_t>(m * dim);
    assert(xi.size() == sz && stress.size() == sz);
    switch (model.variant) {
        case BulkVariant::QuadraticScalar:
            std::copy(xi.begin(), xi.end(), stress.begin());
            return;
        case BulkVariant::PPower: {
            const double nsq = frobenius_sq(xi);
            const double f = nsq > 0.0 ? std::pow(nsq, (model.p - 2.0) / 2.0) : 0.0;
            for (std::size_t k = 0; k < sz; ++k) stress[k] = f * xi[k];
            return;
        }
        case BulkVariant::LinearElasticity: {
            if (m != dim) throw std::invalid_argument("linear elasticity requires m == n");
            double tr = 0.0;
            for (int i = 0; i < m; ++i) tr += xi[static_cast<std::size_t>(i * dim + i)];
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < dim; ++j) {
                    const double e = 0.5 * (xi[static_cast<std::size_t>(i * dim + j)] +
                                            xi[static_cast<std::size_t>(j * dim + i)]);
                    stress[static_cast<std::size_t>(i * dim + j)] =
                        4.0 * model.mu_lame * e + ((i == j) ? 2.0 * model.lambda_lame * tr : 0.0);
                }
            return;
        }
    }
}

void element_gradients(const Mesh& mesh, std::span<const double> u, Vec& grads) {
    const int m = mesh.field_dim;
    const int dim = mesh.dimension;
    const std::size_t npe = mesh.nodes_per_elem();
    grads.assign(mesh.n_elements() * static_cast<std::size_t>(m * dim), 0.0);
    for (std::size_t e = 0; e < mesh.n_elements(); ++e) {
        const std::size_t* nd = mesh.element(e);
        const double* g = &mesh.elem_grad[e * npe * static_cast<std::size_t>(dim)];
        double* xi = &grads[e * static_cast<std::size_t>(m * dim)];
        for (std::size_t a = 0; a < npe; ++a)
            for (int c = 0; c < m; ++c)
                for (int d = 0; d < dim; ++d)
                    xi[c * dim + d] += u[nd[a] * static_cast<std::size_t>(m) +
                                         static_cast<std::size_t>(c)] *
                                       g[a * static_cast<std::size_t>(dim) +
                                         static_cast<std::size_t>(d)];
    }
}

double bulk_energy(const BulkModel& model, const Mesh& mesh, std::span<const double> u) {
    if (u.size() != mesh.n_dofs())
        throw std::invalid_argument("bulk_energy: field length does not match mesh dofs");
    if (!model.element_scale.empty() && model.element_scale.size() != mesh.n_elements())
        throw std::invalid_argument("bulk_energy: element_scale size mismatch");
    const int m = mesh.field_dim;
    const int dim = mesh.dimension;
    Vec grads;
    element_gradients(mesh, u, grads);
    double total = 0.0;
    for (std::size_t e = 0; e < mesh.n_elements(); ++e) {
        std::span<const double> xi(&grads[e * static_cast<std::size_t>(m * dim)],
                                   static_cast<std::size_t>(m * dim));
        total += mesh.elem_volume[e] * model.scale(e) * bulk_density(model, xi, m, dim);
    }
    return total;
}

void bulk_gradient(const BulkModel& model, const Mesh& mesh, std::span<const double> u,
                   Vec& grad) {
    if (u.size() != mesh.n_dofs())
        throw std::invalid_argument("bulk_gradient: field length does not match mesh dofs");
    const int m = mesh.field_dim;
    const int dim = mesh.dimension;
    const std::size_t npe = mesh.nodes_per_elem();
    grad.assign(mesh.n_dofs(), 0.0);
    Vec grads;
    element_gradients(mesh, u, grads);
    Vec stress(static_cast<std::size_t>(m * dim));
    for (std::size_t e = 0; e < mesh.n_elements(); ++e) {
        std::span<const double> xi(&grads[e * static_cast<std::size_t>(m * dim)],
                                   static_cast<std::size_t>(m * dim));
        bulk_stress(model, xi, m, dim, stress);
        const double vs = mesh.elem_volume[e] * model.scale(e);
        const std::size_t* nd = mesh.element(e);
        const double* g = &mesh.elem_grad[e * npe * static_cast<std::size_t>(dim)];
        for (std::size_t a = 0; a < npe; ++a)
            for (int c = 0; c < m; ++c) {
                double s = 0.0;
                for (int d = 0; d < dim; ++d)
                    s += stress[static_cast<std::size_t>(c * dim + d)] *
                         g[a * static_cast<std::size_t>(dim) + static_cast<std::size_t>(d)];
                grad[nd[a] * static_cast<std::size_t>(m) + static_cast<std::size_t>(c)] += vs * s;
            }
    }
}

CsrMatrix bulk_hessian(const BulkModel& model, const Mesh& mesh) {
    if (!(model.variant == BulkVariant::LinearElasticity ||
          model.variant == BulkVariant::QuadraticScalar ||
          (model.variant == BulkVariant::PPower && model.p == 2.0)))
        throw std::invalid_argument("bulk_hessian: only quadratic bulk variants have one");
    const int m = mesh.field_dim;
    const int dim = mesh.dimension;
    const std::size_t npe = mesh.nodes_per_elem();
    TripletBuilder builder(mesh.n_dofs());
    Vec basis(static_cast<std::size_t>(m * dim));
    Vec sb(static_cast<std::size_t>(m * dim));
    for (std::size_t e = 0; e < mesh.n_elements(); ++e) {
        const double vs = mesh.elem_volume[e] * model.scale(e);
        const std::size_t* nd = mesh.element(e);
        const double* g = &mesh.elem_grad[e * npe * static_cast<std::size_t>(dim)];
        for (std::size_t a = 0; a < npe; ++a)
            for (int c = 0; c < m; ++c) {
                // stress of the basis gradient e_c (x) grad(hat_a)
                std::fill(basis.begin(), basis.end(), 0.0);
                for (int d = 0; d < dim; ++d)
                    basis[static_cast<std::size_t>(c * dim + d)] =
                        g[a * static_cast<std::size_t>(dim) + static_cast<std::size_t>(d)];
                bulk_stress(model, basis, m, dim, sb);
                for (std::size_t b = 0; b < npe; ++b)
                    for (int cc = 0; cc < m; ++cc) {
                        double s = 0.0;
                        for (int d = 0; d < dim; ++d)
                            s += sb[static_cast<std::size_t>(cc * dim + d)] *
                                 g[b * static_cast<std::size_t>(dim) + static_cast<std::size_t>(d)];
                        if (s != 0.0)
                            builder.add(nd[a] * static_cast<std::size_t>(m) +
                                            static_cast<std::size_t>(c),
                                        nd[b] * static_cast<std::size_t>(m) +
                                            static_cast<std::size_t>(cc),
                                        vs * s);
                    }
            }
    }
    return builder.compress();
}

double grad_norm_p(const Mesh& mesh, std::span<const double> u, double p) {
    Vec grads;
    element_gradients(mesh, u, grads);
    const std::size_t block = static_cast<std::size_t>(mesh.field_dim * mesh.dimension);
    double total = 0.0;
    for (std::size_t e = 0; e < mesh.n_elements(); ++e) {
        std::span<const double> xi(&grads[e * block], block);
        total += mesh.elem_volume[e] * std::pow(frobenius_sq(xi), p / 2.0);
    }
    return std::pow(total, 1.0 / p);
}

double sym_grad_norm(const Mesh& mesh, std::span<const double> u) {
    if (mesh.field_dim != mesh.dimension)
        throw std::invalid_argument("sym_grad_norm: requires m == n");
    Vec grads;
    element_gradients(mesh, u, grads);
    const int dim = mesh.dimension;
    const std::size_t block = static_cast<std::size_t>(dim * dim);
    double total = 0.0;
    for (std::size_t e = 0; e < mesh.n_elements(); ++e) {
        const double* xi = &grads[e * block];
        double esq = 0.0;
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) {
                const double v = 0.5 * (xi[i * dim + j] + xi[j * dim + i]);
                esq += v * v;
            }
        total += mesh.elem_volume[e] * esq;
    }
    return std::sqrt(total);
}

}  // namespace cohevo

#include "cohevo/euler_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace cohevo {

namespace {

bool element_on_plus_side(const Mesh& mesh, std::size_t e, const InterfacePair& pair) {
    const std::size_t npe = mesh.nodes_per_elem();
    const std::size_t* nd = mesh.element(e);
    double centroid[2] = {0.0, 0.0};
    for (std::size_t a = 0; a < npe; ++a)
        for (int d = 0; d < mesh.dimension; ++d)
            centroid[d] += mesh.node_coord(nd[a], d) / static_cast<double>(npe);
    double s = 0.0;
    for (int d = 0; d < mesh.dimension; ++d)
        s += (centroid[d] - mesh.node_coord(pair.plus_node, d)) * pair.normal[d];
    return s > 0.0;
}

}  // namespace

std::vector<std::array<double, 2>> recover_traction(const Mesh& mesh, const BulkModel& model,
                                                    const LoadProgram& prog, double t,
                                                    std::span<const double> u) {
    const std::size_t m = static_cast<std::size_t>(mesh.field_dim);
    Vec grad;
    bulk_gradient(model, mesh, u, grad);
    const Vec cov = load_covector(prog, mesh, t);

    std::vector<std::array<double, 2>> h(mesh.interface.size(), {0.0, 0.0});
    for (std::size_t e = 0; e < mesh.interface.size(); ++e) {
        const auto& pair = mesh.interface[e];
        if (!pair.tied()) {
            for (std::size_t c = 0; c < m; ++c)
                h[e][c] = (cov[pair.plus_node * m + c] - grad[pair.plus_node * m + c]) /
                          pair.weight;
        }
    }

    // tips: one-sided split of the nodal residual over plus-side elements
    bool any_tied = false;
    for (const auto& pair : mesh.interface) any_tied = any_tied || pair.tied();
    if (!any_tied) return h;

    const std::size_t npe = mesh.nodes_per_elem();
    const int dim = mesh.dimension;
    Vec grads;
    element_gradients(mesh, u, grads);
    Vec stress(static_cast<std::size_t>(mesh.field_dim) * static_cast<std::size_t>(dim));
    for (std::size_t e = 0; e < mesh.interface.size(); ++e) {
        const auto& pair = mesh.interface[e];
        if (!pair.tied()) continue;
        std::array<double, 2> acc{0.0, 0.0};  // minus grad + loads, plus side only
        for (std::size_t el = 0; el < mesh.n_elements(); ++el) {
            const std::size_t* nd = mesh.element(el);
            std::size_t local = npe;
            for (std::size_t a = 0; a < npe; ++a)
                if (nd[a] == pair.plus_node) local = a;
            if (local == npe) continue;
            if (!element_on_plus_side(mesh, el, pair)) continue;
            std::span<const double> xi(&grads[el * m * static_cast<std::size_t>(dim)],
                                       m * static_cast<std::size_t>(dim));
            bulk_stress(model, xi, mesh.field_dim, dim, stress);
            const double vs = mesh.elem_volume[el] * model.scale(el);
            const double* g = &mesh.elem_grad[el * npe * static_cast<std::size_t>(dim)];
            for (std::size_t c = 0; c < m; ++c) {
                double s = 0.0;
                for (int d = 0; d < dim; ++d)
                    s += stress[c * static_cast<std::size_t>(dim) + static_cast<std::size_t>(d)] *
                         g[local * static_cast<std::size_t>(dim) + static_cast<std::size_t>(d)];
                acc[c] -= vs * s;
            }
            if (!prog.f_value.empty()) {
                const double sf = prog.f_signal.value(t);
                for (std::size_t c = 0; c < m; ++c)
                    acc[c] += mesh.elem_volume[el] / static_cast<double>(npe) * sf *
                              prog.f_value[c];
            }
            if (!prog.h_value.empty() || !prog.h_per_element.empty()) {
                const double sh = prog.h_signal.value(t);
                const double* hv = prog.h_per_element.empty()
                                       ? prog.h_value.data()
                                       : &prog.h_per_element[el * m * static_cast<std::size_t>(dim)];
                for (std::size_t c = 0; c < m; ++c) {
                    double v = 0.0;
                    for (int d = 0; d < dim; ++d)
                        v += hv[c * static_cast<std::size_t>(dim) + static_cast<std::size_t>(d)] *
                             g[local * static_cast<std::size_t>(dim) + static_cast<std::size_t>(d)];
                    acc[c] += mesh.elem_volume[el] * sh * v;
                }
            }
        }
        if (!prog.g_plus_value.empty()) {
            const double sg = prog.g_pm_signal.value(t);
            for (std::size_t c = 0; c < m; ++c)
                acc[c] += pair.weight * sg * prog.g_plus_value[c];
        }
        for (std::size_t c = 0; c < m; ++c) h[e][c] = acc[c] / pair.weight;
    }
    return h;
}

std::vector<EulerRegion> classify_regions(const CohesiveLaw& law, const Vec& phis,
                                          const InternalVariable& gamma, double tol) {
    std::vector<EulerRegion> out(phis.size(), EulerRegion::Other);
    for (std::size_t e = 0; e < phis.size(); ++e) {
        const double ph = phis[e];
        const double g = gamma.gamma[e];
        const double phi0 = law.phi0(e);
        if (g < phi0 - tol)
            out[e] = EulerRegion::D;
        else if (ph > tol && std::fabs(ph - g) <= tol)
            out[e] = EulerRegion::A;
        else if (ph <= tol && std::fabs(g - phi0) <= tol)
            out[e] = EulerRegion::B;
    }
    return out;
}

EulerReport euler_residuals(const Mesh& mesh, const BulkModel& model, const CohesiveLaw& law,
                            const LoadProgram& prog, double t, std::span<const double> u,
                            const InternalVariable& gamma, const EulerOptions& opts) {
    const std::size_t m = static_cast<std::size_t>(mesh.field_dim);
    if (u.size() != mesh.n_dofs())
        throw std::invalid_argument("euler_residuals: field size mismatch");

    EulerReport report;
    const auto tractions = recover_traction(mesh, model, prog, t, u);
    const Vec phis = phi_of_jump(law, mesh, u);
    const Vec jmag = jump_magnitudes(mesh, u);
    const Vec jumps = jump(mesh, u);
    const auto regions = classify_regions(law, phis, gamma, opts.region_tol);

    Vec grad;
    bulk_gradient(model, mesh, u, grad);
    const Vec cov = load_covector(prog, mesh, t);

    std::vector<char> fixed(mesh.n_dofs(), 0);
    for (std::size_t node : mesh.dirichlet_nodes)
        for (std::size_t c = 0; c < m; ++c) fixed[node * m + c] = 1;
    std::vector<char> pair_dof(mesh.n_dofs(), 0);
    for (const auto& pair : mesh.interface) {
        if (pair.tied()) continue;
        for (std::size_t c = 0; c < m; ++c) {
            pair_dof[pair.plus_node * m + c] = 1;
            pair_dof[pair.minus_node * m + c] = 1;
        }
    }
    for (std::size_t i = 0; i < mesh.n_dofs(); ++i)
        if (!fixed[i] && !pair_dof[i])
            report.interior_residual = std::max(report.interior_residual,
                                                std::fabs(grad[i] - cov[i]));

    report.example_mode = mesh.field_dim == 1 &&
                          model.variant == BulkVariant::QuadraticScalar &&
                          law.variant == CohesiveVariant::Linear;
    report.min_active_alignment = std::numeric_limits<double>::infinity();
    bool any_active = false;

    for (std::size_t e = 0; e < mesh.interface.size(); ++e) {
        const auto& pair = mesh.interface[e];
        EulerNode node;
        node.pair = e;
        node.traction = tractions[e];
        node.region = regions[e];
        node.tip = pair.tied();
        const LawParams q = law.at(e);

        if (!pair.tied()) {
            double ar = 0.0;
            for (std::size_t c = 0; c < m; ++c) {
                const double rp = grad[pair.plus_node * m + c] - cov[pair.plus_node * m + c];
                const double rm = grad[pair.minus_node * m + c] - cov[pair.minus_node * m + c];
                ar = std::max(ar, std::fabs(rp + rm) / pair.weight);
            }
            report.action_reaction = std::max(report.action_reaction, ar);

            double hnorm = 0.0;
            for (std::size_t c = 0; c < m; ++c) hnorm += node.traction[c] * node.traction[c];
            hnorm = std::sqrt(hnorm);

            switch (node.region) {
                case EulerRegion::A: {
                    // h on the segment joining 0 and d_y phi_tilde(x, [u])
                    const double dmag = phi_tilde_derivative(q, jmag[e]);
                    std::array<double, 2> dphi{0.0, 0.0};
                    if (jmag[e] > 0.0)
                        for (std::size_t c = 0; c < m; ++c)
                            dphi[c] = dmag * jumps[e * m + c] / jmag[e];
                    const double dsq = dphi[0] * dphi[0] + dphi[1] * dphi[1];
                    if (dsq > 0.0) {
                        double hd = 0.0;
                        for (std::size_t c = 0; c < m; ++c) hd += node.traction[c] * dphi[c];
                        node.lambda = hd / dsq;
                        double coll = 0.0;
                        for (std::size_t c = 0; c < m; ++c) {
                            const double r = node.traction[c] - node.lambda * dphi[c];
                            coll += r * r;
                        }
                        node.condition_residual = std::sqrt(coll);
                        report.max_lambda_violation =
                            std::max(report.max_lambda_violation,
                                     std::max(-node.lambda, node.lambda - 1.0));
                    } else {
                        node.condition_residual = hnorm;
                    }
                    break;
                }
                case EulerRegion::B: {
                    // membership in K(x) sampled on unit directions
                    double worst = 0.0;
                    if (m == 1) {
                        worst = std::max(node.traction[0] - q.b, -node.traction[0] - q.b);
                    } else {
                        for (int k = 0; k < opts.directions; ++k) {
                            const double ang = 2.0 * M_PI * k / opts.directions;
                            const double hy = node.traction[0] * std::cos(ang) +
                                              node.traction[1] * std::sin(ang);
                            worst = std::max(worst, hy - q.b);
                        }
                    }
                    node.condition_residual = std::max(0.0, worst);
                    break;
                }
                case EulerRegion::D:
                    // h is undefined on D (and D tilde = D for closed D)
                    node.condition_residual = 0.0;
                    break;
                case EulerRegion::Other:
                    node.condition_residual = hnorm;
                    break;
            }
            report.max_condition_residual =
                std::max(report.max_condition_residual, node.condition_residual);

            if (report.example_mode) {
                const double h0 = node.traction[0];
                report.max_abs_traction = std::max(report.max_abs_traction, std::fabs(h0));
                const double g = gamma.gamma[e];
                if (jmag[e] < g - opts.region_tol)
                    report.max_deadzone_traction =
                        std::max(report.max_deadzone_traction, std::fabs(h0));
                else if (std::fabs(jmag[e] - g) <= opts.region_tol) {
                    any_active = true;
                    report.min_active_alignment =
                        std::min(report.min_active_alignment, h0 * jumps[e * m + 0]);
                }
            }
        }
        report.nodes.push_back(node);
    }
    if (!any_active) report.min_active_alignment = 0.0;
    return report;
}

std::string euler_report_to_json(const EulerReport& report) {
    nlohmann::json j;
    const auto region_name = [](EulerRegion r) {
        switch (r) {
            case EulerRegion::A: return "A";
            case EulerRegion::B: return "B";
            case EulerRegion::D: return "D";
            case EulerRegion::Other: return "other";
        }
        return "other";
    };
    j["interior_residual"] = report.interior_residual;
    j["action_reaction"] = report.action_reaction;
    j["max_condition_residual"] = report.max_condition_residual;
    j["max_lambda_violation"] = report.max_lambda_violation;
    if (report.example_mode) {
        j["example"] = {{"max_abs_traction", report.max_abs_traction},
                        {"max_deadzone_traction", report.max_deadzone_traction},
                        {"min_active_alignment", report.min_active_alignment}};
    }
    j["nodes"] = nlohmann::json::array();
    for (const auto& n : report.nodes)
        j["nodes"].push_back({{"pair", n.pair},
                              {"traction", {n.traction[0], n.traction[1]}},
                              {"region", region_name(n.region)},
                              {"tip", n.tip},
                              {"lambda", n.lambda},
                              {"condition_residual", n.condition_residual}});
    return j.dump(2);
}

}  // namespace cohevo

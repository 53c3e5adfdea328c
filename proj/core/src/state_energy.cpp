#include "cohevo/state_energy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace cohevo {

void InternalVariable::validate() const {
    for (double g : gamma) {
        if (!(g >= 0.0)) throw std::invalid_argument("internal variable: gamma must be >= 0");
        if (!std::isfinite(g)) throw std::invalid_argument("internal variable: gamma not finite");
    }
}

double crack_term(const Mesh& mesh, const InternalVariable& gamma) {
    if (gamma.gamma.size() != mesh.interface.size())
        throw std::invalid_argument("crack_term: gamma size does not match interface");
    double s = 0.0;
    for (std::size_t e = 0; e < mesh.interface.size(); ++e)
        s += mesh.interface[e].weight * gamma.gamma[e];
    return s;
}

EnergyBreakdown total_energy(const Configuration& cfg, const BulkModel& model,
                             const CohesiveLaw& law, const LoadProgram& prog, const Mesh& mesh) {
    (void)law;
    EnergyBreakdown out;
    out.bulk = bulk_energy(model, mesh, cfg.u);
    out.load_work = load_apply(prog, mesh, cfg.time, cfg.u);
    out.crack_term = crack_term(mesh, cfg.gamma);
    out.total = out.bulk - out.load_work + out.crack_term;
    return out;
}

InternalVariable join(const InternalVariable& gamma, std::span<const double> other) {
    if (gamma.gamma.size() != other.size())
        throw std::invalid_argument("join: size mismatch");
    InternalVariable out = gamma;
    for (std::size_t i = 0; i < other.size(); ++i) out.gamma[i] = std::max(out.gamma[i], other[i]);
    return out;
}

double dissipation_distance(const Mesh& mesh, const InternalVariable& g1,
                            const InternalVariable& g2) {
    if (g1.gamma.size() != g2.gamma.size() || g1.gamma.size() != mesh.interface.size())
        throw std::invalid_argument("dissipation_distance: size mismatch");
    double s = 0.0;
    for (std::size_t e = 0; e < g1.gamma.size(); ++e) {
        const double d = g2.gamma[e] - g1.gamma[e];
        if (d < 0.0)
            throw std::invalid_argument("dissipation_distance: irreversibility breach (g2 < g1)");
        s += mesh.interface[e].weight * d;
    }
    return s;
}

Vec phi_of_jump(const CohesiveLaw& law, const Mesh& mesh, std::span<const double> u) {
    const Vec mags = jump_magnitudes(mesh, u);
    Vec out(mags.size(), 0.0);
    for (std::size_t e = 0; e < mags.size(); ++e) out[e] = phi_radial(law.at(e), mags[e]);
    return out;
}

bool admissible(const Configuration& cfg, const CohesiveLaw& law, const LoadProgram& prog,
                const Mesh& mesh, double tol) {
    const Vec phis = phi_of_jump(law, mesh, cfg.u);
    for (std::size_t e = 0; e < phis.size(); ++e)
        if (phis[e] > cfg.gamma.gamma[e] + tol) return false;
    const Vec psi = boundary_value(prog, mesh, cfg.time);
    const std::size_t m = static_cast<std::size_t>(mesh.field_dim);
    for (std::size_t node : mesh.dirichlet_nodes)
        for (std::size_t c = 0; c < m; ++c)
            if (std::fabs(cfg.u[node * m + c] - psi[node * m + c]) > tol) return false;
    return true;
}

StabilityReport stability_check(const Configuration& cfg, const std::vector<Vec>& competitors,
                                const BulkModel& model, const CohesiveLaw& law,
                                const LoadProgram& prog, const Mesh& mesh, double tol) {
    StabilityReport report;
    report.tolerance = tol;
    report.competitors = competitors.size();

    const Vec psi = boundary_value(prog, mesh, cfg.time);
    const std::size_t m = static_cast<std::size_t>(mesh.field_dim);
    const double lhs =
        bulk_energy(model, mesh, cfg.u) - load_apply(prog, mesh, cfg.time, cfg.u);

    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < competitors.size(); ++k) {
        const Vec& v = competitors[k];
        if (v.size() != mesh.n_dofs())
            throw std::invalid_argument("stability_check: competitor size mismatch");
        for (std::size_t node : mesh.dirichlet_nodes)
            for (std::size_t c = 0; c < m; ++c)
                if (std::fabs(v[node * m + c] - psi[node * m + c]) > 1e-12)
                    throw std::invalid_argument(
                        "stability_check: competitor violates the Dirichlet condition");
        const Vec phis = phi_of_jump(law, mesh, v);
        double increment = 0.0;
        for (std::size_t e = 0; e < phis.size(); ++e)
            increment +=
                mesh.interface[e].weight * std::max(0.0, phis[e] - cfg.gamma.gamma[e]);
        const double rhs =
            bulk_energy(model, mesh, v) - load_apply(prog, mesh, cfg.time, v) + increment;
        const double violation = lhs - rhs;
        if (violation > worst) {
            worst = violation;
            report.worst_competitor = k;
        }
    }
    report.max_violation = competitors.empty() ? 0.0 : worst;
    report.pass = report.max_violation <= tol;
    return report;
}

std::vector<Vec> sample_competitors(const Mesh& mesh, std::span<const double> u, std::size_t count,
                                    unsigned seed, double amp_min, double amp_max) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    const std::size_t m = static_cast<std::size_t>(mesh.field_dim);
    std::vector<Vec> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        const double frac = count > 1 ? static_cast<double>(k) / (count - 1) : 0.0;
        const double amp = amp_min * std::pow(amp_max / amp_min, frac);
        Vec v(u.begin(), u.end());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] += amp * uni(rng);
        for (std::size_t node : mesh.dirichlet_nodes)
            for (std::size_t c = 0; c < m; ++c)
                v[node * m + c] = u[node * m + c];
        out.push_back(std::move(v));
    }
    return out;
}

double apriori_energy_bound(const BulkModel& model, const CohesiveLaw& law,
                            const LoadProgram& prog, const Mesh& mesh, double t,
                            const InternalVariable& gamma) {
    (void)law;
    const Vec psi = boundary_value(prog, mesh, t);
    return bulk_energy(model, mesh, psi) - load_apply(prog, mesh, t, psi) +
           crack_term(mesh, gamma);
}

}  // namespace cohevo

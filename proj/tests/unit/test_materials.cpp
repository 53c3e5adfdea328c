#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "cohevo/materials.hpp"
#include "test_helpers.hpp"

using namespace cohevo;
using cohevo::testing::prox_grid_search;

namespace {

CohesiveLaw make_law(CohesiveVariant variant, double a, double b, double c = 1.0) {
    CohesiveLaw law;
    law.variant = variant;
    law.a = a;
    law.b = b;
    law.c_sat = c;
    return law;
}

}  // namespace

TEST_CASE("phi values of the shipped laws") {
    const CohesiveLaw griffith = make_law(CohesiveVariant::Griffith, 0.04, 0.1);
    CHECK(phi(griffith, Vec{0.0}) == 0.0);
    CHECK(phi(griffith, Vec{2.0}) == doctest::Approx(0.24).epsilon(1e-15));
    const CohesiveLaw linear = make_law(CohesiveVariant::Linear, 0.0, 1.0);
    CHECK(phi(linear, Vec{3.0}) == 3.0);
    CHECK(phi(linear, Vec{0.0}) == 0.0);
    const CohesiveLaw sat = make_law(CohesiveVariant::SmoothSaturating, 0.0, 1.0, 5.0);
    CHECK(phi(sat, Vec{0.0}) == 0.0);
    CHECK(phi(sat, Vec{2.0}) == doctest::Approx(5.0 * (1.0 - std::exp(-0.4))).epsilon(1e-14));
}

TEST_CASE("increment cost (phi(y) - gamma)^+") {
    const CohesiveLaw linear = make_law(CohesiveVariant::Linear, 0.0, 1.0);
    CHECK(increment_cost(linear, Vec{2.0}, 3.0) == 0.0);
    CHECK(increment_cost(linear, Vec{2.0}, 0.5) == doctest::Approx(1.5));
    const CohesiveLaw griffith = make_law(CohesiveVariant::Griffith, 0.04, 0.1);
    CHECK(increment_cost(griffith, Vec{0.0}, 0.0) == 0.0);
    CHECK_THROWS_AS(increment_cost(linear, Vec{1.0}, -0.1), std::invalid_argument);
}

TEST_CASE("prox examples from the contract") {
    // dead zone keeps y0
    const CohesiveLaw linear1 = make_law(CohesiveVariant::Linear, 0.0, 1.0);
    Vec out = prox_increment(linear1, Vec{0.4}, 1.0, 1.0, 1.0);
    CHECK(out[0] == doctest::Approx(0.4).epsilon(1e-15));
    // soft threshold y0 - w b / c
    const CohesiveLaw linear2 = make_law(CohesiveVariant::Linear, 0.0, 0.25);
    out = prox_increment(linear2, Vec{1.0}, 0.0, 1.0, 1.0);
    CHECK(out[0] == doctest::Approx(0.75).epsilon(1e-14));
    // griffith: staying closed beats paying the activation
    const CohesiveLaw griffith = make_law(CohesiveVariant::Griffith, 0.04, 0.1);
    out = prox_increment(griffith, Vec{0.3}, 0.0, 1.0, 1.0);
    CHECK(out[0] == 0.0);
}

TEST_CASE("prox against two-stage brute-force grid search") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int trial = 0; trial < 300; ++trial) {
        LawParams q;
        const int which = trial % 3;
        q.variant = which == 0   ? CohesiveVariant::Linear
                    : which == 1 ? CohesiveVariant::Griffith
                                 : CohesiveVariant::SmoothSaturating;
        q.a = which == 0 ? 0.0 : 0.3 * uni(rng);
        q.b = uni(rng);
        q.c_sat = 0.5 + uni(rng);
        const double y0 = (2.0 * uni(rng) - 1.0) * 0.5;
        const double gamma = 0.5 * uni(rng);
        const double c = 0.5 + 1.5 * uni(rng);
        const double w = 0.25 + 0.75 * uni(rng);

        const double got = prox_increment_radial(q, std::fabs(y0), gamma, c, w);
        const auto ref = prox_grid_search(q, std::fabs(y0), gamma, c, w);
        const double got_val =
            0.5 * c * (got - std::fabs(y0)) * (got - std::fabs(y0)) +
            w * std::max(0.0, phi_radial(q, got) - gamma);
        CHECK(std::fabs(got - ref.arg) <= 1e-4);
        CHECK(std::fabs(got_val - ref.value) <= 1e-8);
    }
}

TEST_CASE("prox dominance over y0 and 0") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int trial = 0; trial < 10000; ++trial) {
        LawParams q;
        const int which = trial % 3;
        q.variant = which == 0   ? CohesiveVariant::Linear
                    : which == 1 ? CohesiveVariant::Griffith
                                 : CohesiveVariant::SmoothSaturating;
        q.a = which == 0 ? 0.0 : uni(rng);
        q.b = 2.0 * uni(rng);
        q.c_sat = 0.2 + 2.0 * uni(rng);
        const double r0 = 2.0 * uni(rng);
        const double gamma = uni(rng);
        const double c = 0.1 + 3.0 * uni(rng);
        const double w = 0.1 + 2.0 * uni(rng);
        const auto objective = [&](double r) {
            return 0.5 * c * (r - r0) * (r - r0) + w * std::max(0.0, phi_radial(q, r) - gamma);
        };
        const double r = prox_increment_radial(q, r0, gamma, c, w);
        CHECK(objective(r) <= objective(r0) + 1e-15);
        CHECK(objective(r) <= objective(0.0) + 1e-15);
    }
}

TEST_CASE("prox of a vector jump is collinear with y0") {
    const CohesiveLaw linear = make_law(CohesiveVariant::Linear, 0.0, 0.5);
    const Vec y0{0.6, -0.8};  // magnitude 1
    const Vec out = prox_increment(linear, y0, 0.0, 1.0, 1.0);
    const double r = std::hypot(out[0], out[1]);
    CHECK(r == doctest::Approx(0.5).epsilon(1e-14));  // soft threshold 1 - 0.5
    CHECK(out[0] * y0[1] - out[1] * y0[0] == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("psi_tilde is b|y| with positive homogeneity") {
    const CohesiveLaw linear = make_law(CohesiveVariant::Linear, 0.0, 1.0);
    CHECK(psi_tilde(linear, Vec{2.0}) == doctest::Approx(2.0));
    const CohesiveLaw sat = make_law(CohesiveVariant::SmoothSaturating, 0.0, 1.0, 5.0);
    CHECK(psi_tilde(sat, Vec{2.0}) == doctest::Approx(2.0));
    const CohesiveLaw griffith = make_law(CohesiveVariant::Griffith, 0.04, 0.0);
    CHECK(psi_tilde(griffith, Vec{5.0}) == 0.0);
    for (double lambda : {0.5, 2.0, 7.0})
        CHECK(psi_tilde(sat, Vec{lambda * 1.3}) ==
              doctest::Approx(lambda * psi_tilde(sat, Vec{1.3})).epsilon(1e-13));
    CHECK(psi_tilde(sat, Vec{0.0}) == 0.0);
}

TEST_CASE("derivative bound of the smooth part") {
    const CohesiveLaw sat = make_law(CohesiveVariant::SmoothSaturating, 0.1, 0.7, 2.0);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> uni(1e-6, 10.0);
    for (int i = 0; i < 1000; ++i) {
        const double r = uni(rng);
        CHECK(phi_tilde_derivative(sat.at(0), r) <= sat.phi_bar(0) + 1e-15);
        // finite difference of the smooth part matches the analytic derivative
        const double h = 1e-7 * (1.0 + r);
        const double fd = (phi_radial(sat.at(0), r + h) - phi_radial(sat.at(0), r - h)) / (2 * h);
        CHECK(fd == doctest::Approx(phi_tilde_derivative(sat.at(0), r)).epsilon(1e-5));
    }
}

TEST_CASE("bulk energy examples") {
    const Mesh rod = build_rod_mesh(1.0, 4, 0.5);
    BulkModel quad;
    Vec u(rod.n_dofs(), 0.0);
    CHECK(bulk_energy(quad, rod, u) == 0.0);
    Vec grad;
    bulk_gradient(quad, rod, u, grad);
    for (double g : grad) CHECK(g == 0.0);

    // u(x) = x on the unit rod: energy 1/2 (the duplicated node pair must
    // carry equal values for a globally affine field)
    for (std::size_t n = 0; n < rod.n_nodes(); ++n) u[n] = rod.node_coord(n, 0);
    CHECK(bulk_energy(quad, rod, u) == doctest::Approx(0.5).epsilon(1e-15));

    BulkModel quartic;
    quartic.variant = BulkVariant::PPower;
    quartic.p = 4.0;
    for (std::size_t n = 0; n < rod.n_nodes(); ++n) u[n] = 2.0 * rod.node_coord(n, 0);
    CHECK(bulk_energy(quartic, rod, u) == doctest::Approx(4.0).epsilon(1e-14));
}

TEST_CASE("bulk gradient matches central finite differences") {
    const Mesh mesh = build_rect_mesh_with_crack(4.0, 4.0, 4, 4, 0.0, 1.0);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    Vec u(mesh.n_dofs());
    for (auto& x : u) x = 0.5 + uni(rng);

    const auto check_fd = [&](const BulkModel& model, double tol) {
        Vec grad;
        bulk_gradient(model, mesh, u, grad);
        std::uniform_int_distribution<std::size_t> pick(0, mesh.n_dofs() - 1);
        for (int k = 0; k < 24; ++k) {
            const std::size_t i = pick(rng);
            const double h = 1e-6;
            Vec up = u, dn = u;
            up[i] += h;
            dn[i] -= h;
            const double fd = (bulk_energy(model, mesh, up) - bulk_energy(model, mesh, dn)) /
                              (2.0 * h);
            CHECK(fd == doctest::Approx(grad[i]).epsilon(tol));
        }
    };
    BulkModel quad;
    check_fd(quad, 1e-6);
    BulkModel cubic;
    cubic.variant = BulkVariant::PPower;
    cubic.p = 3.0;
    check_fd(cubic, 1e-5);
}

TEST_CASE("linear elasticity density, gradient and coercivity") {
    BulkModel elastic;
    elastic.variant = BulkVariant::LinearElasticity;
    elastic.lambda_lame = 1.0;
    elastic.mu_lame = 1.0;
    // A xi : xi = 2 mu |sym xi|^2 + lambda tr(xi)^2 between the witnesses
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    const double c0 = elastic.coercivity_lower();
    const double c1 = elastic.coercivity_upper();
    CHECK(c0 == doctest::Approx(2.0));
    CHECK(c1 == doctest::Approx(4.0));
    for (int k = 0; k < 1000; ++k) {
        const double a = uni(rng), b = uni(rng), c = uni(rng);
        const Vec xi{a, b, b, c};  // symmetric 2x2
        const double nsq = a * a + 2 * b * b + c * c;
        const double q = bulk_density(elastic, xi, 2, 2);
        CHECK(q >= c0 * nsq - 1e-12);
        CHECK(q <= c1 * nsq + 1e-12);
    }

    RectMeshOptions opts;
    opts.field_dim = 2;
    const Mesh mesh = build_rect_mesh_with_crack(4.0, 4.0, 4, 4, 0.0, 1.0, opts);
    Vec u(mesh.n_dofs());
    for (auto& x : u) x = uni(rng);
    Vec grad;
    bulk_gradient(elastic, mesh, u, grad);
    for (int k = 0; k < 16; ++k) {
        const std::size_t i = static_cast<std::size_t>(k * 7 % mesh.n_dofs());
        Vec up = u, dn = u;
        up[i] += 1e-6;
        dn[i] -= 1e-6;
        const double fd =
            (bulk_energy(elastic, mesh, up) - bulk_energy(elastic, mesh, dn)) / 2e-6;
        CHECK(fd == doctest::Approx(grad[i]).epsilon(1e-6));
    }
}

TEST_CASE("p-power growth bounds with a0 = a1 = 1/p") {
    BulkModel model;
    model.variant = BulkVariant::PPower;
    model.p = 3.5;
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> uni(-3.0, 3.0);
    for (int k = 0; k < 10000; ++k) {
        const Vec xi{uni(rng), uni(rng)};
        const double nrm = std::hypot(xi[0], xi[1]);
        const double w = bulk_density(model, xi, 1, 2);
        const double reference = std::pow(nrm, model.p) / model.p;
        CHECK(w == doctest::Approx(reference).epsilon(1e-12));
    }
}

TEST_CASE("heterogeneous element scale and per-node law parameters") {
    const Mesh rod = build_rod_mesh(2.0, 2, 1.0);
    BulkModel quad;
    quad.element_scale = {2.0, 1.0};
    Vec u(rod.n_dofs(), 0.0);
    for (std::size_t n = 0; n < rod.n_nodes(); ++n) u[n] = rod.node_coord(n, 0);
    // 2 * (1/2) + 1 * (1/2)
    CHECK(bulk_energy(quad, rod, u) == doctest::Approx(1.5).epsilon(1e-15));

    CohesiveLaw law = make_law(CohesiveVariant::Linear, 0.0, 1.0);
    law.node_b = {0.25};
    CHECK(phi_at(law, 0, Vec{2.0}) == doctest::Approx(0.5));
}

TEST_CASE("hessian only exists for quadratic bulk") {
    const Mesh rod = build_rod_mesh(2.0, 4, 1.0);
    BulkModel cubic;
    cubic.variant = BulkVariant::PPower;
    cubic.p = 3.0;
    CHECK_THROWS_AS(bulk_hessian(cubic, rod), std::invalid_argument);
    BulkModel quad;
    const CsrMatrix h = bulk_hessian(quad, rod);
    // quadratic consistency: u' H u = 2 * energy
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    Vec u(rod.n_dofs());
    for (auto& x : u) x = uni(rng);
    Vec hu;
    h.apply(u, hu);
    CHECK(0.5 * dot(u, hu) == doctest::Approx(bulk_energy(quad, rod, u)).epsilon(1e-13));
}

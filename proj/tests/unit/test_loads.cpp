#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "cohevo/loads.hpp"
#include "test_helpers.hpp"

using namespace cohevo;

namespace {

LoadProgram ramp_program() {
    LoadProgram prog;
    prog.horizon = 1.0;
    prog.psi_profile.matrix = {0.5};
    prog.psi_profile.offset = {0.0};
    prog.psi_signal.family = TimeFamily::Ramp;
    prog.psi_signal.scale = 1.0;
    return prog;
}

}  // namespace

TEST_CASE("time signal families and derivatives") {
    TimeSignal ramp{TimeFamily::Ramp, 2.0, 0.5, 1.0};
    CHECK(ramp.value(0.3) == doctest::Approx(0.6));
    CHECK(ramp.derivative(0.9) == 2.0);

    TimeSignal tri{TimeFamily::Triangle, 1.0, 0.5, 1.0};
    CHECK(tri.value(0.25) == doctest::Approx(0.25));
    CHECK(tri.value(0.75) == doctest::Approx(0.25));
    // left-branch convention at the apex
    CHECK(tri.derivative(0.5) == 1.0);
    CHECK(tri.derivative(0.51) == -1.0);

    TimeSignal sine{TimeFamily::Sinusoid, 2.0, 0.5, 3.0};
    CHECK(sine.value(0.2) == doctest::Approx(2.0 * std::sin(0.6)));
    CHECK(sine.derivative(0.2) == doctest::Approx(6.0 * std::cos(0.6)));
}

TEST_CASE("boundary value and rate on the rod") {
    const Mesh mesh = build_rod_mesh(2.0, 4, 1.0);
    const LoadProgram prog = ramp_program();
    const Vec psi = boundary_value(prog, mesh, 0.6);
    // twins coincide
    CHECK(psi[mesh.interface[0].plus_node] == psi[mesh.interface[0].minus_node]);
    CHECK(psi[4] == doctest::Approx(0.6));  // right end: x = 2 -> 0.6 * 1
    const Vec rate = boundary_rate(prog, mesh, 0.6);
    CHECK(rate[4] == doctest::Approx(1.0));
    CHECK(boundary_value(prog, mesh, 0.0)[4] == 0.0);
    CHECK_THROWS_AS(boundary_value(prog, mesh, 1.5), std::invalid_argument);
    CHECK_THROWS_AS(boundary_value(prog, mesh, -0.1), std::invalid_argument);
}

TEST_CASE("zero loads apply to zero") {
    const Mesh mesh = build_rect_mesh_with_crack(4.0, 4.0, 4, 4, 0.0, 1.0);
    const LoadProgram prog = [] {
        LoadProgram p;
        p.horizon = 1.0;
        p.psi_profile.matrix = {0.0, 0.0};
        p.psi_profile.offset = {0.0};
        p.psi_signal.family = TimeFamily::Constant;
        p.psi_signal.scale = 0.0;
        return p;
    }();
    Vec u(mesh.n_dofs(), 1.7);
    CHECK(load_apply(prog, mesh, 0.5, u) == 0.0);
}

TEST_CASE("volume term integrates f . u exactly") {
    const Mesh mesh = build_rod_mesh(2.0, 4, 1.0);
    LoadProgram prog = ramp_program();
    prog.f_value = {1.0};
    prog.f_signal = {TimeFamily::Constant, 1.0, 0.5, 1.0};
    Vec u(mesh.n_dofs(), 1.0);
    CHECK(load_apply(prog, mesh, 0.5, u) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("crack-face term: g_plus against a lifted plus trace") {
    const Mesh mesh = build_rect_mesh_with_crack(4.0, 4.0, 8, 8, 0.0, 1.0);
    LoadProgram prog;
    prog.horizon = 1.0;
    prog.psi_profile.matrix = {0.0, 0.0};
    prog.psi_profile.offset = {0.0};
    prog.psi_signal.family = TimeFamily::Constant;
    prog.psi_signal.scale = 0.0;
    prog.g_plus_value = {1.0};
    prog.g_pm_signal = {TimeFamily::Constant, 1.0, 0.5, 1.0};
    // u = 2 on every plus copy and on the tied tip, 0 on minus copies
    Vec u(mesh.n_dofs(), 0.0);
    for (const auto& p : mesh.interface) u[p.plus_node] = 2.0;
    // integral over M of g_plus * u_plus = 2 * |M| = 2
    CHECK(load_apply(prog, mesh, 0.5, u) == doctest::Approx(2.0).epsilon(1e-13));
}

TEST_CASE("linearity and covector consistency") {
    const Mesh mesh = build_rect_mesh_with_crack(4.0, 4.0, 8, 8, 0.0, 1.0);
    LoadProgram prog;
    prog.horizon = 1.0;
    prog.psi_profile.matrix = {0.0, 1.0};
    prog.psi_profile.offset = {0.0};
    prog.psi_signal.family = TimeFamily::Ramp;
    prog.psi_signal.scale = 1.0;
    prog.f_value = {0.7};
    prog.f_signal = {TimeFamily::Sinusoid, 1.3, 0.5, 2.0};
    prog.h_value = {0.2, -0.4};
    prog.h_signal = {TimeFamily::Ramp, 0.8, 0.5, 1.0};
    prog.g_value = {0.5};
    prog.g_signal = {TimeFamily::Constant, 1.0, 0.5, 1.0};
    prog.g_plus_value = {0.3};
    prog.g_minus_value = {-0.2};
    prog.g_pm_signal = {TimeFamily::Ramp, 1.0, 0.5, 1.0};

    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    Vec u(mesh.n_dofs()), v(mesh.n_dofs());
    for (auto& x : u) x = uni(rng);
    for (auto& x : v) x = uni(rng);

    const double t = 0.37;
    const double alpha = 1.7, beta = -0.9;
    Vec comb(u);
    for (std::size_t i = 0; i < comb.size(); ++i) comb[i] = alpha * u[i] + beta * v[i];
    const double lhs = load_apply(prog, mesh, t, comb);
    const double rhs = alpha * load_apply(prog, mesh, t, u) + beta * load_apply(prog, mesh, t, v);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));

    const Vec cov = load_covector(prog, mesh, t);
    double paired = 0.0;
    for (std::size_t i = 0; i < cov.size(); ++i) paired += cov[i] * u[i];
    CHECK(paired == doctest::Approx(load_apply(prog, mesh, t, u)).epsilon(1e-12));
}

TEST_CASE("analytic rate matches central differences at second order") {
    const Mesh mesh = build_rod_mesh(2.0, 4, 1.0);
    LoadProgram prog = ramp_program();
    prog.f_value = {0.9};
    prog.f_signal = {TimeFamily::Sinusoid, 1.0, 0.5, 2.5};
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    Vec u(mesh.n_dofs());
    for (auto& x : u) x = uni(rng);

    const double t = 0.4;
    const double exact = load_rate_apply(prog, mesh, t, u);
    const auto central = [&](double h) {
        return (load_apply(prog, mesh, t + h, u) - load_apply(prog, mesh, t - h, u)) / (2.0 * h);
    };
    const double e1 = std::fabs(central(1e-3) - exact);
    const double e2 = std::fabs(central(5e-4) - exact);
    CHECK(e1 <= 1e-5);
    CHECK(e2 <= e1 / 3.0);  // O(h^2) shrinkage

    // sampled-difference quotient of psi stays bounded (Lipschitz in time)
    for (int k = 0; k < 100; ++k) {
        const double s = 0.005 + 0.989 * k / 100.0;
        const Vec a = boundary_value(prog, mesh, s);
        const Vec b = boundary_value(prog, mesh, s + 1e-3);
        for (std::size_t i = 0; i < a.size(); ++i)
            CHECK(std::fabs(b[i] - a[i]) / 1e-3 <= 2.0);
    }
}

TEST_CASE("per-element H field is honored") {
    const Mesh mesh = build_rod_mesh(2.0, 2, 1.0);
    LoadProgram prog = ramp_program();
    prog.h_value = {1.0};
    prog.h_signal = {TimeFamily::Constant, 1.0, 0.5, 1.0};
    prog.h_per_element = {1.0, -1.0};  // discontinuous across M
    Vec u(mesh.n_dofs(), 0.0);
    for (std::size_t n = 0; n < mesh.n_nodes(); ++n) u[n] = mesh.node_coord(n, 0);
    // integral of H : grad u = 1*1*1 + (-1)*1*1 = 0
    CHECK(load_apply(prog, mesh, 0.5, u) == doctest::Approx(0.0).epsilon(1e-14));
    prog.h_per_element = {1.0, 1.0};
    CHECK(load_apply(prog, mesh, 0.5, u) == doctest::Approx(2.0).epsilon(1e-14));
}

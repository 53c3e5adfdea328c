#include <benchmark/benchmark.h>

#include "cohevo/evolution.hpp"
#include "cohevo/solver.hpp"

using namespace cohevo;

namespace {

struct PlaneCase {
    Mesh mesh;
    BulkModel bulk;
    CohesiveLaw law;
    LoadProgram prog;

    explicit PlaneCase(int n) {
        RectMeshOptions opts;
        mesh = build_rect_mesh_with_crack(4.0, 4.0, n, n, 0.0, 1.0, opts);
        law.variant = CohesiveVariant::Linear;
        law.b = 1.0;
        prog.horizon = 1.0;
        prog.psi_profile.matrix = {0.0, 4.0};
        prog.psi_profile.offset = {0.0};
        prog.psi_signal.family = TimeFamily::Ramp;
        prog.psi_signal.scale = 1.0;
    }
};

void BM_IncrementalSolve(benchmark::State& state) {
    const PlaneCase c(static_cast<int>(state.range(0)));
    IncrementalSolver solver(c.mesh, c.bulk, c.law, c.prog);
    InternalVariable gamma;
    gamma.gamma.assign(c.mesh.interface.size(), 0.0);
    Vec u0(c.mesh.n_dofs(), 0.0);
    for (auto _ : state) {
        auto [u, info] = solver.solve(0.7, gamma, u0);
        benchmark::DoNotOptimize(info.objective);
    }
    state.SetLabel(std::to_string(c.mesh.n_dofs()) + " dofs");
}
BENCHMARK(BM_IncrementalSolve)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_ProxSweep(benchmark::State& state) {
    CohesiveLaw law;
    law.variant = CohesiveVariant::Griffith;
    law.a = 0.04;
    law.b = 0.1;
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    Vec y0(n);
    for (std::size_t i = 0; i < n; ++i) y0[i] = 0.001 * static_cast<double>(i % 700);
    for (auto _ : state) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            acc += prox_increment_radial(law.at(0), y0[i], 0.02, 1.5, 0.5);
        benchmark::DoNotOptimize(acc);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(n));
}
BENCHMARK(BM_ProxSweep)->Arg(1024)->Arg(16384);

void BM_Evolution1d(benchmark::State& state) {
    const Mesh mesh = build_rod_mesh(2.0, 8, 1.0);
    BulkModel bulk;
    CohesiveLaw law;
    law.variant = CohesiveVariant::Linear;
    law.b = 0.25;
    LoadProgram prog;
    prog.horizon = 1.0;
    prog.psi_profile.matrix = {0.5};
    prog.psi_profile.offset = {0.0};
    prog.psi_signal.family = TimeFamily::Ramp;
    prog.psi_signal.scale = 1.0;
    const TimeGrid grid = TimeGrid::uniform(1.0, static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        Configuration initial;
        initial.u.assign(mesh.n_dofs(), 0.0);
        initial.gamma.gamma.assign(mesh.interface.size(), 0.0);
        const EvolutionTrace trace = run_evolution(mesh, bulk, law, prog, grid, initial);
        benchmark::DoNotOptimize(trace.steps.back().energy.total);
    }
}
BENCHMARK(BM_Evolution1d)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

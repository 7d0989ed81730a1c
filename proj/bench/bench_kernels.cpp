// Serial reference vs OpenMP paths of the two ensemble kernels.
#include <benchmark/benchmark.h>

#include "pilotwave/belljump.hpp"
#include "pilotwave/equilibrium.hpp"
#include "pilotwave/stepper.hpp"

using namespace pilotwave;

namespace {

const FlowTimeline& free_gaussian_timeline() {
    static const FlowTimeline tl = [] {
        const Grid1D grid(1024, -20.0, 20.0);
        const auto psi0 = init_gaussian(grid, 0.0, 1.0, 0.0);
        const auto states = evolve_timeline(psi0, Potential::zero(grid), 0.01 / 7.0, 7 * 100, 7);
        return make_timeline(states);
    }();
    return tl;
}

void BM_Trajectories(benchmark::State& state, Execution exec) {
    const auto& tl = free_gaussian_timeline();
    const auto samples = sample_density(tl.grid, tl.density.front(), static_cast<std::size_t>(state.range(0)), 7);
    IntegratorOptions opts;
    opts.execution = exec;
    for (auto _ : state) benchmark::DoNotOptimize(integrate_trajectories(tl, samples.positions, opts));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_JumpEnsemble(benchmark::State& state, Execution exec) {
    static const auto model = fermion_chain_model();
    static const ExactEvolution evo(model.state);
    static const auto table = build_rate_table(evo, model.basis, 3.0);
    const auto p0 = marginal_P(model.state.amplitudes, model.basis);
    for (auto _ : state)
        benchmark::DoNotOptimize(
            simulate_jump_ensemble(table, p0, static_cast<std::size_t>(state.range(0)), 3.0, 11, exec));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK_CAPTURE(BM_Trajectories, serial, Execution::serial)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Trajectories, parallel, Execution::parallel)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_JumpEnsemble, serial, Execution::serial)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_JumpEnsemble, parallel, Execution::parallel)->Arg(10000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

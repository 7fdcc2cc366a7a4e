#include <benchmark/benchmark.h>

#include <complex>

#include "birg/graph.hpp"
#include "birg/mp_law.hpp"
#include "birg/rng.hpp"
#include "birg/spectral.hpp"
#include "birg/switching.hpp"

namespace {

using namespace birg;

void ChainMoves(benchmark::State& state) {
    const auto cfg = state.range(0) == 0 ? validate_config(3, 3, 2, 2)
                                         : validate_config(2 * state.range(0), state.range(0), 20,
                                                           40);
    Rng rng(1);
    const long long block = 4096;
    for (auto _ : state) {
        benchmark::DoNotOptimize(run_chain(cfg, block, rng));
    }
    state.SetItemsProcessed(state.iterations() * block);
}
BENCHMARK(ChainMoves)->Arg(0)->Arg(200)->Arg(1000);

void Eigendecompose(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const auto cfg = validate_config(2 * n, n, 20, 40);
    Rng rng(2);
    const auto graph = run_chain(cfg, 20ll * cfg.M * cfg.d_b, rng);
    const auto ensemble = normalize(adjacency(graph), cfg);
    for (auto _ : state) {
        benchmark::DoNotOptimize(eigendecompose(ensemble.X_small));
    }
}
BENCHMARK(Eigendecompose)->Arg(200)->Arg(400)->Arg(800)->Unit(benchmark::kMillisecond);

void GreenMatrix(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const auto cfg = validate_config(2 * n, n, 20, 40);
    Rng rng(3);
    const auto graph = run_chain(cfg, 20ll * cfg.M * cfg.d_b, rng);
    const auto spec = eigendecompose(normalize(adjacency(graph), cfg).X_small);
    const Complex z{1.0, 0.05};
    for (auto _ : state) {
        benchmark::DoNotOptimize(green_matrix(spec, z));
    }
}
BENCHMARK(GreenMatrix)->Arg(400)->Arg(800)->Unit(benchmark::kMillisecond);

void StieltjesTransform(benchmark::State& state) {
    const auto p = MPParams::from_gamma(0.5);
    Rng rng(4);
    for (auto _ : state) {
        const Complex z(3.0 * rng.unit() + 0.1, rng.unit() + 1e-3);
        benchmark::DoNotOptimize(m_inf(z, p));
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(StieltjesTransform);

void ClassicalLocations(benchmark::State& state) {
    const auto p = MPParams::from_gamma(0.5);
    for (auto _ : state) {
        benchmark::DoNotOptimize(classical_locations(static_cast<int>(state.range(0)), p));
    }
}
BENCHMARK(ClassicalLocations)->Arg(500)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

#include <mchom/cell_problems.hpp>
#include <mchom/coarse_solvers.hpp>
#include <mchom/effective.hpp>
#include <mchom/experiments.hpp>
#include <mchom/fine_solvers.hpp>

#include <benchmark/benchmark.h>

using namespace mchom;

namespace {

ExperimentConfig bench_config(int M, int layers, Formulation f)
{
    ExperimentConfig c;
    c.case_id = 1;
    c.M = M;
    c.eps = 1.0 / M;
    c.layers = layers;
    c.formulation = f;
    c.threads = 1;
    return c;
}

} // namespace

// Factorization plus every column of one interior block.
static void BM_CellBlock(benchmark::State& state)
{
    const Formulation f = state.range(0) ? Formulation::mixed : Formulation::elliptic;
    const ExperimentConfig c = bench_config(10, static_cast<int>(state.range(1)), f);
    const CaseData d = build_case(c);
    const CoarsePartition p(d.medium.grid, c.M);
    const LayerChoice lc = c.layer_choice();
    const RegionSet r = build_regions(p, {5, 5}, lc.l, lc.l_v, lc.l_i);
    for (auto _ : state) {
        if (f == Formulation::mixed)
            benchmark::DoNotOptimize(MixedCellSolver(d.medium, p, r).solve_all());
        else
            benchmark::DoNotOptimize(EllipticCellSolver(d.medium, p, r).solve_all());
    }
}
BENCHMARK(BM_CellBlock)->ArgsProduct({{0, 1}, {1, 2, 3}})->Unit(benchmark::kMillisecond);

static void BM_FineSolve(benchmark::State& state)
{
    const ExperimentConfig c = bench_config(static_cast<int>(state.range(0)), 2, Formulation::mixed);
    const CaseData d = build_case(c);
    for (auto _ : state)
        benchmark::DoNotOptimize(solve_reference(d, c));
    state.SetLabel(std::to_string(d.medium.grid.nx) + "^2 cells");
}
BENCHMARK(BM_FineSolve)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

static void BM_CoarseSolve(benchmark::State& state)
{
    const ExperimentConfig c = bench_config(10, 2, Formulation::mixed);
    const CaseData d = build_case(c);
    const CoarsePartition p(d.medium.grid, c.M);
    const auto coeffs = upscale(d, p, c);
    for (auto _ : state)
        benchmark::DoNotOptimize(solve_coarse(coeffs, c.M, c));
}
BENCHMARK(BM_CoarseSolve)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

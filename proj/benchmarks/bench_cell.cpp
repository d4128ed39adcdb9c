#include "wgspec/homogenization.hpp"

#include <benchmark/benchmark.h>

using namespace wgspec;

// all 26 corrector solves (one factorization, shared by every right side)
static void BM_CellProblems(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    Mesh cell = cell_mesh(n, ElementOrder::P2);
    const ScalarField a = [](const Vec2& y) {
        return 2.0 + std::cos(2 * M_PI * y[0]) * std::sin(2 * M_PI * y[1]);
    };
    for (auto _ : state) {
        CellCorrectors cc = solve_cell_problems(cell, a);
        HomogenizedTensors t = compute_tensors(cc, a);
        benchmark::DoNotOptimize(t.abar);
    }
}
BENCHMARK(BM_CellProblems)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

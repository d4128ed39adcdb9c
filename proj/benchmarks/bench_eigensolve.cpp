#include "wgspec/eigensolve.hpp"
#include "wgspec/fem.hpp"

#include <benchmark/benchmark.h>

using namespace wgspec;

static void BM_ShiftInvertLanczos(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    Mesh mesh = unit_square_mesh(n, ElementOrder::P2);
    const ScalarField one = [](const Vec2&) { return 1.0; };
    AssembledOperator op = assemble_operator(mesh, one, one, true);
    for (auto _ : state) {
        Spectrum spec = smallest_eigenpairs(op.K, op.M, 3);
        benchmark::DoNotOptimize(spec.eigenvalues);
    }
}
BENCHMARK(BM_ShiftInvertLanczos)->Arg(32)->Arg(64)->Arg(96)->Unit(benchmark::kMillisecond);

static void BM_SturmLiouville(benchmark::State& state) {
    const int cells = static_cast<int>(state.range(0));
    for (auto _ : state) {
        Spectrum1D sl =
            solve_sturm_liouville(1.0, [](double s) { return -0.25 * std::sin(s); }, 1.0, 6, cells);
        benchmark::DoNotOptimize(sl.eigenvalues);
    }
}
BENCHMARK(BM_SturmLiouville)->Arg(1024)->Arg(2048)->Unit(benchmark::kMillisecond);

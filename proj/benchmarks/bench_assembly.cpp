#include "wgspec/fem.hpp"

#include <benchmark/benchmark.h>

using namespace wgspec;

namespace {
const ScalarField a = [](const Vec2& x) { return 2.0 + x[0] * x[1]; };
const ScalarField one = [](const Vec2&) { return 1.0; };
} // namespace

static void BM_AssembleP2(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    Mesh mesh = unit_square_mesh(n, ElementOrder::P2);
    for (auto _ : state) {
        AssembledOperator op = assemble_operator(mesh, a, one, true);
        benchmark::DoNotOptimize(op.K);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(mesh.tris.size()));
}
BENCHMARK(BM_AssembleP2)->Arg(32)->Arg(64)->Arg(128);

static void BM_HessianRecovery(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    Mesh mesh = unit_square_mesh(n, ElementOrder::P2);
    Eigen::VectorXd coeffs(mesh.nodes.size());
    for (size_t i = 0; i < mesh.nodes.size(); ++i)
        coeffs[(Eigen::Index)i] = std::sin(3 * mesh.nodes[i][0]) * mesh.nodes[i][1];
    FemField field(mesh, coeffs);
    for (auto _ : state) {
        HessianField hf = recover_hessian(field);
        benchmark::DoNotOptimize(hf.h11);
    }
}
BENCHMARK(BM_HessianRecovery)->Arg(64)->Arg(96);

#include <benchmark/benchmark.h>

#include <cmath>

#include "ssc/bench.hpp"
#include "ssc/cifs.hpp"
#include "ssc/expr.hpp"
#include "ssc/filippov.hpp"
#include "ssc/oracle.hpp"

namespace {

void BM_ExprEval(benchmark::State& state) {
    const ssc::Expr e = ssc::parse_expr("a*x - b*y + (u1 - nu*x)*tanh(k*z)",
                                        {{"a", 0.1}, {"b", 1.0}, {"u1", 0.3}, {"nu", 1.0}, {"k", 40.0}});
    ssc::Vec3 u{0.3, -0.2, 0.01};
    for (auto _ : state) {
        benchmark::DoNotOptimize(e(u));
        u[2] += 1e-12;
    }
}
BENCHMARK(BM_ExprEval);

void BM_LieDerivative(benchmark::State& state) {
    const ssc::FilippovSystem Z = ssc::make_ssc_bench({});
    const ssc::Vec3 u{0.4, 0.1, 0.0};
    for (auto _ : state) benchmark::DoNotOptimize(ssc::lie_derivative(Z.X, Z.g, u));
}
BENCHMARK(BM_LieDerivative);

void BM_FlowToManifold(benchmark::State& state) {
    const ssc::FilippovSystem Z = ssc::make_ssc_bench({});
    ssc::IntegratorOptions opt;
    opt.record = false;
    for (auto _ : state)
        benchmark::DoNotOptimize(ssc::flow_to_manifold(Z.X, Z.g, {1.0, 0.001, 0.0}, 100.0, opt, Z.domain));
}
BENCHMARK(BM_FlowToManifold)->Unit(benchmark::kMicrosecond);

void BM_PressureRoot(benchmark::State& state) {
    const ssc::IfsSystem sys = ssc::make_geometric_model(1.0, 4.0, 1, static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(ssc::pressure_root(sys));
}
BENCHMARK(BM_PressureRoot)->Arg(10)->Arg(40);

void BM_AttractorLevels(benchmark::State& state) {
    const ssc::IfsSystem sys = ssc::make_middle_thirds();
    const int depth = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(ssc::attractor_levels(sys, depth));
    state.SetItemsProcessed(state.iterations() * (std::int64_t{1} << depth));
}
BENCHMARK(BM_AttractorLevels)->Arg(8)->Arg(14)->Unit(benchmark::kMillisecond);

void BM_BoxCounting(benchmark::State& state) {
    const ssc::PointSample s = ssc::sample_word_images(ssc::make_middle_thirds(), 1e-7);
    for (auto _ : state) benchmark::DoNotOptimize(ssc::box_counting(s));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(s.points.size()));
}
BENCHMARK(BM_BoxCounting)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

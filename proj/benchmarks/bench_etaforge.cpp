#include "etaforge/bcyl.hpp"
#include "etaforge/eta.hpp"
#include "etaforge/funcalc.hpp"
#include "etaforge/heatflow.hpp"
#include "etaforge/opmodel.hpp"
#include "etaforge/symtrace.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace etaforge;

EquivariantModel trivial_model(int n) {
    return build_group_model({Matrix::Identity(n, n)}, 0);
}

Matrix seeded_hermitian(int n, std::uint64_t seed) {
    Rng rng(seed);
    return random_hermitian(rng, n);
}

void BM_EtaQuadrature(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const EquivariantModel model = trivial_model(n);
    const Matrix d = seeded_hermitian(n, 41);
    for (auto _ : state) {
        EtaReport rep = eta_quadrature(d, model);
        benchmark::DoNotOptimize(rep.value);
    }
}
BENCHMARK(BM_EtaQuadrature)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_ContourHeat(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const Matrix d = seeded_hermitian(n, 42);
    const Matrix d2 = d * d + 0.1 * Matrix::Identity(n, n);
    for (auto _ : state) {
        Matrix h = contour_heat(d2, 1.0);
        benchmark::DoNotOptimize(h.data());
    }
}
BENCHMARK(BM_ContourHeat)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_VolterraHeat(benchmark::State& state) {
    const int n = 8;
    const Matrix d = seeded_hermitian(n, 43);
    const Matrix d2 = d * d;
    const Matrix a = 0.5 * seeded_hermitian(n, 44);
    const auto route = state.range(0) == 0 ? VolterraRoute::DividedDifference
                                           : VolterraRoute::Duhamel;
    for (auto _ : state) {
        VolterraResult res = volterra_heat(d2, a, 1.0, 1e-10, route);
        benchmark::DoNotOptimize(res.value.data());
    }
}
BENCHMARK(BM_VolterraHeat)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

IndicialData bench_indicial(const EquivariantModel& model, const Matrix& d,
                            const Matrix& c) {
    return make_indicial(d, c, make_profile(1.0), model);
}

void BM_RtFamily(benchmark::State& state) {
    const EquivariantModel model = trivial_model(2);
    Matrix d(2, 2), c(2, 2);
    d << 1.0, 0.0, 0.0, -1.3;
    c << 0.3, 0.0, 0.0, 0.2;
    const IndicialData ind = bench_indicial(model, d, c);
    for (auto _ : state) {
        RtFamily fam = rt_family(ind, 0.7, 0.4);
        benchmark::DoNotOptimize(fam.r.data());
    }
}
BENCHMARK(BM_RtFamily)->Unit(benchmark::kMicrosecond);

void BM_EqfeNode(benchmark::State& state) {
    const EquivariantModel model = trivial_model(2);
    Matrix d(2, 2), c(2, 2);
    d << 1.0, 0.0, 0.0, -1.3;
    c << 0.3, 0.0, 0.0, 0.2;
    const IndicialData ind = bench_indicial(model, d, c);
    for (auto _ : state) {
        EqfeResult res = eqfe_check(ind, model, 0.9, 0.5);
        benchmark::DoNotOptimize(res.residual);
    }
}
BENCHMARK(BM_EqfeNode)->Unit(benchmark::kMicrosecond);

void BM_CocycleIntegral(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const EquivariantModel model = trivial_model(1);
    const Matrix d = Matrix::Identity(1, 1);
    const Matrix c = 0.3 * Matrix::Identity(1, 1);
    const IndicialData ind = bench_indicial(model, d, c);
    Grid2D grid;
    grid.n_t = n;
    grid.n_lambda = n;
    for (auto _ : state) {
        Complex val = eta_cocycle_integral(ind, model, grid);
        benchmark::DoNotOptimize(val);
    }
}
BENCHMARK(BM_CocycleIntegral)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_SymbolicEqfe(benchmark::State& state) {
    for (auto _ : state) {
        sym::TraceExpr residual = sym::verify_eqfe();
        benchmark::DoNotOptimize(residual);
    }
}
BENCHMARK(BM_SymbolicEqfe)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();

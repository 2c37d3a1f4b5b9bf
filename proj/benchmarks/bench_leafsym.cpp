#include <benchmark/benchmark.h>

#include "leafsym/endperiodic.hpp"
#include "leafsym/milnor.hpp"
#include "leafsym/nil.hpp"
#include "leafsym/symplectic.hpp"

using namespace leafsym;

namespace {

void BM_KTExteriorDerivative(benchmark::State& state) {
  const auto k = make_kt_chart(-3);
  const auto beta = kt_symplectic_form(k, 10.0, 0.05);
  const Point p{0.3, 0.7, 1.1, 2.3};
  for (auto _ : state) {
    const auto d = exterior_derivative(beta);
    benchmark::DoNotOptimize(max_abs_coefficient(d, p));
  }
}
BENCHMARK(BM_KTExteriorDerivative);

void BM_KTInvarianceCheck(benchmark::State& state) {
  const auto k = make_kt_chart(-3);
  const auto beta = kt_symplectic_form(k, 10.0, 0.05);
  for (auto _ : state) {
    benchmark::DoNotOptimize(kt_invariance_check(k, beta, state.range(0), 1).measured);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_KTInvarianceCheck)->Arg(100)->Arg(1000);

void BM_NewtonProjection(benchmark::State& state) {
  const auto f = polynomial_by_name("E6");
  const auto pts = sample_link(f, 64, 3);
  std::size_t i = 0;
  for (auto _ : state) {
    const auto q = weighted_scale(f, 1.7, pts[i++ % pts.size()]);
    benchmark::DoNotOptimize(newton_project_to_fiber(f, q, Cx<double>(1.0)));
  }
}
BENCHMARK(BM_NewtonProjection);

void BM_RegularityCheck(benchmark::State& state) {
  const auto f = polynomial_by_name(state.range(0) == 6 ? "E6" : state.range(0) == 7 ? "E7" : "E8");
  for (auto _ : state) {
    benchmark::DoNotOptimize(milnor_regularity_check(f, {}, 1000, 1).measured);
  }
}
BENCHMARK(BM_RegularityCheck)->Arg(6)->Arg(7)->Arg(8);

void BM_LiouvilleFlow(benchmark::State& state) {
  const auto f = polynomial_by_name("E6");
  const auto start = sample_level_set(f, 4.0, 1, 1).front();
  SymplectizationOptions o;
  for (auto _ : state) {
    benchmark::DoNotOptimize(liouville_flow(f, start, {}, 1.0, o).end);
  }
}
BENCHMARK(BM_LiouvilleFlow)->Unit(benchmark::kMillisecond);

void BM_VolumeIdentity(benchmark::State& state) {
  const auto kt = make_kt_chart(-9);
  const auto pair = build_cutoffs(0.05, {0, 1, 2, 3}, -9);
  const auto beta = end_form(pair, kt);
  for (auto _ : state) {
    benchmark::DoNotOptimize(volume_identity_check(pair, kt, beta, state.range(0), 1).measured);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_VolumeIdentity)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_BuildCutoffs(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(build_cutoffs(0.05, {0, 1, 2, 3}, -9).lambda);
}
BENCHMARK(BM_BuildCutoffs)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

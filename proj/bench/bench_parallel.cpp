// Serial reference against the OpenMP path for the two parallel kernels.
//
//   build/bench/vofc_bench --benchmark_filter=Tabulate

#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "vofc/fracops.hpp"
#include "vofc/parallel.hpp"

using namespace vofc::fracops;
using vofc::parallel::Execution;

namespace {

const Interval unit(0.0, 1.0);

CombinedSpec varorder() {
  return CombinedSpec(OrderField(unit, [](double t, double tau) { return 0.5 + 0.2 * t * tau; }, "0.5 + 0.2*t*tau"),
                      OrderField(unit, [](double, double tau) { return 0.6 - 0.1 * tau; }, "0.6 - 0.1*tau"), 0.5,
                      0.5);
}

QuadratureConfig with_nodes(int n) {
  QuadratureConfig q;
  q.nodes = n;
  return q;
}

template <Execution E>
void Tabulate(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto spec = varorder();
  const auto q = with_nodes(n);
  const auto x = Trajectory::closed_form(unit, [](double t) { return std::sin(3 * t); },
                                         [](double t) { return 3 * std::cos(3 * t); });
  const auto points = grid_nodes(unit, n);
  for (auto _ : state) {
    auto out = vofc::parallel::tabulate(points, [&](double t) { return combined_caputo(x, spec, t, q); }, E);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetComplexityN(n);
  state.counters["threads"] = E == Execution::serial ? 1 : vofc::parallel::max_threads();
}

template <Execution E>
void CaputoMatrix(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto spec = varorder();
  const auto q = with_nodes(n);
  for (auto _ : state) {
    auto m = vofc::parallel::combined_caputo_matrix(spec, q, E);
    benchmark::DoNotOptimize(m.row(0).data());
  }
  state.counters["threads"] = E == Execution::serial ? 1 : vofc::parallel::max_threads();
}

}  // namespace

BENCHMARK(Tabulate<Execution::serial>)->RangeMultiplier(2)->Range(256, 2048)->Unit(benchmark::kMillisecond);
BENCHMARK(Tabulate<Execution::parallel>)->RangeMultiplier(2)->Range(256, 2048)->Unit(benchmark::kMillisecond);
BENCHMARK(CaputoMatrix<Execution::serial>)->RangeMultiplier(2)->Range(64, 512)->Unit(benchmark::kMillisecond);
BENCHMARK(CaputoMatrix<Execution::parallel>)->RangeMultiplier(2)->Range(64, 512)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();

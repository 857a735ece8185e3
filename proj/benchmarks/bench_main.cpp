#include <benchmark/benchmark.h>

#include "mppchaos/chaos.hpp"
#include "mppchaos/functional.hpp"
#include "mppchaos/integral.hpp"
#include "mppchaos/oracle.hpp"
#include "mppchaos/path.hpp"

namespace {

using namespace mppchaos;

Model poisson_model() {
  ModelSpec spec;
  spec.marks = MarkSpace::cyclic(1);
  spec.kind = MarkedPoisson{2.0, {1.0}};
  spec.representation = Representation::JumpIncrement;
  return validate_model(spec);
}

Model ctmc_model() {
  ModelSpec spec;
  spec.marks = MarkSpace::cyclic(2);
  spec.kind = Ctmc{{{-1.0, 1.0}, {2.0, -2.0}}, 0};
  spec.representation = Representation::JumpIncrement;
  return validate_model(spec);
}

void BM_SamplePaths(benchmark::State& state) {
  const auto model = ctmc_model();
  for (auto _ : state) benchmark::DoNotOptimize(sample_paths(model, 1, static_cast<std::size_t>(state.range(0))));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SamplePaths)->Arg(1000)->Arg(10000);

void BM_MeasureNodes(benchmark::State& state) {
  const auto model = ctmc_model();
  const ReferenceMeasure ref(model, {});
  const auto paths = sample_paths(model, 2, 256);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(measure_nodes(model, ref, paths[i++ % paths.size()], {static_cast<int>(state.range(0))}));
  }
}
BENCHMARK(BM_MeasureNodes)->Arg(8)->Arg(16)->Arg(32);

void BM_Features(benchmark::State& state) {
  const auto model = ctmc_model();
  const ReferenceMeasure ref(model, {});
  const auto paths = sample_paths(model, 3, 1000);
  const auto basis = build_basis(static_cast<int>(state.range(0)), 1, 2, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_features(model, ref, paths, basis));
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_Features)->Arg(1)->Arg(2)->Arg(3);

void BM_IteratedJRecursive(benchmark::State& state) {
  const auto model = poisson_model();
  const auto paths = sample_paths(model, 4, 64);
  const auto g = Integrand::constant(1.0, static_cast<int>(state.range(0)));
  std::vector<MeasureNodes> nodes;
  for (const auto& p : paths) nodes.push_back(measure_nodes(model, ZetaSpec{}, p));
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(iterated_J_recursive(nodes[i++ % nodes.size()], 2, g));
}
BENCHMARK(BM_IteratedJRecursive)->Arg(2);

void BM_OracleJumpLaw(benchmark::State& state) {
  const auto model = ctmc_model();
  OracleConfig cfg;
  cfg.quad_nodes = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(oracle_expectation(model, count_functional(), cfg));
}
BENCHMARK(BM_OracleJumpLaw)->Arg(16)->Arg(32)->Arg(64);

void BM_ChaosTail(benchmark::State& state) {
  const auto model = ctmc_model();
  const auto basis = build_basis(3, static_cast<int>(state.range(0)), 2, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(chaos_tail(model, {}, terminal_state_functional(0), basis));
}
BENCHMARK(BM_ChaosTail)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

#include <benchmark/benchmark.h>

#include <memory>

#include "elicit/harness/experiment.hpp"
#include "elicit/methods.hpp"

namespace elicit {
namespace {

const harness::Experiment& experiment() {
  static const auto exp = harness::prepare_experiment(
      {TaskSpec{}, SplitPlan{}, WeakAnnotatorSpec::preset("q70"), 0});
  return *exp;
}

void BM_GenerateTask(benchmark::State& state) {
  TaskSpec spec;
  spec.pool_size = static_cast<std::size_t>(state.range(0));
  spec.test_size = spec.pool_size / 4;
  for (auto _ : state) benchmark::DoNotOptimize(generate_task(spec));
}
BENCHMARK(BM_GenerateTask)->Arg(2000)->Arg(8000)->Unit(benchmark::kMillisecond);

// One seq_sft run per iteration; arg 0 is the budget, arg 1 is rho in percent.
void BM_SeqSft(benchmark::State& state) {
  const Environment env = experiment().environment(CostModel{}, LearnerConfig{});
  Allocation alloc;
  alloc.budget = Currency::from_units(static_cast<double>(state.range(0)));
  alloc.weak_spend_fraction = static_cast<double>(state.range(1)) / 100.0;
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_seq_sft(alloc, env, {seed, seed + 1}));
    ++seed;
  }
}
BENCHMARK(BM_SeqSft)
    ->Args({17, 100})
    ->Args({193, 50})
    ->Args({513, 0})
    ->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace elicit

BENCHMARK_MAIN();

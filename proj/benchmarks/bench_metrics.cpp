#include <benchmark/benchmark.h>

#include <vector>

#include "elicit/econ.hpp"
#include "elicit/learner.hpp"
#include "elicit/methods.hpp"
#include "elicit/rng.hpp"

namespace elicit {
namespace {

void BM_Auroc(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  std::vector<double> scores(n);
  std::vector<std::uint8_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    scores[i] = rng.uniform();
    labels[i] = static_cast<std::uint8_t>(i % 2);
  }
  for (auto _ : state) benchmark::DoNotOptimize(auroc(scores, labels));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Auroc)->RangeMultiplier(4)->Range(64, 65536)->Complexity(benchmark::oNLogN);

void BM_ParetoFrontier(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(2);
  std::vector<ParetoPoint> pts;
  for (std::size_t i = 0; i < n; ++i) {
    pts.push_back({rng.uniform(1.0, 5000.0), rng.uniform(0.5, 0.9), Provenance{"m", 0.5, {}}});
  }
  for (auto _ : state) benchmark::DoNotOptimize(pareto_frontier(pts));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ParetoFrontier)->RangeMultiplier(4)->Range(16, 16384)->Complexity(benchmark::oNLogN);

void BM_EntropySelect(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(3);
  std::vector<double> p(n);
  for (auto& v : p) v = rng.uniform();
  for (auto _ : state) benchmark::DoNotOptimize(entropy_select(p, n / 10));
}
BENCHMARK(BM_EntropySelect)->Arg(1000)->Arg(50000);

void BM_LogConfidenceLoss(benchmark::State& state) {
  Rng rng(4);
  std::vector<double> p(32), t(32);
  for (auto& v : p) v = rng.uniform(0.01, 0.99);
  for (auto& v : t) v = rng.uniform();
  for (auto _ : state) benchmark::DoNotOptimize(log_confidence_loss(p, t, 0.5, 8));
}
BENCHMARK(BM_LogConfidenceLoss);

}  // namespace
}  // namespace elicit

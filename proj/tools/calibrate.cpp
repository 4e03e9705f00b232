// Measures the phenomena the simulation has to reproduce (weak-label quality,
// regime shape, method gains) for a given set of simulation knobs.
#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "elicit/econ.hpp"
#include "elicit/harness/experiment.hpp"
#include "elicit/methods.hpp"

using namespace elicit;

namespace {

struct Knobs {
  harness::ExperimentSetup setup;
  LearnerConfig learner;
  CostModel costs;
  std::vector<double> budgets{65, 257, 1025};
  std::vector<double> rhos{0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99, 1.0};
  std::size_t seeds = 5;
};

std::vector<double> accuracies(const Knobs& k, const Environment& env, const MethodSpec& spec,
                               double budget, double rho) {
  std::vector<double> out;
  for (std::size_t s = 0; s < k.seeds; ++s) {
    Allocation alloc;
    alloc.budget = Currency::from_units(budget);
    alloc.weak_spend_fraction = rho;
    try {
      out.push_back(run_method(spec, alloc, env, harness::SeedPlan::run(k.setup.master_seed, s), s)
                        .result.test_accuracy);
    } catch (const std::exception& e) {
      std::printf("  [%s B=%g rho=%g] %s\n", spec.name().c_str(), budget, rho, e.what());
      return {};
    }
  }
  return out;
}

void regimes(const Knobs& k, const Environment& env, const MethodSpec& spec) {
  for (double b : k.budgets) {
    std::vector<CurvePoint> curve;
    std::printf("B=%-6g", b);
    for (double rho : k.rhos) {
      const auto acc = accuracies(k, env, spec, b, rho);
      if (acc.empty()) continue;
      const Summary s = summarize(acc);
      curve.push_back({rho, s.mean, s.std, s.n});
      std::printf(" %.2f:%.3f±%.3f", rho, s.mean, s.std);
    }
    const Regime r = classify_regime(curve, Currency::from_units(b));
    std::printf("  -> %s rho*=%g\n", std::string(to_string(r.kind)).c_str(), r.optimal_rho);
  }
}

void compare(const Knobs& k, const Environment& env, const MethodSpec& a, const MethodSpec& b,
             double budget, double rho) {
  const auto xa = accuracies(k, env, a, budget, rho);
  const auto xb = accuracies(k, env, b, budget, rho);
  if (xa.empty() || xb.empty()) return;
  std::vector<double> diff;
  for (std::size_t i = 0; i < xa.size(); ++i) diff.push_back(xa[i] - xb[i]);
  const Summary sa = summarize(xa), sb = summarize(xb), sd = summarize(diff);
  std::printf("B=%-6g rho=%-5g %s %.4f  vs  %s %.4f   diff %+.4f ± %.4f\n", budget, rho,
              a.name().c_str(), sa.mean, b.name().c_str(), sb.mean, sd.mean, sd.std);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulation calibration probe"};
  Knobs k;
  std::string experiment = "all";
  std::string preset = "q70";
  double scale = 0.1;
  std::size_t test_size = 2000;
  double fraction = -1, noise = -1, weak_lr = -1;
  std::size_t weak_epochs = 0;
  app.add_option("--experiment", experiment, "weak|regimes|w2s|unc|proto|logconf|all");
  app.add_option("--preset", preset);
  app.add_option("--fraction", fraction, "override visible feature fraction");
  app.add_option("--noise", noise, "override input noise");
  app.add_option("--weak-lr", weak_lr);
  app.add_option("--weak-epochs", weak_epochs);
  app.add_option("--dim", k.setup.task.feature_dim);
  app.add_option("--margin", k.setup.task.concept_margin);
  app.add_option("--repr-noise", k.setup.task.representation_noise);
  app.add_option("--pool", k.setup.task.pool_size);
  app.add_option("--scale", scale);
  app.add_option("--test", test_size);
  app.add_option("--lr", k.learner.schedule.learning_rate);
  app.add_option("--steps", k.learner.schedule.total_steps);
  app.add_option("--init-std", k.learner.init_std);
  app.add_option("--proto-norm", k.learner.proto_init_norm);
  app.add_option("--min-delta", k.learner.stopping.min_delta);
  app.add_option("--budgets", k.budgets);
  app.add_option("--rhos", k.rhos);
  app.add_option("--seeds", k.seeds);
  app.add_option("--master-seed", k.setup.master_seed);
  CLI11_PARSE(app, argc, argv);

  k.setup.weak = WeakAnnotatorSpec::preset(preset);
  if (fraction > 0) k.setup.weak.visible_feature_fraction = fraction;
  if (noise >= 0) k.setup.weak.input_noise = noise;
  if (weak_lr > 0) k.setup.weak.learning_rate = weak_lr;
  if (weak_epochs > 0) k.setup.weak.train_epochs = weak_epochs;
  k.setup.split = SplitPlan::scaled(scale, test_size);
  k.setup.task.test_size = test_size;
  k.setup.task.pool_size = std::max(k.setup.task.pool_size, k.setup.split.candidate_pool_size + test_size);

  std::setvbuf(stdout, nullptr, _IOLBF, 0);
  const auto t0 = std::chrono::steady_clock::now();
  const auto exp = harness::prepare_experiment(k.setup);
  const Environment env = exp->environment(k.costs, k.learner);
  std::printf("weak accuracy %.4f  (candidates %zu)\n", exp->weak_accuracy, env.candidate.size());

  MethodSpec seq;
  MethodSpec unc{MethodKind::unc_sampling_seq_sft};
  MethodSpec proto{MethodKind::proto_seq_sft};
  MethodSpec logconf{MethodKind::logconf_seq_sft};
  const bool all = experiment == "all";
  if (all || experiment == "regimes") regimes(k, env, seq);
  if (all || experiment == "w2s") {
    const auto acc = accuracies(k, env, seq, 0.1 * static_cast<double>(env.candidate.size() - 10), 1.0);
    const auto t = one_sided_t_test(acc, exp->weak_accuracy + 0.02);
    std::printf("w2s: mean %.4f vs weak %.4f  t=%.2f p=%.4f\n", summarize(acc).mean,
                exp->weak_accuracy, t.t, t.p_value);
  }
  if (all || experiment == "unc") {
    for (double b : k.budgets)
      for (double rho : k.rhos) compare(k, env, unc, seq, b, rho);
  }
  if (all || experiment == "proto") {
    for (double b : k.budgets)
      for (double rho : k.rhos) compare(k, env, proto, seq, b, rho);
  }
  if (all || experiment == "logconf") {
    for (double b : k.budgets) compare(k, env, logconf, seq, b, 1.0);
  }
  if (experiment == "fewshot") {
    for (std::size_t kk : {2, 4, 8, 16}) {
      MethodSpec few{MethodKind::fewshot_proto};
      few.fewshot_k = kk;
      const auto weak_acc = accuracies(k, env, few, 0.1 * static_cast<double>(kk), 1.0);
      const auto hq_acc = accuracies(k, env, few, static_cast<double>(kk), 0.0);
      std::printf("k=%zu weak-labeled %.4f  clean %.4f\n", kk, summarize(weak_acc).mean,
                  summarize(hq_acc).mean);
    }
  }
  if (experiment == "grid-mean") {
    for (const MethodSpec* spec : {&seq, &proto}) {
      double total = 0.0;
      std::size_t cells = 0;
      for (double b : k.budgets) {
        for (double rho : k.rhos) {
          const auto acc = accuracies(k, env, *spec, b, rho);
          if (acc.empty()) continue;
          total += summarize(acc).mean;
          ++cells;
        }
      }
      std::printf("%s grid mean %.4f over %zu cells\n", spec->name().c_str(), total / cells, cells);
    }
  }
  std::printf("elapsed %.1fs\n",
              std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  return 0;
}

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "elicit/error.hpp"
#include "elicit/learner.hpp"
#include "elicit/rng.hpp"
#include "fixtures.hpp"

namespace elicit {
namespace {

double brute_auroc(const std::vector<double>& s, const std::vector<std::uint8_t>& y) {
  double wins = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (y[i] != 1) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j] != 0) continue;
      pairs += 1.0;
      wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
    }
  }
  return wins / pairs;
}

TEST(Auroc, Examples) {
  EXPECT_EQ(auroc(std::vector<double>{0.9, 0.1}, std::vector<std::uint8_t>{1, 0}), 1.0);
  EXPECT_EQ(auroc(std::vector<double>{0.3, 0.3, 0.3}, std::vector<std::uint8_t>{1, 0, 1}), 0.5);
  EXPECT_EQ(auroc(std::vector<double>{0.8, 0.6, 0.6, 0.1}, std::vector<std::uint8_t>{1, 0, 1, 0}),
            0.875);
}

TEST(Auroc, MatchesPairwiseBruteForceWithTies) {
  Rng rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.below(80);
    std::vector<double> s(n);
    std::vector<std::uint8_t> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(rng.below(6)) / 5.0;  // coarse grid forces ties
      y[i] = static_cast<std::uint8_t>(rng.below(2));
    }
    y[0] = 0;
    y[1] = 1;
    EXPECT_DOUBLE_EQ(auroc(s, y), brute_auroc(s, y));
  }
}

TEST(Auroc, SingleClassIsUndefined) {
  EXPECT_THROW(auroc(std::vector<double>{0.1, 0.2}, std::vector<std::uint8_t>{1, 1}),
               UndefinedMetricError);
  EXPECT_THROW(auroc(std::vector<double>{}, std::vector<std::uint8_t>{}), UndefinedMetricError);
}

TEST(CrossEntropySoft, Examples) {
  EXPECT_NEAR(cross_entropy_soft(1.0, 1.0), 0.0, 1e-6);
  EXPECT_NEAR(cross_entropy_soft(0.0, 0.0), 0.0, 1e-6);
  for (double t : {0.0, 0.3, 1.0}) EXPECT_NEAR(cross_entropy_soft(0.5, t), std::numbers::ln2, 1e-12);
  EXPECT_TRUE(std::isfinite(cross_entropy_soft(0.0, 1.0)));
  EXPECT_NEAR(cross_entropy_soft(0.0, 1.0), -std::log(kProbabilityEpsilon), 1e-9);
}

double rel_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-12});
}

TEST(CrossEntropySoft, LogitGradientMatchesFiniteDifferences) {
  Rng rng(41);
  const double h = 1e-5;
  for (int i = 0; i < 100; ++i) {
    const double z = rng.uniform(-4.0, 4.0);
    const double t = rng.uniform();
    const double fd = (cross_entropy_soft(sigmoid(z + h), t) - cross_entropy_soft(sigmoid(z - h), t)) /
                      (2.0 * h);
    EXPECT_LE(rel_error(cross_entropy_soft_logit_grad(z, t), fd), 1e-4) << z << " " << t;
    EXPECT_DOUBLE_EQ(cross_entropy_soft_logit_grad(z, t), sigmoid(z) - t);
  }
}

TEST(LogConfidenceLoss, AlphaZeroIsCrossEntropy) {
  const std::vector<double> p{0.1, 0.7, 0.4, 0.9, 0.55};
  const std::vector<double> t{0.0, 0.8, 0.5, 1.0, 0.2};
  const auto lc = log_confidence_loss(p, t, 0.0, 8);
  double ce = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) ce += cross_entropy_soft(p[i], t[i]);
  EXPECT_NEAR(lc.loss, ce / 5.0, 1e-15);
}

TEST(LogConfidenceLoss, MedianThresholdOfEightProbabilities) {
  const std::vector<double> p{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8};
  const std::vector<double> t(8, 0.5);
  const auto lc = log_confidence_loss(p, t, 0.5, 8);
  ASSERT_EQ(lc.thresholds.size(), 1u);
  EXPECT_DOUBLE_EQ(lc.thresholds[0], 0.45);
  EXPECT_EQ(lc.hardened, (std::vector<std::uint8_t>{0, 0, 0, 0, 1, 1, 1, 1}));
}

TEST(LogConfidenceLoss, OneThresholdPerChunk) {
  Rng rng(5);
  std::vector<double> p(20), t(20);
  for (auto& v : p) v = rng.uniform(0.05, 0.95);
  for (auto& v : t) v = rng.uniform();
  const auto lc = log_confidence_loss(p, t, 0.3, 8);
  ASSERT_EQ(lc.thresholds.size(), 3u);
  for (std::size_t c = 0; c < 3; ++c) {
    const std::size_t lo = c * 8, hi = std::min<std::size_t>(20, lo + 8);
    EXPECT_DOUBLE_EQ(lc.thresholds[c],
                     median(std::span<const double>(p).subspan(lo, hi - lo)));
  }
}

TEST(LogConfidenceLoss, FullAlphaAtSaturationVanishes) {
  const double lo = kProbabilityEpsilon, hi = 1.0 - kProbabilityEpsilon;
  const std::vector<double> p{lo, lo, hi, hi};
  const std::vector<double> t{1.0, 0.0, 0.0, 1.0};
  EXPECT_NEAR(log_confidence_loss(p, t, 1.0, 8).loss, 0.0, 1e-6);
}

double logconf_of_logits(const std::vector<double>& z, const std::vector<double>& t, double alpha,
                         const std::vector<std::uint8_t>& hardened) {
  // Loss with the hardened labels held fixed, written out independently.
  double total = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double p = 1.0 / (1.0 + std::exp(-z[i]));
    total += (1.0 - alpha) * -(t[i] * std::log(p) + (1.0 - t[i]) * std::log(1.0 - p)) +
             alpha * -(hardened[i] * std::log(p) + (1.0 - hardened[i]) * std::log(1.0 - p));
  }
  return total / static_cast<double>(z.size());
}

TEST(LogConfidenceLoss, LogitGradientsMatchFiniteDifferences) {
  Rng rng(43);
  const double h = 1e-5;
  for (int point = 0; point < 100; ++point) {
    const std::size_t m = 8;
    std::vector<double> z(m), t(m), p(m);
    for (std::size_t i = 0; i < m; ++i) {
      z[i] = rng.uniform(-4.0, 4.0);
      t[i] = rng.uniform();
      p[i] = sigmoid(z[i]);
    }
    const double alpha = rng.uniform();
    const auto lc = log_confidence_loss(p, t, alpha, m);
    EXPECT_NEAR(lc.loss, logconf_of_logits(z, t, alpha, lc.hardened), 1e-12);
    for (std::size_t i = 0; i < m; ++i) {
      auto up = z, down = z;
      up[i] += h;
      down[i] -= h;
      const double fd = (logconf_of_logits(up, t, alpha, lc.hardened) -
                         logconf_of_logits(down, t, alpha, lc.hardened)) /
                        (2.0 * h);
      EXPECT_LE(rel_error(lc.logit_grads[i], fd), 1e-4);
    }
  }
}

TEST(AccumulateHeadGrad, MatchesFiniteDifferencesOfBatchLoss) {
  Rng rng(44);
  const std::size_t dim = 5;
  std::vector<Example> examples;
  for (std::uint64_t i = 0; i < 6; ++i) {
    std::vector<double> f(dim);
    for (auto& v : f) v = rng.normal();
    examples.push_back({i, 0, f});
  }
  std::vector<LabeledExample> batch;
  for (const auto& e : examples) batch.push_back({&e, rng.uniform()});
  Head head = Head::random(dim, 0.5, 3);
  head.bias = 0.2;
  auto loss = [&](const Head& hd) {
    double s = 0.0;
    for (const auto& b : batch) s += cross_entropy_soft(hd.probability(b.example->features), b.target);
    return s / static_cast<double>(batch.size());
  };
  std::vector<double> lg;
  for (const auto& b : batch) {
    lg.push_back(cross_entropy_soft_logit_grad(head.logit(b.example->features), b.target) /
                 static_cast<double>(batch.size()));
  }
  std::vector<double> grad(dim + 1);
  accumulate_head_grad(batch, lg, grad);
  const double h = 1e-6;
  for (std::size_t k = 0; k <= dim; ++k) {
    Head up = head, down = head;
    if (k < dim) {
      up.weights[k] += h;
      down.weights[k] -= h;
    } else {
      up.bias += h;
      down.bias -= h;
    }
    EXPECT_LE(rel_error(grad[k], (loss(up) - loss(down)) / (2.0 * h)), 1e-4) << k;
  }
}

TEST(Median, OddAndEven) {
  EXPECT_EQ(median(std::vector<double>{3.0, 1.0, 2.0}), 2.0);
  EXPECT_EQ(median(std::vector<double>{4.0, 1.0, 2.0, 3.0}), 2.5);
  EXPECT_THROW(median(std::vector<double>{}), ValidationError);
}

TEST(ScheduleFor, TableExamples) {
  EXPECT_EQ(schedule_for(10), (BatchEpochs{1, 10}));
  EXPECT_EQ(schedule_for(500), (BatchEpochs{1, 3}));
  EXPECT_EQ(schedule_for(5000), (BatchEpochs{8, 2}));
  EXPECT_EQ(schedule_for(3), (BatchEpochs{1, 34}));
  EXPECT_THROW(schedule_for(0), ValidationError);
}

TEST(TrainSchedule, WarmupIsCappedByEpochLength) {
  TrainSchedule s;
  EXPECT_EQ(s.warmup_steps(25), 25u);
  EXPECT_EQ(s.warmup_steps(40), 40u);
  EXPECT_EQ(s.warmup_steps(100), 40u);
}

TEST(CosineLr, Shape) {
  const std::size_t total = 625, warmup = 40;
  const double peak = 1e-3;
  EXPECT_EQ(cosine_lr(0, total, warmup, peak), 0.0);
  EXPECT_NEAR(cosine_lr(20, total, warmup, peak), 0.5 * peak, 1e-15);
  EXPECT_NEAR(cosine_lr(warmup, total, warmup, peak), peak, 1e-15);
  EXPECT_LE(cosine_lr(total, total, warmup, peak), 0.5 * peak);
  for (std::size_t s = 1; s < warmup; ++s) {
    EXPECT_GT(cosine_lr(s, total, warmup, peak), cosine_lr(s - 1, total, warmup, peak));
  }
  for (std::size_t s = warmup + 1; s <= total; ++s) {
    EXPECT_LT(cosine_lr(s, total, warmup, peak), cosine_lr(s - 1, total, warmup, peak));
  }
}

TEST(EarlyStopper, StopsAfterFourNonImprovingEvaluations) {
  EarlyStopper stopper(EarlyStopPolicy{});
  const std::vector<double> seq{0.70, 0.705, 0.703, 0.702, 0.701};
  std::size_t stopped_at = seq.size();
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (stopper.observe(seq[i])) {
      stopped_at = i;
      break;
    }
  }
  EXPECT_EQ(stopped_at, 4u);
  EXPECT_EQ(stopper.best_index(), 1u);
}

TEST(EarlyStopper, ImprovementResetsTheStreak) {
  EarlyStopper stopper(EarlyStopPolicy{});
  for (double v : {0.5, 0.5, 0.5, 0.5, 0.52, 0.52, 0.52, 0.52}) EXPECT_FALSE(stopper.observe(v));
  EXPECT_TRUE(stopper.observe(0.52));
  EXPECT_EQ(stopper.best_index(), 4u);
}

TEST(EarlyStopPolicy, Validation) {
  EarlyStopPolicy p;
  p.patience = 0;
  EXPECT_THROW(p.validate(), ValidationError);
  p = EarlyStopPolicy{};
  p.min_delta = -0.1;
  EXPECT_THROW(p.validate(), ValidationError);
  EXPECT_EQ(EarlyStopPolicy{}.eval_every(13), 13u);
  EXPECT_EQ(EarlyStopPolicy{}.eval_every(200), 50u);
}

struct Clean {
  std::vector<LabeledExample> train, val;
};

Clean clean_labels(const Environment& env, std::size_t n_train, std::size_t n_val,
                   std::size_t offset = 0) {
  Clean c;
  for (std::size_t i = 0; i < n_train + n_val; ++i) {
    const Example* e = &(*env.pool)[env.candidate[offset + i]];
    (i < n_train ? c.train : c.val).push_back({e, static_cast<double>(e->true_label)});
  }
  return c;
}

TEST(TrainStage, FiveHundredCleanLabelsMatchAConvexSolverOnTheSameLabels) {
  // Oracle: exact ridge-logistic fits on the same 400 training labels, ridge
  // picked on the same 100 validation labels. Five disjoint label sets.
  const Environment& env = testing::default_environment();
  const auto& exp = testing::default_experiment();
  for (std::size_t offset = 0; offset < 2500; offset += 500) {
    const Clean c = clean_labels(env, 400, 100, offset);
    const auto res = train_stage(Head::random(exp.pool.feature_dim(), 0.002, 1), c.train, c.val,
                                 TrainSchedule{}, EarlyStopPolicy{}, LossConfig{}, 2);
    const double ours = test_accuracy(res.head, env);

    const std::vector<std::uint64_t> train_ids(env.candidate.begin() + offset,
                                               env.candidate.begin() + offset + 400);
    const std::vector<std::uint64_t> val_ids(env.candidate.begin() + offset + 400,
                                             env.candidate.begin() + offset + 500);
    double best_val = -1.0, oracle = 0.0;
    for (double ridge : {0.1, 1.0, 3.0, 10.0, 30.0, 100.0, 300.0, 1000.0}) {
      const auto w = testing::fit_logistic_newton(exp.pool, train_ids, ridge);
      const double v = testing::linear_accuracy(exp.pool, val_ids, w);
      if (v > best_val) {
        best_val = v;
        oracle = testing::linear_accuracy(exp.pool, env.test, w);
      }
    }
    EXPECT_GE(ours, oracle - 0.02) << "labels " << offset << ".." << offset + 500;
  }
}

TEST(TrainStage, TraceAndRestoredCheckpointAreConsistent) {
  const Environment& env = testing::small_environment();
  const Clean c = clean_labels(env, 160, 40);
  const auto res = train_stage(Head::random(32, 0.002, 1), c.train, c.val, TrainSchedule{},
                               EarlyStopPolicy{}, LossConfig{}, 3);
  ASSERT_FALSE(res.trace.entries.empty());
  const auto best = std::max_element(
      res.trace.entries.begin(), res.trace.entries.end(),
      [](const TraceEntry& a, const TraceEntry& b) { return a.val_auroc < b.val_auroc; });
  EXPECT_EQ(res.trace.best_checkpoint_id, best->checkpoint_id);

  // The returned head scores exactly the best traced AUROC on the validation set.
  std::vector<double> scores;
  std::vector<std::uint8_t> labels;
  for (const auto& v : c.val) {
    scores.push_back(res.head.logit(v.example->features));
    labels.push_back(harden(v.target));
  }
  EXPECT_DOUBLE_EQ(auroc(scores, labels), best->val_auroc);

  std::ostringstream csv;
  write_trace_csv(res.trace, csv);
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')), "step,val_auroc,is_best");
}

TEST(TrainStage, DeterministicGivenSeeds) {
  const Environment& env = testing::small_environment();
  const Clean c = clean_labels(env, 100, 30);
  auto run = [&](std::uint64_t seed) {
    return train_stage(Head::random(32, 0.002, 7), c.train, c.val, TrainSchedule{},
                       EarlyStopPolicy{}, LossConfig{}, seed);
  };
  const auto a = run(1), b = run(1), d = run(2);
  EXPECT_EQ(a.head, b.head);
  EXPECT_EQ(a.trace, b.trace);
  EXPECT_FALSE(a.head == d.head);
}

TEST(TrainStage, DifferentInitsConvergeToSimilarAccuracy) {
  const Environment& env = testing::default_environment();
  const Clean c = clean_labels(env, 1600, 400);
  const Head h1 = Head::random(256, 0.002, 11), h2 = Head::random(256, 0.002, 12);
  EXPECT_FALSE(h1 == h2);
  const auto r1 = train_stage(h1, c.train, c.val, TrainSchedule{}, EarlyStopPolicy{}, LossConfig{}, 5);
  const auto r2 = train_stage(h2, c.train, c.val, TrainSchedule{}, EarlyStopPolicy{}, LossConfig{}, 5);
  EXPECT_NEAR(test_accuracy(r1.head, env), test_accuracy(r2.head, env), 0.02);
}

TEST(TrainStage, OpenAiMimicRunsTheTableScheduleWithoutStopping) {
  const Environment& env = testing::small_environment();
  const Clean c = clean_labels(env, 40, 10);
  TrainSchedule s;
  s.mode = ScheduleMode::openai_mimic;
  const auto res = train_stage(Head::zeros(32), c.train, c.val, s, EarlyStopPolicy{}, LossConfig{}, 1);
  EXPECT_EQ(res.steps_run, 40u * 3u);  // n = 40 -> batch 1, 3 epochs
  EXPECT_FALSE(res.early_stopped);
}

TEST(TrainStage, RejectsUnusableInputs) {
  const Environment& env = testing::small_environment();
  Clean c = clean_labels(env, 20, 10);
  EXPECT_THROW(train_stage(Head::zeros(32), {}, c.val, TrainSchedule{}, EarlyStopPolicy{},
                           LossConfig{}, 1),
               ValidationError);
  EXPECT_THROW(train_stage(Head::zeros(32), c.train, {}, TrainSchedule{}, EarlyStopPolicy{},
                           LossConfig{}, 1),
               UndefinedMetricError);
  for (auto& v : c.val) v.target = 1.0;
  EXPECT_THROW(train_stage(Head::zeros(32), c.train, c.val, TrainSchedule{}, EarlyStopPolicy{},
                           LossConfig{}, 1),
               UndefinedMetricError);
  StageOptions force;
  force.force_full_schedule = true;
  EXPECT_NO_THROW(train_stage(Head::zeros(32), c.train, c.val, TrainSchedule{}, EarlyStopPolicy{},
                              LossConfig{}, 1, force));
}

TEST(AdamOptimizer, FirstStepMovesEachParameterByTheLearningRate) {
  AdamOptimizer adam(3);
  std::vector<double> p{0.0, 1.0, -1.0};
  adam.step(p, std::vector<double>{2.0, -0.5, 1e-3}, 0.1);
  EXPECT_NEAR(p[0], -0.1, 1e-6);
  EXPECT_NEAR(p[1], 1.1, 1e-6);
  EXPECT_NEAR(p[2], -1.1, 1e-4);
}

}  // namespace
}  // namespace elicit

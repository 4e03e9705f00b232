#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "elicit/error.hpp"
#include "elicit/methods.hpp"
#include "elicit/rng.hpp"
#include "fixtures.hpp"

namespace elicit {
namespace {

using testing::default_environment;
using testing::small_environment;

Currency units(double u) { return Currency::from_units(u); }

Allocation alloc_of(double budget, double rho) {
  Allocation a;
  a.budget = units(budget);
  a.weak_spend_fraction = rho;
  return a;
}

RunSeeds seeds_of(std::uint64_t s) {
  return {derive_seed(11, "data", s), derive_seed(11, "init", s)};
}

std::vector<std::uint64_t> permutation(const Environment& env, std::uint64_t data_seed) {
  std::vector<std::uint64_t> perm = env.candidate;
  Rng rng(derive_seed(data_seed, "candidate_order"));
  rng.shuffle(std::span<std::uint64_t>(perm));
  return perm;
}

std::vector<LabeledExample> labeled(const Environment& env, std::span<const std::uint64_t> ids,
                                    bool weak) {
  std::vector<LabeledExample> out;
  for (auto id : ids) {
    out.push_back({&(*env.pool)[id], weak ? env.weak_soft[id]
                                          : static_cast<double>((*env.pool)[id].true_label)});
  }
  return out;
}

bool has_both_classes(std::span<const LabeledExample> set) {
  std::size_t pos = 0;
  for (const auto& e : set) pos += harden(e.target);
  return pos > 0 && pos < set.size();
}

double sorted_median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// --- allocation -----------------------------------------------------------

TEST(Allocation, CountsExamples) {
  const CostModel costs;
  auto c = alloc_of(17, 0.5).counts(costs);
  EXPECT_EQ(c.n_weak, 85u);
  EXPECT_EQ(c.n_hq, 8u);
  c = alloc_of(193, 0.25).counts(costs);
  EXPECT_EQ(c.n_weak, 482u);
  EXPECT_EQ(c.n_hq, 144u);
  c = alloc_of(5, 0.1).counts(costs);
  EXPECT_EQ(c.n_weak, 5u);
  EXPECT_EQ(c.n_hq, 4u);
  c = alloc_of(64, 1.0).counts(costs);
  EXPECT_EQ(c.n_weak, 640u);
  EXPECT_EQ(c.n_hq, 0u);
}

TEST(Allocation, CountsNeverOverspendAndLeaveLessThanOneLabel) {
  Rng rng(5);
  const CostModel costs{units(0.37), units(1.3)};
  for (int i = 0; i < 2000; ++i) {
    Allocation a;
    a.budget = Currency::from_micros(1 + static_cast<std::int64_t>(rng.below(5'000'000'000)));
    a.weak_spend_fraction = rng.uniform();
    const auto c = a.counts(costs);
    const Currency spent = label_cost(c.n_weak, c.n_hq, costs);
    ASSERT_LE(spent, a.budget);
    ASSERT_LT((a.budget - spent).micros(), (costs.weak_cost + costs.hq_cost).micros());
  }
}

TEST(Allocation, ValSize) {
  const Allocation a;
  EXPECT_EQ(a.val_size(5), 4u);
  EXPECT_EQ(a.val_size(22), 4u);
  EXPECT_EQ(a.val_size(23), 5u);
  EXPECT_EQ(a.val_size(100), 20u);
  EXPECT_EQ(a.min_stage_size(), 5u);
}

TEST(Allocation, Validate) {
  const CostModel costs;
  EXPECT_THROW(alloc_of(0, 0.5).validate(costs), ValidationError);
  EXPECT_THROW(alloc_of(10, 1.5).validate(costs), ValidationError);
  EXPECT_THROW(alloc_of(0.05, 0.5).validate(costs), ValidationError);
  EXPECT_NO_THROW(alloc_of(10, 0.5).validate(costs));
}

// --- entropy selection ----------------------------------------------------

TEST(EntropySelect, Examples) {
  const std::vector<double> p{0.9, 0.55, 0.2};
  EXPECT_EQ(entropy_select(p, 1), (std::vector<std::size_t>{1}));
  const std::vector<double> flat{0.3, 0.3, 0.3};
  EXPECT_EQ(entropy_select(flat, 2), (std::vector<std::size_t>{0, 1}));
  EXPECT_TRUE(entropy_select(p, 0).empty());
  EXPECT_THROW(entropy_select(p, 4), ValidationError);
}

TEST(EntropySelect, MatchesBinaryEntropyRanking) {
  Rng rng(8);
  auto entropy = [](double p) {
    p = std::min(p, 1.0 - p);
    if (p <= 0.0) return 0.0;
    return -p * std::log(p) - (1 - p) * std::log(1 - p);
  };
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> p(50);
    // Coarse dyadic grid: ties are common and p, 1 - p are exact.
    for (auto& v : p) v = static_cast<double>(rng.below(17)) / 16.0;
    std::vector<std::size_t> order(p.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return entropy(p[a]) > entropy(p[b]); });
    order.resize(10);
    ASSERT_EQ(entropy_select(p, 10), order) << "trial " << trial;
  }
}

// --- seq_sft --------------------------------------------------------------

TEST(SeqSft, WeakOnlyRunIsASingleStageOnTheFrontOfTheCandidateOrder) {
  const Environment& env = small_environment();
  const RunSeeds seeds = seeds_of(0);
  const Allocation a = alloc_of(20, 1.0);
  const RunOutput run = run_seq_sft(a, env, seeds);
  EXPECT_TRUE(run.result.stages[0].ran);
  EXPECT_FALSE(run.result.stages[1].ran);
  EXPECT_EQ(run.result.n_weak, 200u);
  EXPECT_EQ(run.result.n_hq, 0u);

  const auto perm = permutation(env, seeds.data);
  const std::size_t n_val = a.val_size(200);
  const auto val = labeled(env, std::span(perm).first(n_val), true);
  const auto train = labeled(env, std::span(perm).subspan(n_val, 200 - n_val), true);
  ASSERT_TRUE(has_both_classes(val));
  const auto fit = train_stage(Head::random(32, env.learner.init_std, seeds.init), train, val,
                               env.learner.schedule, env.learner.stopping, LossConfig{},
                               derive_seed(seeds.data, "stage1_batches"));
  EXPECT_EQ(run.classifier, fit.head);
  EXPECT_EQ(run.result.stages[0].trace, fit.trace);
}

TEST(SeqSft, HighQualityOnlyRunIsASingleStageOnTheFrontOfTheCandidateOrder) {
  const Environment& env = small_environment();
  const RunSeeds seeds = seeds_of(1);
  const Allocation a = alloc_of(60, 0.0);
  const RunOutput run = run_seq_sft(a, env, seeds);
  EXPECT_FALSE(run.result.stages[0].ran);
  EXPECT_TRUE(run.result.stages[1].ran);
  EXPECT_EQ(run.result.n_weak, 0u);
  EXPECT_EQ(run.result.n_hq, 60u);

  const auto perm = permutation(env, seeds.data);
  const std::size_t n_val = a.val_size(60);
  const auto val = labeled(env, std::span(perm).first(n_val), false);
  const auto train = labeled(env, std::span(perm).subspan(n_val, 60 - n_val), false);
  ASSERT_TRUE(has_both_classes(val));
  const auto fit = train_stage(Head::random(32, env.learner.init_std, seeds.init), train, val,
                               env.learner.schedule, env.learner.stopping, LossConfig{},
                               derive_seed(seeds.data, "stage2_batches"));
  EXPECT_EQ(run.classifier, fit.head);
}

TEST(SeqSft, StageBelowMinimumIsNotBought) {
  const Environment& env = small_environment();
  const Allocation a = alloc_of(4.9, 0.2);  // affords 9 weak and 3 HQ
  const RunOutput run = run_seq_sft(a, env, seeds_of(2));
  EXPECT_TRUE(run.result.has_flag(run_flag::stage_too_small));
  EXPECT_EQ(run.result.n_weak, 9u);
  EXPECT_EQ(run.result.n_hq, 0u);
  EXPECT_EQ(run.result.cost, units(0.9));
}

TEST(SeqSft, BothStagesTooSmallIsAnError) {
  EXPECT_THROW(run_seq_sft(alloc_of(0.4, 0.5), small_environment(), seeds_of(0)),
               ValidationError);
}

TEST(SeqSft, PoolTooSmallIsInsufficientPool) {
  // 1000 weak labels from a 900-example pool.
  EXPECT_THROW(run_seq_sft(alloc_of(100, 1.0), small_environment(), seeds_of(0)),
               InsufficientPoolError);
  MethodSpec spec;
  EXPECT_NO_THROW(planned_counts(spec, alloc_of(100, 1.0), CostModel{}));
}

TEST(SeqSft, DeterministicInSeeds) {
  const Environment& env = small_environment();
  const auto a = run_seq_sft(alloc_of(30, 0.5), env, seeds_of(4));
  const auto b = run_seq_sft(alloc_of(30, 0.5), env, seeds_of(4));
  const auto c = run_seq_sft(alloc_of(30, 0.5), env, seeds_of(5));
  EXPECT_EQ(a.classifier, b.classifier);
  EXPECT_EQ(a.result.receipt.weak_ids, b.result.receipt.weak_ids);
  EXPECT_EQ(a.result.test_accuracy, b.result.test_accuracy);
  EXPECT_NE(a.result.receipt.weak_ids, c.result.receipt.weak_ids);
}

TEST(SeqSft, LearnsFromWeakLabelsOnTheDefaultTask) {
  const Environment& env = default_environment();
  double sum = 0.0;
  for (std::uint64_t s = 0; s < 3; ++s) {
    sum += run_seq_sft(alloc_of(64, 1.0), env, seeds_of(s)).result.test_accuracy;
  }
  EXPECT_GT(sum / 3.0, 0.6);
}

// --- receipts, across methods ---------------------------------------------

TEST(Receipts, BillEveryLabelUsedAndNothingElse) {
  const Environment& env = small_environment();
  const std::set<std::uint64_t> candidates(env.candidate.begin(), env.candidate.end());
  std::vector<MethodSpec> specs(5);
  specs[1].kind = MethodKind::fewshot_proto;
  specs[2].kind = MethodKind::proto_seq_sft;
  specs[3].kind = MethodKind::unc_sampling_seq_sft;
  specs[4].kind = MethodKind::logconf_seq_sft;
  const std::vector<double> rhos{0.0, 0.1, 0.5, 0.9, 0.99, 1.0};
  Rng rng(21);
  int checked = 0;
  for (int trial = 0; trial < 30; ++trial) {
    const Allocation a =
        alloc_of(0.5 + static_cast<double>(rng.below(700)) / 10.0, rhos[rng.below(rhos.size())]);
    for (const auto& spec : specs) {
      RunOutput run;
      try {
        run = run_method(spec, a, env, seeds_of(static_cast<std::uint64_t>(trial)));
      } catch (const ValidationError&) {
        continue;
      } catch (const InsufficientPoolError&) {
        continue;
      }
      ++checked;
      const RunResult& r = run.result;
      SCOPED_TRACE(spec.name() + " B=" + a.budget.to_string() +
                   " rho=" + std::to_string(a.weak_spend_fraction));
      EXPECT_EQ(r.method, spec.name());
      EXPECT_EQ(r.n_weak, r.receipt.weak_ids.size());
      EXPECT_EQ(r.n_hq, r.receipt.hq_ids.size());
      EXPECT_EQ(r.cost, label_cost(r.n_weak, r.n_hq, env.costs));
      EXPECT_EQ(r.cost, r.receipt.total);
      EXPECT_LE(r.cost, a.budget);

      std::set<std::uint64_t> ids(r.receipt.weak_ids.begin(), r.receipt.weak_ids.end());
      ids.insert(r.receipt.hq_ids.begin(), r.receipt.hq_ids.end());
      EXPECT_EQ(ids.size(), r.n_weak + r.n_hq) << "ids repeat or overlap";
      for (auto id : ids) EXPECT_TRUE(candidates.count(id));

      const LabelCounts planned = planned_counts(spec, a, env.costs);
      EXPECT_EQ(planned.n_weak, r.n_weak);
      EXPECT_EQ(planned.n_hq, r.n_hq);

      if (spec.kind != MethodKind::fewshot_proto) {
        ASSERT_EQ(r.stages.size(), 2u);
        const std::size_t stage_weak = r.stages[0].n_train + r.stages[0].n_val;
        const std::size_t stage_hq = r.stages[1].n_train + r.stages[1].n_val;
        EXPECT_EQ(stage_hq, r.n_hq);
        if (spec.kind == MethodKind::proto_seq_sft) {
          EXPECT_TRUE(stage_weak == r.n_weak || stage_weak + spec.n_proto == r.n_weak);
        } else {
          EXPECT_EQ(stage_weak, r.n_weak);
        }
      }
      EXPECT_GE(r.test_accuracy, 0.0);
      EXPECT_LE(r.test_accuracy, 1.0);
    }
  }
  EXPECT_GT(checked, 100);
}

// --- log-confidence -------------------------------------------------------

TEST(LogConf, ZeroAlphaReproducesSeqSftExactly) {
  const Environment& env = small_environment();
  for (double rho : {1.0, 0.5}) {
    const auto plain = run_seq_sft(alloc_of(30, rho), env, seeds_of(3));
    const auto lc = run_logconf_seq_sft(alloc_of(30, rho), 0.0, env, seeds_of(3));
    EXPECT_EQ(plain.classifier, lc.classifier) << "rho " << rho;
    EXPECT_EQ(plain.result.test_accuracy, lc.result.test_accuracy);
  }
}

TEST(LogConf, EveryThresholdIsTheMedianOfItsChunk) {
  RunOptions options;
  options.record_logconf_chunks = true;
  const auto run =
      run_logconf_seq_sft(alloc_of(20, 1.0), 0.75, small_environment(), seeds_of(0), 0, options);
  const auto& r = run.result;
  ASSERT_FALSE(r.logconf_thresholds.empty());
  ASSERT_EQ(r.logconf_thresholds.size(), r.logconf_chunks.size());
  for (std::size_t i = 0; i < r.logconf_chunks.size(); ++i) {
    ASSERT_FALSE(r.logconf_chunks[i].empty());
    ASSERT_LE(r.logconf_chunks[i].size(), 8u);
    EXPECT_EQ(r.logconf_thresholds[i], sorted_median(r.logconf_chunks[i])) << "chunk " << i;
  }
  EXPECT_EQ(r.method, "logconf_seq_sft");
}

TEST(LogConf, RejectsAlphaOutsideUnitInterval) {
  EXPECT_THROW(run_logconf_seq_sft(alloc_of(20, 1.0), 1.5, small_environment(), seeds_of(0)),
               ValidationError);
}

// --- uncertainty sampling -------------------------------------------------

TEST(UncSampling, TrainsOnTheMostUncertainRemainingCandidates) {
  const Environment& env = small_environment();
  const RunSeeds seeds = seeds_of(6);
  // Stage 1 matches a weak-only run of the same weak spend under the same seeds.
  const auto stage1 = run_seq_sft(alloc_of(20, 1.0), env, seeds);
  const auto run = run_unc_sampling_seq_sft(alloc_of(40, 0.5), env, seeds);
  ASSERT_EQ(run.result.n_weak, 200u);
  ASSERT_EQ(run.result.n_hq, 20u);
  EXPECT_FALSE(run.result.has_flag(run_flag::no_stage1_model));

  const auto perm = permutation(env, seeds.data);
  const std::size_t n_val = Allocation{}.val_size(20);
  const auto unlabeled = std::span(perm).subspan(200 + n_val);
  std::vector<std::pair<double, std::size_t>> ranked;
  for (std::size_t i = 0; i < unlabeled.size(); ++i) {
    const double p = stage1.classifier.probability((*env.pool)[unlabeled[i]].features);
    ranked.emplace_back(std::abs(p - 0.5), i);
  }
  std::sort(ranked.begin(), ranked.end());
  std::vector<std::uint64_t> expected;
  for (std::size_t i = 0; i < 20 - n_val; ++i) expected.push_back(unlabeled[ranked[i].second]);

  const auto& hq = run.result.receipt.hq_ids;
  EXPECT_EQ(std::vector<std::uint64_t>(hq.begin(), hq.begin() + static_cast<std::ptrdiff_t>(n_val)),
            std::vector<std::uint64_t>(perm.begin() + 200, perm.begin() + 200 + static_cast<std::ptrdiff_t>(n_val)));
  EXPECT_EQ(std::vector<std::uint64_t>(hq.begin() + static_cast<std::ptrdiff_t>(n_val), hq.end()),
            expected);
}

TEST(UncSampling, WithoutWeakStageFallsBackToUniformAndFlags) {
  const Environment& env = small_environment();
  const auto unc = run_unc_sampling_seq_sft(alloc_of(30, 0.0), env, seeds_of(2));
  const auto plain = run_seq_sft(alloc_of(30, 0.0), env, seeds_of(2));
  EXPECT_TRUE(unc.result.has_flag(run_flag::no_stage1_model));
  EXPECT_EQ(unc.classifier, plain.classifier);
  EXPECT_EQ(unc.result.receipt.hq_ids, plain.result.receipt.hq_ids);
}

// --- prototypes -----------------------------------------------------------

std::vector<double> clean_direction(const Environment& env) {
  std::vector<double> d(env.pool->feature_dim(), 0.0);
  std::array<double, 2> n{0, 0};
  for (auto id : env.candidate) n[(*env.pool)[id].true_label] += 1;
  for (auto id : env.candidate) {
    const auto& e = (*env.pool)[id];
    const double sign = e.true_label ? 1.0 / n[1] : -1.0 / n[0];
    for (std::size_t c = 0; c < d.size(); ++c) d[c] += sign * e.features[c];
  }
  return d;
}

double cosine(std::span<const double> a, std::span<const double> b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  return ab / std::sqrt(aa * bb);
}

double prototype_accuracy(const Prototype& p, const Environment& env) {
  std::size_t correct = 0;
  for (auto id : env.test) {
    const auto& e = (*env.pool)[id];
    double s = 0.0;
    for (std::size_t c = 0; c < p.direction.size(); ++c) {
      s += p.direction[c] * (e.features[c] - p.midpoint[c]);
    }
    correct += (s >= 0.0 ? 1 : 0) == e.true_label;
  }
  return static_cast<double>(correct) / static_cast<double>(env.test.size());
}

TEST(Prototype, NoisyTwoExamplePrototypesPointTheRightWayOnAverage) {
  const Environment& env = small_environment();
  const auto clean = clean_direction(env);
  Rng rng(31);
  double total = 0.0;
  int built = 0;
  for (int i = 0; i < 100; ++i) {
    std::vector<const Example*> ex;
    std::vector<std::uint8_t> labels;
    for (int k = 0; k < 2; ++k) {
      const auto id = env.candidate[rng.below(env.candidate.size())];
      ex.push_back(&(*env.pool)[id]);
      labels.push_back(harden(env.weak_soft[id]));
    }
    if (auto p = build_prototype(ex, labels, env.feature_mean)) {
      total += cosine(p->direction, clean);
      ++built;
    }
  }
  ASSERT_GT(built, 90);
  EXPECT_GT(total / built, 0.0);
}

TEST(Prototype, ZeroDirectionIsRejected) {
  const Environment& env = small_environment();
  const Example* e = &(*env.pool)[env.candidate[0]];
  const std::vector<const Example*> twice{e, e};
  const std::vector<std::uint8_t> labels{0, 1};
  EXPECT_FALSE(build_prototype(twice, labels, env.feature_mean).has_value());
  EXPECT_FALSE(build_prototype({}, {}, env.feature_mean).has_value());
  const std::vector<const Example*> mean_only{e};
  const std::vector<std::uint8_t> one{1};
  EXPECT_FALSE(build_prototype(mean_only, one, e->features).has_value());
}

TEST(Prototype, FlippingLabelsFlipsAccuracy) {
  const Environment& env = small_environment();
  Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<const Example*> ex;
    std::vector<std::uint8_t> labels, flipped;
    for (int k = 0; k < 6; ++k) {
      const auto id = env.candidate[rng.below(env.candidate.size())];
      ex.push_back(&(*env.pool)[id]);
      labels.push_back(static_cast<std::uint8_t>(k % 2));
      flipped.push_back(static_cast<std::uint8_t>(1 - k % 2));
    }
    const auto p = build_prototype(ex, labels, env.feature_mean);
    const auto q = build_prototype(ex, flipped, env.feature_mean);
    ASSERT_TRUE(p && q);
    EXPECT_EQ(p->midpoint, q->midpoint);
    for (std::size_t c = 0; c < p->direction.size(); ++c) {
      ASSERT_EQ(p->direction[c], -q->direction[c]);
    }
    EXPECT_NEAR(prototype_accuracy(*p, env) + prototype_accuracy(*q, env), 1.0, 1e-12);
  }
}

TEST(FewshotProto, TwoCleanExamplesSufficeAtLargeMargin) {
  TaskSpec task;
  task.feature_dim = 32;
  task.concept_margin = 10.0;
  task.pool_size = 1200;
  task.test_size = 200;
  WeakAnnotatorSpec weak;
  weak.input_noise = 0.5;
  const auto exp = testing::make_experiment(task, SplitPlan{100, 900, 200}, weak, 4);
  const Environment env = exp->environment(CostModel{}, LearnerConfig{});
  int two_class = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto run = run_fewshot_proto(alloc_of(2, 0.0), 2, env, seeds_of(s));
    EXPECT_EQ(run.result.n_hq, 2u);
    if (run.result.has_flag(run_flag::constant_classifier)) continue;
    ++two_class;
    EXPECT_GE(run.result.test_accuracy, 0.9) << "seed " << s;
  }
  EXPECT_GE(two_class, 5);
}

TEST(FewshotProto, SingleClassGivesAConstantClassifier) {
  const auto& exp = testing::small_experiment();
  Splits splits = exp.splits;
  std::vector<std::uint64_t> positives;
  for (auto id : splits.candidate) {
    if (exp.pool[id].true_label == 1) positives.push_back(id);
  }
  splits.candidate = positives;
  const Environment env =
      Environment::build(exp.pool, splits, exp.weak_annotations, CostModel{}, LearnerConfig{});
  const auto run = run_fewshot_proto(alloc_of(4, 0.0), 4, env, seeds_of(0));
  EXPECT_TRUE(run.result.has_flag(run_flag::constant_classifier));
  EXPECT_DOUBLE_EQ(run.result.test_accuracy, 0.5);  // the test split is exactly balanced
}

TEST(FewshotProto, BuysWeakFirstUpToK) {
  const Environment& env = small_environment();
  auto run = run_fewshot_proto(alloc_of(10, 0.5), 16, env, seeds_of(0));
  EXPECT_EQ(run.result.n_weak, 16u);
  EXPECT_EQ(run.result.n_hq, 0u);
  run = run_fewshot_proto(alloc_of(10, 0.1), 16, env, seeds_of(0));
  EXPECT_EQ(run.result.n_weak, 10u);
  EXPECT_EQ(run.result.n_hq, 6u);
  EXPECT_THROW(run_fewshot_proto(alloc_of(0.05, 1.0), 16, env, seeds_of(0)), ValidationError);
}

TEST(ProtoSeqSft, PrototypeComesFromStageOneWhenThereIsOne) {
  const Environment& env = small_environment();
  const auto plain = run_seq_sft(alloc_of(20, 1.0), env, seeds_of(1));
  const auto proto = run_proto_seq_sft(alloc_of(20, 1.0), 2, env, seeds_of(1));
  EXPECT_EQ(proto.result.receipt.weak_ids, plain.result.receipt.weak_ids);
  EXPECT_EQ(proto.result.cost, plain.result.cost);
  EXPECT_NE(proto.classifier, plain.classifier);
}

TEST(ProtoSeqSft, PrototypeIsBoughtSeparatelyWithoutStageOne) {
  const Environment& env = small_environment();
  const RunSeeds seeds = seeds_of(1);
  const auto run = run_proto_seq_sft(alloc_of(20, 0.0), 2, env, seeds);
  EXPECT_EQ(run.result.n_weak, 2u);
  EXPECT_EQ(run.result.n_hq, 19u);
  EXPECT_EQ(run.result.cost, units(19.2));
  const auto perm = permutation(env, seeds.data);
  EXPECT_EQ(run.result.receipt.weak_ids,
            std::vector<std::uint64_t>(perm.end() - 2, perm.end()));
  EXPECT_THROW(run_proto_seq_sft(alloc_of(0.1, 0.0), 2, env, seeds), ValidationError);
}

TEST(ProtoSeqSft, InitDoesNotCostMoreThanAPointAtLargeHighQualityBudget) {
  const Environment& env = default_environment();
  double plain = 0.0, proto = 0.0;
  constexpr int kSeeds = 5;
  for (std::uint64_t s = 0; s < kSeeds; ++s) {
    plain += run_seq_sft(alloc_of(1025, 0.0), env, seeds_of(s)).result.test_accuracy;
    proto += run_proto_seq_sft(alloc_of(1025, 0.0), 2, env, seeds_of(s)).result.test_accuracy;
  }
  EXPECT_GE(proto / kSeeds, plain / kSeeds - 0.01);
}

// --- method specs ---------------------------------------------------------

TEST(MethodSpec, NamesAndParsing) {
  MethodSpec s;
  EXPECT_EQ(s.name(), "seq_sft");
  s.kind = MethodKind::fewshot_proto;
  EXPECT_EQ(s.name(), "fewshot_proto");
  s.fewshot_k = 8;
  EXPECT_EQ(s.name(), "fewshot_proto[k=8]");
  s = MethodSpec{};
  s.kind = MethodKind::logconf_seq_sft;
  s.alpha_max = 0.5;
  EXPECT_EQ(s.name(), "logconf_seq_sft[alpha=0.5]");
  for (auto kind : {MethodKind::seq_sft, MethodKind::fewshot_proto, MethodKind::proto_seq_sft,
                    MethodKind::unc_sampling_seq_sft, MethodKind::logconf_seq_sft}) {
    EXPECT_EQ(parse_method_kind(to_string(kind)), kind);
  }
  EXPECT_THROW(parse_method_kind("sft"), ValidationError);
}

TEST(MethodSpec, Validate) {
  MethodSpec s;
  s.kind = MethodKind::fewshot_proto;
  s.fewshot_k = 0;
  EXPECT_THROW(s.validate(), ValidationError);
  s = MethodSpec{};
  s.kind = MethodKind::proto_seq_sft;
  s.n_proto = 0;
  EXPECT_THROW(s.validate(), ValidationError);
  s = MethodSpec{};
  s.kind = MethodKind::logconf_seq_sft;
  s.alpha_max = -0.1;
  EXPECT_THROW(s.validate(), ValidationError);
  s.alpha_max = 0.5;
  s.logconf_minibatch = 0;
  EXPECT_THROW(s.validate(), ValidationError);
}

}  // namespace
}  // namespace elicit

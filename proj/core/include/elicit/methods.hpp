#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "elicit/annotators.hpp"
#include "elicit/currency.hpp"
#include "elicit/learner.hpp"
#include "elicit/synth_tasks.hpp"

namespace elicit {

enum class MethodKind {
  seq_sft,
  fewshot_proto,
  proto_seq_sft,
  unc_sampling_seq_sft,
  logconf_seq_sft,
};

std::string_view to_string(MethodKind kind);
MethodKind parse_method_kind(std::string_view text);

struct MethodSpec {
  MethodKind kind = MethodKind::seq_sft;
  std::size_t fewshot_k = 16;  // fewshot_proto: most labeled examples it will use
  std::size_t n_proto = 2;     // proto_seq_sft: weak examples behind the init
  double alpha_max = 0.75;     // logconf_seq_sft
  std::size_t logconf_minibatch = 8;

  /// Stable identifier used in result files, e.g. "seq_sft" or "fewshot_proto[k=8]"
  /// when a knob differs from its default.
  std::string name() const;
  void validate() const;

  friend bool operator==(const MethodSpec&, const MethodSpec&) = default;
};

struct LabelCounts {
  std::size_t n_weak = 0;
  std::size_t n_hq = 0;
};

/// Spend split of a budget between weak and high-quality labels. Validation
/// examples are drawn from, and billed within, each stage's labels.
struct Allocation {
  Currency budget;
  double weak_spend_fraction = 1.0;
  double val_fraction = 0.2;
  std::size_t min_val = 4;

  /// floor(rho * B / weak_cost) and floor((B - rho * B) / hq_cost), with the
  /// weak spend rounded to the nearest micro-unit first.
  LabelCounts counts(const CostModel& costs) const;

  /// Validation share of a stage that buys n labels: max(min_val, round(f * n)).
  std::size_t val_size(std::size_t n) const;

  /// Smallest stage that leaves at least one training example.
  std::size_t min_stage_size() const { return min_val + 1; }

  void validate(const CostModel& costs) const;
};

struct LearnerConfig {
  TrainSchedule schedule;
  EarlyStopPolicy stopping;
  double init_std = 0.002;
  /// Norm of a prototype-initialized head; matches the expected norm of a
  /// random init of the default width (0.002 * sqrt(256)).
  double proto_init_norm = 0.032;
};

/// Everything that is fixed across the runs of one experiment.
struct Environment {
  const DataPool* pool = nullptr;
  std::vector<std::uint64_t> candidate;  // unlabeled pool the methods buy labels from
  std::vector<std::uint64_t> test;
  std::vector<double> weak_soft;         // indexed by example id; NaN where absent
  double weak_accuracy = 0.0;            // hardened weak accuracy on the candidate pool
  std::vector<double> feature_mean;      // unlabeled mean of the candidate features
  CostModel costs;
  LearnerConfig learner;

  /// Builds an environment from a pool, its splits, and the weak annotations
  /// of the candidate pool.
  static Environment build(const DataPool& pool, const Splits& splits,
                           std::span<const Annotation> weak_annotations, const CostModel& costs,
                           const LearnerConfig& learner);
};

struct RunSeeds {
  std::uint64_t data = 0;  // candidate-pool sampling and batch order
  std::uint64_t init = 0;  // head initialisation
};

struct StageReport {
  LabelSource source = LabelSource::weak;
  std::size_t n_train = 0;
  std::size_t n_val = 0;
  bool ran = false;
  bool val_single_class = false;
  TrainTrace trace;
};

/// Every labeled example a run paid for, by source.
struct CostReceipt {
  std::vector<std::uint64_t> weak_ids;
  std::vector<std::uint64_t> hq_ids;
  Currency total;
};

struct RunResult {
  std::string method;
  Currency budget;
  double rho = 0.0;
  std::size_t n_weak = 0;
  std::size_t n_hq = 0;
  Currency cost;
  std::size_t seed = 0;
  double test_accuracy = 0.0;
  double weak_accuracy = 0.0;
  std::vector<StageReport> stages;
  CostReceipt receipt;
  std::vector<std::string> flags;
  /// Log-confidence hardening thresholds, one per minibatch chunk.
  std::vector<double> logconf_thresholds;
  std::vector<std::vector<double>> logconf_chunks;

  bool has_flag(std::string_view flag) const;
};

struct RunOutput {
  Head classifier;
  RunResult result;
};

struct RunOptions {
  bool record_logconf_chunks = false;
};

/// Flags a run may carry.
namespace run_flag {
inline constexpr std::string_view no_stage1_model = "no_stage1_model";
inline constexpr std::string_view constant_classifier = "constant_classifier";
inline constexpr std::string_view degenerate_prototype = "degenerate_prototype";
inline constexpr std::string_view val_single_class = "val_single_class";
inline constexpr std::string_view stage_too_small = "stage_too_small";
}  // namespace run_flag

/// Indices of the k entries closest to 0.5 (ties by ascending index).
/// Throws ValidationError if k exceeds the list length.
std::vector<std::size_t> entropy_select(std::span<const double> probs, std::size_t k);

RunOutput run_seq_sft(const Allocation& alloc, const Environment& env, RunSeeds seeds,
                      std::size_t seed_index = 0, const RunOptions& options = {});
RunOutput run_fewshot_proto(const Allocation& alloc, std::size_t k, const Environment& env,
                            RunSeeds seeds, std::size_t seed_index = 0);
RunOutput run_proto_seq_sft(const Allocation& alloc, std::size_t n_proto, const Environment& env,
                            RunSeeds seeds, std::size_t seed_index = 0);
RunOutput run_unc_sampling_seq_sft(const Allocation& alloc, const Environment& env,
                                   RunSeeds seeds, std::size_t seed_index = 0);
RunOutput run_logconf_seq_sft(const Allocation& alloc, double alpha_max, const Environment& env,
                              RunSeeds seeds, std::size_t seed_index = 0,
                              const RunOptions& options = {});

/// Dispatches on `spec.kind`.
RunOutput run_method(const MethodSpec& spec, const Allocation& alloc, const Environment& env,
                     RunSeeds seeds, std::size_t seed_index = 0, const RunOptions& options = {});

/// Labels each method will actually bill for this allocation (stages too small
/// to train are not bought). Throws like the corresponding run would.
LabelCounts planned_counts(const MethodSpec& spec, const Allocation& alloc, const CostModel& costs);

/// Accuracy of a head on the environment's test split (logit >= 0 -> class 1).
double test_accuracy(const Head& head, const Environment& env);

/// Prototype direction from labeled examples: class-mean difference, or the
/// single present class mean minus `unlabeled_mean` when only one class is
/// present. Returns nullopt when the direction is the zero vector.
struct Prototype {
  std::vector<double> direction;
  std::vector<double> midpoint;
};
std::optional<Prototype> build_prototype(std::span<const Example* const> examples,
                                         std::span<const std::uint8_t> labels,
                                         std::span<const double> unlabeled_mean);

}  // namespace elicit

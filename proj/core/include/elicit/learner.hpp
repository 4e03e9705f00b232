#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "elicit/synth_tasks.hpp"

namespace elicit {

// ---------------------------------------------------------------------------
// Head
// ---------------------------------------------------------------------------

/// Trainable linear head over the frozen representation.
struct Head {
  std::vector<double> weights;
  double bias = 0.0;

  double logit(std::span<const double> features) const;
  double probability(std::span<const double> features) const;

  static Head zeros(std::size_t dim);
  /// Weights ~ N(0, stddev^2), bias 0.
  static Head random(std::size_t dim, double stddev, std::uint64_t seed);

  friend bool operator==(const Head&, const Head&) = default;
};

double sigmoid(double z);

// ---------------------------------------------------------------------------
// Metrics and losses
// ---------------------------------------------------------------------------

/// Mann-Whitney AUROC: P(score+ > score-) + P(tie) / 2. Throws
/// UndefinedMetricError unless both classes are present.
double auroc(std::span<const double> scores, std::span<const std::uint8_t> labels);

inline constexpr double kProbabilityEpsilon = 1e-7;

/// -[t log p + (1-t) log(1-p)] with p clamped to [eps, 1-eps].
double cross_entropy_soft(double predicted_prob, double target_soft_label);

/// d/dz cross_entropy_soft(sigmoid(z), t) = sigmoid(z) - t.
double cross_entropy_soft_logit_grad(double logit, double target_soft_label);

struct LogConfidenceLoss {
  double loss = 0.0;                 // mean over the batch
  std::vector<double> logit_grads;   // d loss / d logit_i, hardened labels held fixed
  std::vector<double> thresholds;    // one median per minibatch chunk
  std::vector<std::uint8_t> hardened;
};

/// Mean of (1 - alpha) CE(p, t) + alpha CE(p, h), where h hardens each p at the
/// median of its minibatch chunk (p >= median -> 1).
LogConfidenceLoss log_confidence_loss(std::span<const double> probs,
                                      std::span<const double> targets, double alpha,
                                      std::size_t minibatch_size = 8);

/// Median of a nonempty list (mean of the middle pair for even sizes).
double median(std::span<const double> values);

// ---------------------------------------------------------------------------
// Schedules and stopping
// ---------------------------------------------------------------------------

enum class ScheduleMode { early_stop, openai_mimic };

std::string_view to_string(ScheduleMode mode);
ScheduleMode parse_schedule_mode(std::string_view text);

struct TrainSchedule {
  std::size_t total_steps = 625;
  std::size_t batch_size = 32;
  double learning_rate = 5e-3;
  std::size_t warmup_cap = 40;
  ScheduleMode mode = ScheduleMode::early_stop;

  std::size_t warmup_steps(std::size_t steps_per_epoch) const;
  void validate() const;
};

/// Linear warmup from 0 to `peak` over `warmup` steps, then cosine decay to 0
/// at `total`.
double cosine_lr(std::size_t step, std::size_t total, std::size_t warmup, double peak);

struct BatchEpochs {
  std::size_t batch_size = 1;
  std::size_t epochs = 1;

  friend bool operator==(const BatchEpochs&, const BatchEpochs&) = default;
};

/// Batch size and epoch count mimicking a hosted finetuning API, keyed by
/// training-set size.
BatchEpochs schedule_for(std::size_t n);

struct EarlyStopPolicy {
  std::size_t eval_cap = 50;
  std::size_t patience = 4;
  double min_delta = 0.01;

  /// min(steps_per_epoch, eval_cap)
  std::size_t eval_every(std::size_t steps_per_epoch) const;
  void validate() const;
};

/// Incremental early-stopping state. An evaluation counts as an improvement
/// when `auroc - best_so_far >= min_delta`; `best_so_far` is the maximum seen.
class EarlyStopper {
 public:
  explicit EarlyStopper(const EarlyStopPolicy& policy);

  /// Records one evaluation; returns true when training should stop.
  bool observe(double val_auroc);

  std::size_t evaluations() const { return evaluations_; }
  std::size_t best_index() const { return best_index_; }
  double best_value() const { return best_value_; }

 private:
  EarlyStopPolicy policy_;
  std::size_t evaluations_ = 0;
  std::size_t best_index_ = 0;
  double best_value_ = 0.0;
  std::size_t bad_streak_ = 0;
};

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

struct TraceEntry {
  std::size_t step = 0;
  double val_auroc = 0.0;
  std::size_t checkpoint_id = 0;

  friend bool operator==(const TraceEntry&, const TraceEntry&) = default;
};

struct TrainTrace {
  std::vector<TraceEntry> entries;
  std::size_t best_checkpoint_id = 0;

  friend bool operator==(const TrainTrace&, const TrainTrace&) = default;
};

/// `step,val_auroc,is_best`
void write_trace_csv(const TrainTrace& trace, std::ostream& out);

struct LabeledExample {
  const Example* example = nullptr;
  double target = 0.0;  // soft label; validation uses harden(target)
};

enum class LossKind { cross_entropy_soft, log_confidence };

struct LossConfig {
  LossKind kind = LossKind::cross_entropy_soft;
  double alpha_max = 0.75;
  std::size_t minibatch_size = 8;
};

struct StageResult {
  Head head;
  TrainTrace trace;
  std::size_t steps_run = 0;
  bool early_stopped = false;
  /// Per-chunk hardening thresholds of every log-confidence batch, in order.
  std::vector<double> logconf_thresholds;
  /// The probabilities each threshold was computed from, chunk by chunk.
  std::vector<std::vector<double>> logconf_chunks;
};

struct StageOptions {
  /// Disables early stopping and checkpoint restore; used when validation
  /// AUROC is undefined for the stage.
  bool force_full_schedule = false;
  /// Keep per-batch log-confidence chunks for inspection.
  bool record_logconf_chunks = false;
};

/// Trains `init` on `train` with a freshly created Adam state. In early_stop
/// mode the returned head is the checkpoint with the highest validation AUROC.
/// In openai_mimic mode (batch, epochs) come from schedule_for(train.size()),
/// there is no early stopping, and the final head is returned.
///
/// Throws ValidationError on an empty training set, and UndefinedMetricError on
/// an empty or single-class validation set in early_stop mode.
StageResult train_stage(const Head& init, std::span<const LabeledExample> train,
                        std::span<const LabeledExample> val, const TrainSchedule& schedule,
                        const EarlyStopPolicy& policy, const LossConfig& loss,
                        std::uint64_t seed, const StageOptions& options = {});

/// Adam with bias correction over a flat parameter vector.
class AdamOptimizer {
 public:
  explicit AdamOptimizer(std::size_t n_params, double beta1 = 0.9, double beta2 = 0.999,
                         double eps = 1e-8);

  void step(std::span<double> params, std::span<const double> grads, double lr);

 private:
  std::vector<double> m_;
  std::vector<double> v_;
  double beta1_, beta2_, eps_;
  double beta1_pow_ = 1.0;
  double beta2_pow_ = 1.0;
};

/// Mean-loss gradient of a batch with respect to (weights..., bias), given
/// per-example logit gradients.
void accumulate_head_grad(std::span<const LabeledExample> batch,
                          std::span<const double> logit_grads, std::span<double> grad_out);

}  // namespace elicit

#include "elicit/learner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>
#include <string>

#include "elicit/annotators.hpp"
#include "elicit/error.hpp"
#include "elicit/rng.hpp"
#include "elicit/text.hpp"

namespace elicit {

double sigmoid(double z) {
  if (z >= 0.0) {
    const double e = std::exp(-z);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double Head::logit(std::span<const double> features) const {
  double z = bias;
  for (std::size_t i = 0; i < weights.size(); ++i) z += weights[i] * features[i];
  return z;
}

double Head::probability(std::span<const double> features) const {
  return sigmoid(logit(features));
}

Head Head::zeros(std::size_t dim) { return Head{std::vector<double>(dim, 0.0), 0.0}; }

Head Head::random(std::size_t dim, double stddev, std::uint64_t seed) {
  Rng rng(seed);
  Head head = zeros(dim);
  for (auto& w : head.weights) w = stddev * rng.normal();
  return head;
}

// ---------------------------------------------------------------------------

double auroc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) {
    throw ValidationError("labels", "scores and labels differ in length");
  }
  std::uint64_t n_pos = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (std::isnan(scores[i])) throw UndefinedMetricError("AUROC of a NaN score");
    n_pos += labels[i] ? 1 : 0;
  }
  const std::uint64_t n_neg = scores.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw UndefinedMetricError("AUROC needs both classes present");
  }

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Twice the positive-class midrank sum, kept integral.
  std::uint64_t twice_rank_sum = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i + 1;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    // 1-based ranks i+1..j share the midrank (i + 1 + j) / 2.
    std::uint64_t pos_in_group = 0;
    for (std::size_t k = i; k < j; ++k) pos_in_group += labels[order[k]] ? 1 : 0;
    twice_rank_sum += pos_in_group * (i + 1 + j);
    i = j;
  }
  // 2U = 2 R+ - n+(n+ + 1) = 2 #(pos > neg) + #(ties)
  const std::uint64_t twice_u = twice_rank_sum - n_pos * (n_pos + 1);
  return static_cast<double>(twice_u) / (2.0 * static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double cross_entropy_soft(double predicted_prob, double target) {
  const double p = std::clamp(predicted_prob, kProbabilityEpsilon, 1.0 - kProbabilityEpsilon);
  return -(target * std::log(p) + (1.0 - target) * std::log1p(-p));
}

double cross_entropy_soft_logit_grad(double logit, double target) {
  return sigmoid(logit) - target;
}

double median(std::span<const double> values) {
  if (values.empty()) throw ValidationError("values", "median of an empty list");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t mid = sorted.size() / 2;
  if (sorted.size() % 2 == 1) return sorted[mid];
  return 0.5 * (sorted[mid - 1] + sorted[mid]);
}

LogConfidenceLoss log_confidence_loss(std::span<const double> probs,
                                      std::span<const double> targets, double alpha,
                                      std::size_t minibatch_size) {
  if (probs.size() != targets.size()) {
    throw ValidationError("targets", "probs and targets differ in length");
  }
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ValidationError("alpha", "must be in [0, 1]");
  if (minibatch_size == 0) throw ValidationError("minibatch_size", "must be positive");

  LogConfidenceLoss out;
  const std::size_t n = probs.size();
  out.logit_grads.resize(n);
  out.hardened.resize(n);
  if (n == 0) return out;

  for (std::size_t start = 0; start < n; start += minibatch_size) {
    const std::size_t stop = std::min(n, start + minibatch_size);
    const double threshold = median(probs.subspan(start, stop - start));
    out.thresholds.push_back(threshold);
    for (std::size_t i = start; i < stop; ++i) {
      out.hardened[i] = probs[i] >= threshold ? 1 : 0;
    }
  }

  const double inv_n = 1.0 / static_cast<double>(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double mixed = (1.0 - alpha) * targets[i] + alpha * static_cast<double>(out.hardened[i]);
    total += cross_entropy_soft(probs[i], mixed);
    out.logit_grads[i] = (probs[i] - mixed) * inv_n;
  }
  out.loss = total * inv_n;
  return out;
}

// ---------------------------------------------------------------------------

std::string_view to_string(ScheduleMode mode) {
  return mode == ScheduleMode::early_stop ? "early_stop" : "openai_mimic";
}

ScheduleMode parse_schedule_mode(std::string_view text) {
  if (text == "early_stop") return ScheduleMode::early_stop;
  if (text == "openai_mimic") return ScheduleMode::openai_mimic;
  throw ValidationError("mode", "expected early_stop or openai_mimic, got '" + std::string(text) + "'");
}

std::size_t TrainSchedule::warmup_steps(std::size_t steps_per_epoch) const {
  return std::min(warmup_cap, steps_per_epoch);
}

void TrainSchedule::validate() const {
  if (total_steps == 0) throw ValidationError("total_steps", "must be positive");
  if (batch_size == 0) throw ValidationError("batch_size", "must be positive");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ValidationError("learning_rate", "must be positive");
  }
  if (warmup_cap == 0) throw ValidationError("warmup_cap", "must be positive");
}

double cosine_lr(std::size_t step, std::size_t total, std::size_t warmup, double peak) {
  if (step < warmup) {
    return peak * static_cast<double>(step) / static_cast<double>(warmup);
  }
  if (total <= warmup) return 0.0;
  const double progress =
      std::min(1.0, static_cast<double>(step - warmup) / static_cast<double>(total - warmup));
  return peak * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

BatchEpochs schedule_for(std::size_t n) {
  if (n == 0) throw ValidationError("n", "dataset size must be at least 1");
  if (n < 30) return {1, (100 + n - 1) / n};
  if (n < 1024) return {1, 3};
  if (n < 4096) return {2, 3};
  if (n < 16384) return {8, 2};
  return {8, 1};
}

std::size_t EarlyStopPolicy::eval_every(std::size_t steps_per_epoch) const {
  return std::max<std::size_t>(1, std::min(steps_per_epoch, eval_cap));
}

void EarlyStopPolicy::validate() const {
  if (patience < 1) throw ValidationError("patience", "must be at least 1");
  if (!(min_delta >= 0.0)) throw ValidationError("min_delta", "must be nonnegative");
  if (eval_cap == 0) throw ValidationError("eval_cap", "must be positive");
}

EarlyStopper::EarlyStopper(const EarlyStopPolicy& policy) : policy_(policy) {}

bool EarlyStopper::observe(double val_auroc) {
  const std::size_t index = evaluations_++;
  if (index == 0) {
    best_value_ = val_auroc;
    best_index_ = 0;
    bad_streak_ = 0;
    return false;
  }
  const bool improved = val_auroc - best_value_ >= policy_.min_delta;
  if (val_auroc > best_value_) {
    best_value_ = val_auroc;
    best_index_ = index;
  }
  bad_streak_ = improved ? 0 : bad_streak_ + 1;
  return bad_streak_ >= policy_.patience;
}

void write_trace_csv(const TrainTrace& trace, std::ostream& out) {
  out << "step,val_auroc,is_best\n";
  for (const auto& e : trace.entries) {
    out << e.step << ',' << text::format_double(e.val_auroc) << ','
        << (e.checkpoint_id == trace.best_checkpoint_id ? 1 : 0) << '\n';
  }
}

// ---------------------------------------------------------------------------

AdamOptimizer::AdamOptimizer(std::size_t n_params, double beta1, double beta2, double eps)
    : m_(n_params, 0.0), v_(n_params, 0.0), beta1_(beta1), beta2_(beta2), eps_(eps) {}

void AdamOptimizer::step(std::span<double> params, std::span<const double> grads, double lr) {
  beta1_pow_ *= beta1_;
  beta2_pow_ *= beta2_;
  const double c1 = 1.0 - beta1_pow_;
  const double c2 = 1.0 - beta2_pow_;
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grads[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grads[i] * grads[i];
    const double m_hat = m_[i] / c1;
    const double v_hat = v_[i] / c2;
    params[i] -= lr * m_hat / (std::sqrt(v_hat) + eps_);
  }
}

void accumulate_head_grad(std::span<const LabeledExample> batch,
                          std::span<const double> logit_grads, std::span<double> grad_out) {
  std::fill(grad_out.begin(), grad_out.end(), 0.0);
  const std::size_t dim = grad_out.size() - 1;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto& x = batch[i].example->features;
    const double g = logit_grads[i];
    for (std::size_t c = 0; c < dim; ++c) grad_out[c] += g * x[c];
    grad_out[dim] += g;
  }
}

namespace {

struct ValidationSet {
  std::vector<std::uint8_t> labels;
  bool usable = false;  // nonempty with both classes
};

ValidationSet prepare_validation(std::span<const LabeledExample> val) {
  ValidationSet vs;
  vs.labels.reserve(val.size());
  std::size_t pos = 0;
  for (const auto& v : val) {
    vs.labels.push_back(harden(v.target));
    pos += vs.labels.back();
  }
  vs.usable = pos > 0 && pos < val.size();
  return vs;
}

double evaluate(const Head& head, std::span<const LabeledExample> val, const ValidationSet& vs,
                std::vector<double>& scratch) {
  if (!vs.usable) return std::numeric_limits<double>::quiet_NaN();
  scratch.resize(val.size());
  for (std::size_t i = 0; i < val.size(); ++i) scratch[i] = head.logit(val[i].example->features);
  return auroc(scratch, vs.labels);
}

}  // namespace

StageResult train_stage(const Head& init, std::span<const LabeledExample> train,
                        std::span<const LabeledExample> val, const TrainSchedule& schedule,
                        const EarlyStopPolicy& policy, const LossConfig& loss,
                        std::uint64_t seed, const StageOptions& options) {
  schedule.validate();
  policy.validate();
  if (train.empty()) throw ValidationError("train", "training set is empty");

  const bool early_stop = schedule.mode == ScheduleMode::early_stop && !options.force_full_schedule;
  const ValidationSet vs = prepare_validation(val);
  if (early_stop && val.empty()) throw UndefinedMetricError("validation set is empty");
  if (early_stop && !vs.usable) throw UndefinedMetricError("validation set has a single class");

  const std::size_t n = train.size();
  std::size_t batch = schedule.batch_size;
  std::size_t total = schedule.total_steps;
  if (schedule.mode == ScheduleMode::openai_mimic) {
    const BatchEpochs be = schedule_for(n);
    batch = be.batch_size;
    total = be.epochs * ((n + batch - 1) / batch);
  }
  const std::size_t steps_per_epoch = (n + batch - 1) / batch;
  const std::size_t warmup = schedule.warmup_steps(steps_per_epoch);
  const std::size_t eval_every = policy.eval_every(steps_per_epoch);

  const std::size_t dim = init.weights.size();
  std::vector<double> params(init.weights);
  params.push_back(init.bias);
  std::vector<double> grads(dim + 1);
  AdamOptimizer adam(dim + 1);

  auto current_head = [&] {
    return Head{std::vector<double>(params.begin(), params.end() - 1), params.back()};
  };

  StageResult result;
  EarlyStopper stopper(policy);
  Head best = init;
  std::vector<double> scratch;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);

  std::vector<LabeledExample> batch_examples;
  std::vector<double> probs, targets, logit_grads;
  batch_examples.reserve(batch);

  for (std::size_t step = 0; step < total; ++step) {
    const std::size_t pos = step % steps_per_epoch;
    if (pos == 0) rng.shuffle(std::span<std::size_t>(order));
    const std::size_t lo = pos * batch;
    const std::size_t hi = std::min(n, lo + batch);

    batch_examples.clear();
    probs.clear();
    targets.clear();
    for (std::size_t k = lo; k < hi; ++k) {
      const LabeledExample& ex = train[order[k]];
      batch_examples.push_back(ex);
      double z = params[dim];
      const auto& x = ex.example->features;
      for (std::size_t c = 0; c < dim; ++c) z += params[c] * x[c];
      probs.push_back(sigmoid(z));
      targets.push_back(ex.target);
    }

    const std::size_t m = batch_examples.size();
    logit_grads.assign(m, 0.0);
    if (loss.kind == LossKind::cross_entropy_soft) {
      const double inv_m = 1.0 / static_cast<double>(m);
      for (std::size_t i = 0; i < m; ++i) logit_grads[i] = (probs[i] - targets[i]) * inv_m;
    } else {
      const double alpha =
          loss.alpha_max * static_cast<double>(step) / static_cast<double>(total);
      LogConfidenceLoss lc = log_confidence_loss(probs, targets, alpha, loss.minibatch_size);
      logit_grads = std::move(lc.logit_grads);
      result.logconf_thresholds.insert(result.logconf_thresholds.end(), lc.thresholds.begin(),
                                       lc.thresholds.end());
      if (options.record_logconf_chunks) {
        for (std::size_t s = 0; s < m; s += loss.minibatch_size) {
          const std::size_t e = std::min(m, s + loss.minibatch_size);
          result.logconf_chunks.emplace_back(probs.begin() + s, probs.begin() + e);
        }
      }
    }

    accumulate_head_grad(batch_examples, logit_grads, grads);
    adam.step(params, grads, cosine_lr(step, total, warmup, schedule.learning_rate));
    result.steps_run = step + 1;

    if (early_stop && (result.steps_run % eval_every == 0 || result.steps_run == total)) {
      Head head = current_head();
      const double score = evaluate(head, val, vs, scratch);
      const std::size_t id = result.trace.entries.size();
      result.trace.entries.push_back({result.steps_run, score, id});
      const bool stop = stopper.observe(score);
      if (stopper.best_index() == id) best = std::move(head);
      if (stop) {
        result.early_stopped = result.steps_run < total;
        break;
      }
    }
  }

  if (early_stop) {
    result.trace.best_checkpoint_id = stopper.best_index();
    result.head = std::move(best);
  } else {
    result.head = current_head();
    result.trace.entries.push_back({result.steps_run, evaluate(result.head, val, vs, scratch), 0});
    result.trace.best_checkpoint_id = 0;
  }
  return result;
}

}  // namespace elicit

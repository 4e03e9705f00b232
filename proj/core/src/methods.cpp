#include "elicit/methods.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "elicit/error.hpp"
#include "elicit/rng.hpp"
#include "elicit/text.hpp"

namespace elicit {

std::string_view to_string(MethodKind kind) {
  switch (kind) {
    case MethodKind::seq_sft: return "seq_sft";
    case MethodKind::fewshot_proto: return "fewshot_proto";
    case MethodKind::proto_seq_sft: return "proto_seq_sft";
    case MethodKind::unc_sampling_seq_sft: return "unc_sampling_seq_sft";
    case MethodKind::logconf_seq_sft: return "logconf_seq_sft";
  }
  return "?";
}

MethodKind parse_method_kind(std::string_view text) {
  for (auto kind : {MethodKind::seq_sft, MethodKind::fewshot_proto, MethodKind::proto_seq_sft,
                    MethodKind::unc_sampling_seq_sft, MethodKind::logconf_seq_sft}) {
    if (to_string(kind) == text) return kind;
  }
  throw ValidationError("kind", "unknown method '" + std::string(text) + "'");
}

std::string MethodSpec::name() const {
  const MethodSpec defaults;
  std::string out(to_string(kind));
  switch (kind) {
    case MethodKind::fewshot_proto:
      if (fewshot_k != defaults.fewshot_k) out += "[k=" + std::to_string(fewshot_k) + "]";
      break;
    case MethodKind::proto_seq_sft:
      if (n_proto != defaults.n_proto) out += "[n_proto=" + std::to_string(n_proto) + "]";
      break;
    case MethodKind::logconf_seq_sft:
      if (alpha_max != defaults.alpha_max) out += "[alpha=" + text::format_double(alpha_max) + "]";
      if (logconf_minibatch != defaults.logconf_minibatch) {
        out += "[mb=" + std::to_string(logconf_minibatch) + "]";
      }
      break;
    default:
      break;
  }
  return out;
}

void MethodSpec::validate() const {
  switch (kind) {
    case MethodKind::fewshot_proto:
      if (fewshot_k == 0) throw ValidationError("k", "fewshot_proto needs k >= 1");
      break;
    case MethodKind::proto_seq_sft:
      if (n_proto == 0) throw ValidationError("n_proto", "must be at least 1");
      break;
    case MethodKind::logconf_seq_sft:
      if (!(alpha_max >= 0.0 && alpha_max <= 1.0)) {
        throw ValidationError("alpha_max", "must be in [0, 1]");
      }
      if (logconf_minibatch == 0) throw ValidationError("minibatch", "must be positive");
      break;
    default:
      break;
  }
}

// ---------------------------------------------------------------------------

LabelCounts Allocation::counts(const CostModel& costs) const {
  const std::int64_t budget_micros = budget.micros();
  const auto weak_spend = static_cast<std::int64_t>(
      std::llround(weak_spend_fraction * static_cast<double>(budget_micros)));
  LabelCounts out;
  out.n_weak = static_cast<std::size_t>(weak_spend / costs.weak_cost.micros());
  out.n_hq = static_cast<std::size_t>((budget_micros - weak_spend) / costs.hq_cost.micros());
  return out;
}

std::size_t Allocation::val_size(std::size_t n) const {
  const auto share = static_cast<std::size_t>(std::llround(val_fraction * static_cast<double>(n)));
  return std::max(min_val, share);
}

void Allocation::validate(const CostModel& costs) const {
  costs.validate();
  if (budget.micros() <= 0) throw ValidationError("budget", "must be positive");
  if (!(weak_spend_fraction >= 0.0 && weak_spend_fraction <= 1.0)) {
    throw ValidationError("rho", "weak spend fraction must be in [0, 1]");
  }
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) {
    throw ValidationError("val_fraction", "must be in (0, 1)");
  }
  const LabelCounts c = counts(costs);
  if (c.n_weak + c.n_hq == 0) {
    throw ValidationError("budget", "affords no labels at all");
  }
}

bool RunResult::has_flag(std::string_view flag) const {
  return std::find(flags.begin(), flags.end(), flag) != flags.end();
}

Environment Environment::build(const DataPool& pool, const Splits& splits,
                               std::span<const Annotation> weak_annotations,
                               const CostModel& costs, const LearnerConfig& learner) {
  Environment env;
  env.pool = &pool;
  env.candidate = splits.candidate;
  env.test = splits.test;
  env.costs = costs;
  env.learner = learner;
  env.weak_soft.assign(pool.size(), std::numeric_limits<double>::quiet_NaN());
  std::vector<Annotation> on_candidates;
  for (const auto& a : weak_annotations) {
    if (a.source != LabelSource::weak) continue;
    pool.at(a.example_id);
    env.weak_soft[a.example_id] = a.soft_label;
  }
  for (auto id : env.candidate) {
    if (std::isnan(env.weak_soft[id])) {
      throw ValidationError("annotations", "candidate id " + std::to_string(id) +
                                               " has no weak annotation");
    }
    on_candidates.push_back({id, env.weak_soft[id], LabelSource::weak});
  }
  env.weak_accuracy = measure_weak_accuracy(on_candidates, pool);

  env.feature_mean.assign(pool.feature_dim(), 0.0);
  for (auto id : env.candidate) {
    const auto& x = pool[id].features;
    for (std::size_t c = 0; c < x.size(); ++c) env.feature_mean[c] += x[c];
  }
  for (auto& m : env.feature_mean) m /= static_cast<double>(env.candidate.size());
  return env;
}

// ---------------------------------------------------------------------------

std::vector<std::size_t> entropy_select(std::span<const double> probs, std::size_t k) {
  if (k > probs.size()) {
    throw ValidationError("k", "cannot select " + std::to_string(k) + " of " +
                                   std::to_string(probs.size()) + " examples");
  }
  std::vector<std::size_t> order(probs.size());
  std::iota(order.begin(), order.end(), 0);
  auto closer = [&](std::size_t a, std::size_t b) {
    const double da = std::abs(probs[a] - 0.5);
    const double db = std::abs(probs[b] - 0.5);
    return da < db || (da == db && a < b);
  };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    closer);
  order.resize(k);
  return order;
}

double test_accuracy(const Head& head, const Environment& env) {
  std::size_t correct = 0;
  for (auto id : env.test) {
    const Example& ex = (*env.pool)[id];
    const std::uint8_t predicted = head.logit(ex.features) >= 0.0 ? 1 : 0;
    correct += predicted == ex.true_label ? 1 : 0;
  }
  return static_cast<double>(correct) / static_cast<double>(env.test.size());
}

std::optional<Prototype> build_prototype(std::span<const Example* const> examples,
                                         std::span<const std::uint8_t> labels,
                                         std::span<const double> unlabeled_mean) {
  if (examples.empty()) return std::nullopt;
  const std::size_t dim = examples.front()->features.size();
  std::array<std::vector<double>, 2> sums{std::vector<double>(dim, 0.0),
                                          std::vector<double>(dim, 0.0)};
  std::array<std::size_t, 2> counts{0, 0};
  for (std::size_t i = 0; i < examples.size(); ++i) {
    auto& s = sums[labels[i]];
    for (std::size_t c = 0; c < dim; ++c) s[c] += examples[i]->features[c];
    ++counts[labels[i]];
  }
  std::array<std::vector<double>, 2> means;
  for (int k = 0; k < 2; ++k) {
    if (counts[k] == 0) {
      means[k].assign(unlabeled_mean.begin(), unlabeled_mean.end());
    } else {
      means[k] = sums[k];
      for (auto& v : means[k]) v /= static_cast<double>(counts[k]);
    }
  }
  if (counts[0] == 0 && counts[1] == 0) return std::nullopt;

  Prototype proto{std::vector<double>(dim), std::vector<double>(dim)};
  double norm = 0.0;
  for (std::size_t c = 0; c < dim; ++c) {
    proto.direction[c] = means[1][c] - means[0][c];
    proto.midpoint[c] = counts[0] && counts[1] ? 0.5 * (means[1][c] + means[0][c])
                                               : unlabeled_mean[c];
    norm += proto.direction[c] * proto.direction[c];
  }
  if (norm == 0.0) return std::nullopt;
  return proto;
}

namespace {

/// Linear head that scores by signed distance along `proto.direction`,
/// scaled so the weight vector has norm `scale`.
Head prototype_head(const Prototype& proto, double scale) {
  double norm = 0.0;
  for (double d : proto.direction) norm += d * d;
  norm = std::sqrt(norm);
  Head head = Head::zeros(proto.direction.size());
  double offset = 0.0;
  for (std::size_t c = 0; c < proto.direction.size(); ++c) {
    head.weights[c] = scale * proto.direction[c] / norm;
    offset += head.weights[c] * proto.midpoint[c];
  }
  head.bias = -offset;
  return head;
}

Head constant_head(std::size_t dim, std::uint8_t label) {
  Head head = Head::zeros(dim);
  head.bias = label ? 1.0 : -1.0;
  return head;
}

std::vector<std::uint64_t> permuted_candidates(const Environment& env, std::uint64_t data_seed) {
  std::vector<std::uint64_t> perm = env.candidate;
  Rng rng(derive_seed(data_seed, "candidate_order"));
  rng.shuffle(std::span<std::uint64_t>(perm));
  return perm;
}

double target_of(const Environment& env, std::uint64_t id, LabelSource source) {
  return source == LabelSource::weak ? env.weak_soft[id]
                                     : static_cast<double>((*env.pool)[id].true_label);
}

std::size_t stage_size(std::size_t affordable, const Allocation& alloc) {
  return affordable >= alloc.min_stage_size() ? affordable : 0;
}

struct StagePlan {
  std::vector<std::uint64_t> train_ids;
  std::vector<std::uint64_t> val_ids;
};

/// First val_size ids validate, the rest train. If the validation share came
/// out single-class while the stage holds both classes, one training example
/// of the missing class is swapped in.
StagePlan split_stage(std::span<const std::uint64_t> ids, LabelSource source,
                      const Allocation& alloc, const Environment& env) {
  const std::size_t n_val = alloc.val_size(ids.size());
  StagePlan plan;
  plan.val_ids.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_val));
  plan.train_ids.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_val), ids.end());

  std::size_t positives = 0;
  for (auto id : plan.val_ids) positives += harden(target_of(env, id, source));
  if (positives == 0 || positives == plan.val_ids.size()) {
    const std::uint8_t missing = positives == 0 ? 1 : 0;
    for (auto& id : plan.train_ids) {
      if (harden(target_of(env, id, source)) == missing) {
        std::swap(id, plan.val_ids.back());
        break;
      }
    }
  }
  return plan;
}

std::vector<LabeledExample> labeled(std::span<const std::uint64_t> ids, LabelSource source,
                                    const Environment& env) {
  std::vector<LabeledExample> out;
  out.reserve(ids.size());
  for (auto id : ids) out.push_back({&(*env.pool)[id], target_of(env, id, source)});
  return out;
}

bool single_class(std::span<const LabeledExample> set) {
  std::size_t pos = 0;
  for (const auto& e : set) pos += harden(e.target);
  return pos == 0 || pos == set.size();
}

struct StageRun {
  Head head;
  StageReport report;
  std::vector<double> logconf_thresholds;
  std::vector<std::vector<double>> logconf_chunks;
};

StageRun run_stage(const Head& init, const StagePlan& plan, LabelSource source,
                   const LossConfig& loss, const Environment& env, std::uint64_t seed,
                   const RunOptions& run_options) {
  const auto train = labeled(plan.train_ids, source, env);
  const auto val = labeled(plan.val_ids, source, env);
  StageOptions options;
  options.record_logconf_chunks = run_options.record_logconf_chunks;
  options.force_full_schedule = env.learner.schedule.mode == ScheduleMode::early_stop && single_class(val);

  StageResult fit = train_stage(init, train, val, env.learner.schedule, env.learner.stopping, loss,
                                seed, options);
  StageRun out;
  out.head = std::move(fit.head);
  out.report.source = source;
  out.report.n_train = train.size();
  out.report.n_val = val.size();
  out.report.ran = true;
  out.report.val_single_class = options.force_full_schedule;
  out.report.trace = std::move(fit.trace);
  out.logconf_thresholds = std::move(fit.logconf_thresholds);
  out.logconf_chunks = std::move(fit.logconf_chunks);
  return out;
}

void add_flag(RunResult& r, std::string_view flag) {
  if (!r.has_flag(flag)) r.flags.emplace_back(flag);
}

RunResult start_result(std::string method, const Allocation& alloc, std::size_t seed_index) {
  RunResult r;
  r.method = std::move(method);
  r.budget = alloc.budget;
  r.rho = alloc.weak_spend_fraction;
  r.seed = seed_index;
  return r;
}

void finish_result(RunResult& r, const Head& classifier, const Environment& env) {
  r.n_weak = r.receipt.weak_ids.size();
  r.n_hq = r.receipt.hq_ids.size();
  r.receipt.total = label_cost(r.n_weak, r.n_hq, env.costs);
  r.cost = r.receipt.total;
  r.test_accuracy = test_accuracy(classifier, env);
  r.weak_accuracy = env.weak_accuracy;
}

void require_pool(std::size_t needed, const Environment& env) {
  if (needed > env.candidate.size()) {
    throw InsufficientPoolError("allocation needs " + std::to_string(needed) +
                                " candidate examples but the pool holds " +
                                std::to_string(env.candidate.size()));
  }
}

LabelCounts sequential_counts(const Allocation& alloc, const CostModel& costs, RunResult* r) {
  const LabelCounts affordable = alloc.counts(costs);
  LabelCounts out{stage_size(affordable.n_weak, alloc), stage_size(affordable.n_hq, alloc)};
  if (r && (out.n_weak != affordable.n_weak || out.n_hq != affordable.n_hq)) {
    add_flag(*r, run_flag::stage_too_small);
  }
  if (out.n_weak + out.n_hq == 0) {
    throw ValidationError("allocation", "both stages are empty (each stage needs at least " +
                                            std::to_string(alloc.min_stage_size()) + " labels)");
  }
  return out;
}

struct SeqVariant {
  LossConfig stage1_loss;
  std::optional<Head> init;
  bool uncertainty = false;
  /// When positive, the head is initialized from a prototype built on this many
  /// stage-1 training examples.
  std::size_t proto_from_stage1 = 0;
};

std::optional<Head> prototype_init(std::span<const std::uint64_t> ids, const Environment& env) {
  std::vector<const Example*> examples;
  std::vector<std::uint8_t> labels;
  for (auto id : ids) {
    examples.push_back(&(*env.pool)[id]);
    labels.push_back(harden(env.weak_soft[id]));
  }
  if (auto proto = build_prototype(examples, labels, env.feature_mean)) {
    return prototype_head(*proto, env.learner.proto_init_norm);
  }
  return std::nullopt;
}

/// How proto_seq_sft pays for its prototype: drawn from the stage-1 training
/// set when there is one large enough, otherwise bought separately.
struct ProtoPlan {
  Allocation stages;
  LabelCounts counts;
  bool from_stage1 = false;
};

ProtoPlan plan_proto(const Allocation& alloc, std::size_t n_proto, const CostModel& costs,
                     RunResult* r) {
  ProtoPlan plan;
  plan.stages = alloc;
  const LabelCounts affordable = alloc.counts(costs);
  const std::size_t stage1 = stage_size(affordable.n_weak, alloc);
  if (stage1 > 0 && stage1 - alloc.val_size(stage1) >= n_proto) {
    plan.counts = sequential_counts(alloc, costs, r);
    plan.from_stage1 = true;
    return plan;
  }
  const Currency proto_cost = costs.weak_cost * static_cast<std::int64_t>(n_proto);
  if (proto_cost > alloc.budget) {
    throw ValidationError("budget", "cannot afford the prototype examples");
  }
  plan.stages.budget = alloc.budget - proto_cost;
  plan.counts = sequential_counts(plan.stages, costs, r);
  return plan;
}

/// Shared two-stage body. `perm` is the run's candidate order; stage sets are
/// taken from its front.
RunOutput sequential(RunResult r, const Allocation& alloc, LabelCounts counts,
                     const Environment& env, RunSeeds seeds,
                     std::span<const std::uint64_t> perm, const SeqVariant& variant,
                     const RunOptions& options) {
  const std::size_t dim = env.pool->feature_dim();
  Head head = variant.init ? *variant.init : Head::random(dim, env.learner.init_std, seeds.init);

  StageReport weak_report;
  StageReport hq_report;
  hq_report.source = LabelSource::high_quality;

  const auto weak_ids = perm.first(counts.n_weak);
  if (counts.n_weak > 0) {
    const StagePlan plan = split_stage(weak_ids, LabelSource::weak, alloc, env);
    if (variant.proto_from_stage1 > 0) {
      const auto proto_ids =
          std::span<const std::uint64_t>(plan.train_ids).first(variant.proto_from_stage1);
      if (auto init = prototype_init(proto_ids, env)) {
        head = std::move(*init);
      } else {
        add_flag(r, run_flag::degenerate_prototype);
      }
    }
    StageRun stage = run_stage(head, plan, LabelSource::weak, variant.stage1_loss, env,
                               derive_seed(seeds.data, "stage1_batches"), options);
    head = std::move(stage.head);
    weak_report = std::move(stage.report);
    r.logconf_thresholds = std::move(stage.logconf_thresholds);
    r.logconf_chunks = std::move(stage.logconf_chunks);
    r.receipt.weak_ids.insert(r.receipt.weak_ids.end(), weak_ids.begin(), weak_ids.end());
  }

  if (counts.n_hq > 0) {
    const auto rest = perm.subspan(counts.n_weak);
    StagePlan plan;
    if (variant.uncertainty) {
      const std::size_t n_val = alloc.val_size(counts.n_hq);
      plan.val_ids.assign(rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(n_val));
      const auto unlabeled = rest.subspan(n_val);
      std::vector<double> probs;
      probs.reserve(unlabeled.size());
      for (auto id : unlabeled) probs.push_back(head.probability((*env.pool)[id].features));
      for (auto idx : entropy_select(probs, counts.n_hq - n_val)) {
        plan.train_ids.push_back(unlabeled[idx]);
      }
    } else {
      plan = split_stage(rest.first(counts.n_hq), LabelSource::high_quality, alloc, env);
    }
    StageRun stage = run_stage(head, plan, LabelSource::high_quality, LossConfig{}, env,
                               derive_seed(seeds.data, "stage2_batches"), options);
    head = std::move(stage.head);
    hq_report = std::move(stage.report);
    r.receipt.hq_ids.insert(r.receipt.hq_ids.end(), plan.val_ids.begin(), plan.val_ids.end());
    r.receipt.hq_ids.insert(r.receipt.hq_ids.end(), plan.train_ids.begin(), plan.train_ids.end());
  }

  if (weak_report.val_single_class || hq_report.val_single_class) {
    add_flag(r, run_flag::val_single_class);
  }
  r.stages = {std::move(weak_report), std::move(hq_report)};
  finish_result(r, head, env);
  return RunOutput{std::move(head), std::move(r)};
}

}  // namespace

// ---------------------------------------------------------------------------

LabelCounts planned_counts(const MethodSpec& spec, const Allocation& alloc,
                           const CostModel& costs) {
  spec.validate();
  alloc.validate(costs);
  switch (spec.kind) {
    case MethodKind::fewshot_proto: {
      const LabelCounts affordable = alloc.counts(costs);
      LabelCounts out;
      out.n_weak = std::min(affordable.n_weak, spec.fewshot_k);
      out.n_hq = std::min(affordable.n_hq, spec.fewshot_k - out.n_weak);
      return out;
    }
    case MethodKind::proto_seq_sft: {
      const ProtoPlan plan = plan_proto(alloc, spec.n_proto, costs, nullptr);
      LabelCounts out = plan.counts;
      if (!plan.from_stage1) out.n_weak += spec.n_proto;
      return out;
    }
    default:
      return sequential_counts(alloc, costs, nullptr);
  }
}

RunOutput run_seq_sft(const Allocation& alloc, const Environment& env, RunSeeds seeds,
                      std::size_t seed_index, const RunOptions& options) {
  alloc.validate(env.costs);
  RunResult r = start_result("seq_sft", alloc, seed_index);
  const LabelCounts counts = sequential_counts(alloc, env.costs, &r);
  require_pool(counts.n_weak + counts.n_hq, env);
  const auto perm = permuted_candidates(env, seeds.data);
  return sequential(std::move(r), alloc, counts, env, seeds, perm, SeqVariant{}, options);
}

RunOutput run_logconf_seq_sft(const Allocation& alloc, double alpha_max, const Environment& env,
                              RunSeeds seeds, std::size_t seed_index, const RunOptions& options) {
  MethodSpec spec;
  spec.kind = MethodKind::logconf_seq_sft;
  spec.alpha_max = alpha_max;
  spec.validate();
  alloc.validate(env.costs);
  RunResult r = start_result(spec.name(), alloc, seed_index);
  const LabelCounts counts = sequential_counts(alloc, env.costs, &r);
  require_pool(counts.n_weak + counts.n_hq, env);
  const auto perm = permuted_candidates(env, seeds.data);
  SeqVariant variant;
  variant.stage1_loss.kind = LossKind::log_confidence;
  variant.stage1_loss.alpha_max = alpha_max;
  variant.stage1_loss.minibatch_size = spec.logconf_minibatch;
  return sequential(std::move(r), alloc, counts, env, seeds, perm, variant, options);
}

RunOutput run_unc_sampling_seq_sft(const Allocation& alloc, const Environment& env,
                                   RunSeeds seeds, std::size_t seed_index) {
  alloc.validate(env.costs);
  RunResult r = start_result("unc_sampling_seq_sft", alloc, seed_index);
  const LabelCounts counts = sequential_counts(alloc, env.costs, &r);
  require_pool(counts.n_weak + counts.n_hq, env);
  const auto perm = permuted_candidates(env, seeds.data);
  SeqVariant variant;
  if (counts.n_weak == 0) {
    add_flag(r, run_flag::no_stage1_model);
  } else {
    variant.uncertainty = true;
  }
  return sequential(std::move(r), alloc, counts, env, seeds, perm, variant, RunOptions{});
}

RunOutput run_proto_seq_sft(const Allocation& alloc, std::size_t n_proto, const Environment& env,
                            RunSeeds seeds, std::size_t seed_index) {
  MethodSpec spec;
  spec.kind = MethodKind::proto_seq_sft;
  spec.n_proto = n_proto;
  spec.validate();
  alloc.validate(env.costs);

  RunResult r = start_result(spec.name(), alloc, seed_index);
  const ProtoPlan plan = plan_proto(alloc, n_proto, env.costs, &r);
  const LabelCounts& counts = plan.counts;
  require_pool(counts.n_weak + counts.n_hq + (plan.from_stage1 ? 0 : n_proto), env);
  const auto perm = permuted_candidates(env, seeds.data);

  SeqVariant variant;
  if (plan.from_stage1) {
    variant.proto_from_stage1 = n_proto;
  } else {
    // Bought separately, from the back of the candidate order so the stage sets
    // line up with a plain seq_sft run under the same seeds.
    const auto proto_ids = std::span<const std::uint64_t>(perm).last(n_proto);
    variant.init = prototype_init(proto_ids, env);
    if (!variant.init) add_flag(r, run_flag::degenerate_prototype);
    r.receipt.weak_ids.assign(proto_ids.begin(), proto_ids.end());
  }
  return sequential(std::move(r), plan.stages, counts, env, seeds, perm, variant, RunOptions{});
}

RunOutput run_fewshot_proto(const Allocation& alloc, std::size_t k, const Environment& env,
                            RunSeeds seeds, std::size_t seed_index) {
  MethodSpec spec;
  spec.kind = MethodKind::fewshot_proto;
  spec.fewshot_k = k;
  const LabelCounts counts = planned_counts(spec, alloc, env.costs);
  if (counts.n_weak + counts.n_hq == 0) {
    throw ValidationError("budget", "cannot afford a single in-context example");
  }
  require_pool(counts.n_weak + counts.n_hq, env);
  RunResult r = start_result(spec.name(), alloc, seed_index);
  const auto perm = permuted_candidates(env, seeds.data);

  std::vector<const Example*> examples;
  std::vector<std::uint8_t> labels;
  std::array<std::size_t, 2> per_class{0, 0};
  for (std::size_t i = 0; i < counts.n_weak + counts.n_hq; ++i) {
    const std::uint64_t id = perm[i];
    const LabelSource source = i < counts.n_weak ? LabelSource::weak : LabelSource::high_quality;
    examples.push_back(&(*env.pool)[id]);
    labels.push_back(harden(target_of(env, id, source)));
    ++per_class[labels.back()];
    (source == LabelSource::weak ? r.receipt.weak_ids : r.receipt.hq_ids).push_back(id);
  }

  const std::size_t dim = env.pool->feature_dim();
  Head classifier;
  std::optional<Prototype> proto;
  if (per_class[0] > 0 && per_class[1] > 0) proto = build_prototype(examples, labels, env.feature_mean);
  if (proto) {
    classifier = prototype_head(*proto, 1.0);
  } else {
    add_flag(r, per_class[0] == 0 || per_class[1] == 0 ? run_flag::constant_classifier
                                                       : run_flag::degenerate_prototype);
    classifier = constant_head(dim, per_class[1] >= per_class[0] ? 1 : 0);
  }
  finish_result(r, classifier, env);
  return RunOutput{std::move(classifier), std::move(r)};
}

RunOutput run_method(const MethodSpec& spec, const Allocation& alloc, const Environment& env,
                     RunSeeds seeds, std::size_t seed_index, const RunOptions& options) {
  spec.validate();
  switch (spec.kind) {
    case MethodKind::seq_sft: return run_seq_sft(alloc, env, seeds, seed_index, options);
    case MethodKind::fewshot_proto:
      return run_fewshot_proto(alloc, spec.fewshot_k, env, seeds, seed_index);
    case MethodKind::proto_seq_sft:
      return run_proto_seq_sft(alloc, spec.n_proto, env, seeds, seed_index);
    case MethodKind::unc_sampling_seq_sft:
      return run_unc_sampling_seq_sft(alloc, env, seeds, seed_index);
    case MethodKind::logconf_seq_sft: {
      MethodSpec s = spec;
      RunOutput out = run_logconf_seq_sft(alloc, spec.alpha_max, env, seeds, seed_index, options);
      out.result.method = s.name();
      return out;
    }
  }
  throw ValidationError("kind", "unhandled method");
}

}  // namespace elicit

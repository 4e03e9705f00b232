#include "elicit/annotators.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <string>

#include "elicit/error.hpp"
#include "elicit/learner.hpp"
#include "elicit/rng.hpp"
#include "elicit/text.hpp"

namespace elicit {

std::string_view to_string(LabelSource source) {
  return source == LabelSource::weak ? "weak" : "high_quality";
}

LabelSource parse_label_source(std::string_view text) {
  if (text == "weak") return LabelSource::weak;
  if (text == "high_quality") return LabelSource::high_quality;
  throw FormatError("unknown label source '" + std::string(text) + "'");
}

void CostModel::validate() const {
  if (weak_cost.micros() <= 0) throw ValidationError("weak_cost", "must be positive");
  if (hq_cost.micros() <= 0) throw ValidationError("hq_cost", "must be positive");
  if (weak_cost > hq_cost) throw ValidationError("weak_cost", "must not exceed hq_cost");
}

Currency label_cost(std::uint64_t n_weak, std::uint64_t n_hq, const CostModel& costs) {
  return costs.weak_cost * static_cast<std::int64_t>(n_weak) +
         costs.hq_cost * static_cast<std::int64_t>(n_hq);
}

// Calibrated with tools/calibrate against the default TaskSpec (dim 256,
// margin 2.5) and the default split; README lists the measured accuracies.
WeakAnnotatorSpec WeakAnnotatorSpec::preset(std::string_view name) {
  WeakAnnotatorSpec spec;
  if (name == "q60") {
    spec.visible_feature_fraction = 0.5;
    spec.input_noise = 2.0;
  } else if (name == "q70") {
    spec.visible_feature_fraction = 0.5;
    spec.input_noise = 0.9;
  } else if (name == "q80") {
    spec.visible_feature_fraction = 0.9;
    spec.input_noise = 0.5;
  } else if (name == "q90") {
    // Strongest weak model the default annotator-train split supports (~0.85).
    spec.visible_feature_fraction = 1.0;
    spec.input_noise = 0.0;
  } else {
    throw ValidationError("weak.preset", "unknown preset '" + std::string(name) +
                                             "' (expected q60, q70, q80 or q90)");
  }
  return spec;
}

void WeakAnnotatorSpec::validate() const {
  if (!(visible_feature_fraction > 0.0 && visible_feature_fraction <= 1.0)) {
    throw ValidationError("visible_feature_fraction", "must be in (0, 1]");
  }
  if (!(input_noise >= 0.0) || !std::isfinite(input_noise)) {
    throw ValidationError("input_noise", "must be finite and nonnegative");
  }
  if (train_epochs == 0) throw ValidationError("train_epochs", "must be positive");
  if (batch_size == 0) throw ValidationError("batch_size", "must be positive");
  if (!(learning_rate > 0.0)) throw ValidationError("learning_rate", "must be positive");
}

WeakAnnotator::WeakAnnotator(std::vector<std::size_t> visible_dims, std::vector<double> weights,
                             double bias, double input_noise, std::uint64_t noise_seed)
    : visible_dims_(std::move(visible_dims)),
      weights_(std::move(weights)),
      bias_(bias),
      input_noise_(input_noise),
      noise_seed_(noise_seed) {
  if (weights_.size() != visible_dims_.size()) {
    throw ValidationError("weights", "one weight per visible dimension required");
  }
}

std::vector<double> WeakAnnotator::view(const Example& example) const {
  std::vector<double> out(visible_dims_.size());
  Rng rng(derive_seed(noise_seed_, "view", example.id));
  for (std::size_t i = 0; i < visible_dims_.size(); ++i) {
    out[i] = example.features[visible_dims_[i]] + input_noise_ * rng.normal();
  }
  return out;
}

double WeakAnnotator::soft_label(const Example& example) const {
  const std::vector<double> v = view(example);
  double z = bias_;
  for (std::size_t i = 0; i < v.size(); ++i) z += weights_[i] * v[i];
  return sigmoid(z);
}

WeakAnnotator train_weak_annotator(const DataPool& pool, std::span<const std::uint64_t> train_ids,
                                   const WeakAnnotatorSpec& spec) {
  spec.validate();
  if (train_ids.empty()) throw ValidationError("annotator_train", "training set is empty");
  if (spec.train_size > 0 && spec.train_size < train_ids.size()) {
    train_ids = train_ids.first(spec.train_size);
  }

  std::array<std::size_t, 2> counts{0, 0};
  for (auto id : train_ids) ++counts[pool.at(id).true_label];
  if (counts[0] == 0 || counts[1] == 0) {
    throw ValidationError("annotator_train", "training set has a single class");
  }

  const std::size_t dim = pool.feature_dim();
  const auto n_visible = static_cast<std::size_t>(
      std::floor(spec.visible_feature_fraction * static_cast<double>(dim) + 1e-9));
  std::vector<std::size_t> dims(dim);
  std::iota(dims.begin(), dims.end(), 0);
  Rng dim_rng(derive_seed(spec.seed, "visible_dims"));
  dim_rng.shuffle(std::span<std::size_t>(dims));
  dims.resize(n_visible);
  std::sort(dims.begin(), dims.end());

  const std::uint64_t noise_seed = derive_seed(spec.seed, "input_noise");
  WeakAnnotator untrained(dims, std::vector<double>(n_visible, 0.0), 0.0, spec.input_noise,
                          noise_seed);

  // The weak learner trains on its own degraded view of each example.
  std::vector<Example> views;
  views.reserve(train_ids.size());
  for (auto id : train_ids) {
    const Example& ex = pool[id];
    views.push_back(Example{ex.id, ex.true_label, untrained.view(ex)});
  }
  std::vector<LabeledExample> train;
  train.reserve(views.size());
  for (const auto& v : views) train.push_back({&v, static_cast<double>(v.true_label)});

  const std::size_t steps_per_epoch = (train.size() + spec.batch_size - 1) / spec.batch_size;
  TrainSchedule schedule;
  schedule.total_steps = spec.train_epochs * steps_per_epoch;
  schedule.batch_size = spec.batch_size;
  schedule.learning_rate = spec.learning_rate;
  StageOptions options;
  options.force_full_schedule = true;
  const StageResult fit = train_stage(Head::zeros(n_visible), train, {}, schedule,
                                      EarlyStopPolicy{}, LossConfig{},
                                      derive_seed(spec.seed, "batch_order"), options);

  return WeakAnnotator(std::move(dims), fit.head.weights, fit.head.bias, spec.input_noise,
                       noise_seed);
}

std::vector<Annotation> annotate(const Annotator& annotator, const DataPool& pool,
                                 std::span<const std::uint64_t> ids) {
  std::vector<Annotation> out;
  out.reserve(ids.size());
  for (auto id : ids) {
    out.push_back({id, annotator.soft_label(pool.at(id)), annotator.source()});
  }
  return out;
}

double measure_weak_accuracy(std::span<const Annotation> annotations, const DataPool& pool) {
  if (annotations.empty()) throw ValidationError("annotations", "nothing to measure");
  std::size_t correct = 0;
  for (const auto& a : annotations) {
    correct += harden(a.soft_label) == pool.at(a.example_id).true_label ? 1 : 0;
  }
  return static_cast<double>(correct) / static_cast<double>(annotations.size());
}

void write_annotations_csv(std::span<const Annotation> annotations, std::ostream& out) {
  out << "id,soft_label,source\n";
  for (const auto& a : annotations) {
    out << a.example_id << ',' << text::format_double(a.soft_label) << ',' << to_string(a.source)
        << '\n';
  }
  if (!out) throw FormatError("failed writing annotations");
}

std::vector<Annotation> read_annotations_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "id,soft_label,source") {
    throw FormatError("annotations CSV must start with header id,soft_label,source");
  }
  std::vector<Annotation> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = text::split_csv(line);
    if (f.size() != 3) throw FormatError("annotations CSV row has wrong field count");
    Annotation a{text::parse_uint(f[0]), text::parse_double(f[1]), parse_label_source(f[2])};
    if (!(a.soft_label >= 0.0 && a.soft_label <= 1.0)) {
      throw FormatError("soft label outside [0, 1]");
    }
    out.push_back(a);
  }
  return out;
}

}  // namespace elicit

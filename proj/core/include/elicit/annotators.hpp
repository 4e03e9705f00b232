#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "elicit/currency.hpp"
#include "elicit/synth_tasks.hpp"

namespace elicit {

enum class LabelSource : std::uint8_t { weak, high_quality };

std::string_view to_string(LabelSource source);
LabelSource parse_label_source(std::string_view text);

/// Hardening rule shared by every accuracy measurement: threshold 0.5, ties
/// go to class 1.
constexpr std::uint8_t harden(double soft_label) { return soft_label >= 0.5 ? 1 : 0; }

struct Annotation {
  std::uint64_t example_id = 0;
  double soft_label = 0.0;
  LabelSource source = LabelSource::weak;

  friend bool operator==(const Annotation&, const Annotation&) = default;
};

struct CostModel {
  Currency weak_cost = Currency::from_micros(100'000);
  Currency hq_cost = Currency::from_micros(1'000'000);

  void validate() const;

  friend bool operator==(const CostModel&, const CostModel&) = default;
};

/// n_weak * weak_cost + n_hq * hq_cost, exact in micro-units.
Currency label_cost(std::uint64_t n_weak, std::uint64_t n_hq, const CostModel& costs);

/// Degradation knobs for the weak labeler. The weak model is a logistic
/// regression that sees only a random subset of representation dimensions, each
/// corrupted by per-example Gaussian noise that is fixed by (seed, example id).
struct WeakAnnotatorSpec {
  double visible_feature_fraction = 1.0;
  double input_noise = 0.0;
  std::size_t train_epochs = 3;
  std::size_t train_size = 0;  // 0 = use every id handed to the trainer
  std::size_t batch_size = 32;
  double learning_rate = 0.05;
  std::uint64_t seed = 0;

  /// Calibrated presets "q60", "q70", "q80", "q90" for the default TaskSpec.
  static WeakAnnotatorSpec preset(std::string_view name);

  void validate() const;
};

class Annotator {
 public:
  virtual ~Annotator() = default;
  virtual LabelSource source() const = 0;
  /// Probability of class 1 in [0, 1].
  virtual double soft_label(const Example& example) const = 0;
};

class OracleAnnotator final : public Annotator {
 public:
  LabelSource source() const override { return LabelSource::high_quality; }
  double soft_label(const Example& example) const override {
    return static_cast<double>(example.true_label);
  }
};

class WeakAnnotator final : public Annotator {
 public:
  WeakAnnotator(std::vector<std::size_t> visible_dims, std::vector<double> weights, double bias,
                double input_noise, std::uint64_t noise_seed);

  LabelSource source() const override { return LabelSource::weak; }
  double soft_label(const Example& example) const override;

  /// The degraded view the weak model sees for this example.
  std::vector<double> view(const Example& example) const;

  std::span<const std::size_t> visible_dims() const { return visible_dims_; }
  std::span<const double> weights() const { return weights_; }
  double bias() const { return bias_; }

 private:
  std::vector<std::size_t> visible_dims_;
  std::vector<double> weights_;
  double bias_;
  double input_noise_;
  std::uint64_t noise_seed_;
};

/// Throws ValidationError on an empty or single-class training set.
WeakAnnotator train_weak_annotator(const DataPool& pool, std::span<const std::uint64_t> train_ids,
                                   const WeakAnnotatorSpec& spec);

/// One annotation per id, in input order.
std::vector<Annotation> annotate(const Annotator& annotator, const DataPool& pool,
                                 std::span<const std::uint64_t> ids);

/// Fraction of annotations whose hardened label matches the true label.
/// Throws ValidationError on an id outside the pool or an empty input.
double measure_weak_accuracy(std::span<const Annotation> annotations, const DataPool& pool);

void write_annotations_csv(std::span<const Annotation> annotations, std::ostream& out);
std::vector<Annotation> read_annotations_csv(std::istream& in);

}  // namespace elicit

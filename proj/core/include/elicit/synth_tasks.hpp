#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace elicit {

/// Parameters of a synthetic binary task. Two Gaussian class clouds are
/// separated by `concept_margin` (in latent standard deviations) along a random
/// unit direction, then pushed through a seeded nonlinear feature map that
/// stands in for a frozen pretrained representation.
struct TaskSpec {
  std::size_t feature_dim = 256;
  double concept_margin = 2.5;
  double representation_noise = 0.0;
  std::size_t pool_size = 7850;
  std::size_t test_size = 2000;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Example {
  std::uint64_t id = 0;
  std::uint8_t true_label = 0;
  std::vector<double> features;
};

/// Immutable collection of examples with dense ids 0..N-1 (id == index).
class DataPool {
 public:
  DataPool() = default;

  /// Throws ValidationError if ids are not dense, feature widths disagree, or
  /// any feature is non-finite.
  DataPool(std::size_t feature_dim, std::vector<Example> examples);

  std::size_t feature_dim() const { return feature_dim_; }
  std::size_t size() const { return examples_.size(); }
  bool empty() const { return examples_.empty(); }
  std::span<const Example> examples() const { return examples_; }
  const Example& operator[](std::uint64_t id) const { return examples_[id]; }
  const Example& at(std::uint64_t id) const;

  /// {count of label 0, count of label 1}
  const std::array<std::size_t, 2>& class_counts() const { return class_counts_; }

  friend bool operator==(const DataPool& a, const DataPool& b);

 private:
  std::size_t feature_dim_ = 0;
  std::vector<Example> examples_;
  std::array<std::size_t, 2> class_counts_{0, 0};
};

bool operator==(const Example& a, const Example& b);

/// Deterministic in `spec.seed`; the returned pool is balanced to within one.
DataPool generate_task(const TaskSpec& spec);

struct SplitPlan {
  std::size_t annotator_train_size = 800;
  std::size_t candidate_pool_size = 5850;
  std::size_t test_size = 2000;

  /// Full-size split (8000 annotator-train, 50500 fresh candidates) scaled by
  /// `scale`; the candidate pool re-includes the annotator-train examples.
  static SplitPlan scaled(double scale, std::size_t test_size);

  void validate() const;
};

/// Id lists, each sorted ascending.
struct Splits {
  std::vector<std::uint64_t> annotator_train;
  std::vector<std::uint64_t> candidate;
  std::vector<std::uint64_t> test;
};

/// Test is exactly balanced and disjoint from the rest; the candidate pool is
/// balanced to within one and contains annotator_train.
Splits make_splits(const DataPool& pool, const SplitPlan& plan, std::uint64_t seed);

}  // namespace elicit

#include "elicit/synth_tasks.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "elicit/error.hpp"
#include "elicit/rng.hpp"

namespace elicit {

namespace {

// Strength of the tanh term in the representation map. Small enough that the
// concept stays close to linearly decodable, large enough that the map is not
// a plain rotation.
constexpr double kWarp = 0.5;

std::vector<double> random_unit(std::size_t dim, Rng& rng) {
  std::vector<double> v(dim);
  double norm = 0.0;
  do {
    norm = 0.0;
    for (auto& x : v) {
      x = rng.normal();
      norm += x * x;
    }
  } while (norm == 0.0);
  norm = std::sqrt(norm);
  for (auto& x : v) x /= norm;
  return v;
}

/// Row-major random orthogonal matrix via Gram-Schmidt on Gaussian rows.
std::vector<double> random_orthogonal(std::size_t dim, Rng& rng) {
  std::vector<double> q(dim * dim);
  for (std::size_t r = 0; r < dim; ++r) {
    double* row = &q[r * dim];
    while (true) {
      for (std::size_t c = 0; c < dim; ++c) row[c] = rng.normal();
      for (std::size_t p = 0; p < r; ++p) {
        const double* prev = &q[p * dim];
        double dot = 0.0;
        for (std::size_t c = 0; c < dim; ++c) dot += row[c] * prev[c];
        for (std::size_t c = 0; c < dim; ++c) row[c] -= dot * prev[c];
      }
      double norm = 0.0;
      for (std::size_t c = 0; c < dim; ++c) norm += row[c] * row[c];
      if (norm > 1e-12) {
        norm = std::sqrt(norm);
        for (std::size_t c = 0; c < dim; ++c) row[c] /= norm;
        break;
      }
    }
  }
  return q;
}

struct Representation {
  std::size_t dim;
  std::vector<double> rotation;  // dim x dim
  std::vector<double> mixing;    // dim x dim
  std::vector<double> phase;     // dim

  void apply(std::span<const double> latent, std::span<double> out) const {
    for (std::size_t r = 0; r < dim; ++r) {
      const double* rot = &rotation[r * dim];
      const double* mix = &mixing[r * dim];
      double linear = 0.0;
      double pre = phase[r];
      for (std::size_t c = 0; c < dim; ++c) {
        linear += rot[c] * latent[c];
        pre += mix[c] * latent[c];
      }
      out[r] = linear + kWarp * std::tanh(pre);
    }
  }
};

Representation make_representation(std::size_t dim, Rng& rng) {
  Representation rep{dim, random_orthogonal(dim, rng), std::vector<double>(dim * dim),
                     std::vector<double>(dim)};
  const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
  for (auto& m : rep.mixing) m = rng.normal() * scale;
  for (auto& p : rep.phase) p = rng.uniform(-1.0, 1.0);
  return rep;
}

}  // namespace

void TaskSpec::validate() const {
  if (feature_dim < 2) throw ValidationError("feature_dim", "must be at least 2");
  if (pool_size < 2) throw ValidationError("pool_size", "must be at least 2");
  if (test_size < 1) throw ValidationError("test_size", "must be positive");
  if (!std::isfinite(concept_margin) || concept_margin < 0.0) {
    throw ValidationError("concept_margin", "must be finite and nonnegative");
  }
  if (!std::isfinite(representation_noise) || representation_noise < 0.0) {
    throw ValidationError("representation_noise", "must be finite and nonnegative");
  }
}

bool operator==(const Example& a, const Example& b) {
  return a.id == b.id && a.true_label == b.true_label && a.features == b.features;
}

DataPool::DataPool(std::size_t feature_dim, std::vector<Example> examples)
    : feature_dim_(feature_dim), examples_(std::move(examples)) {
  for (std::size_t i = 0; i < examples_.size(); ++i) {
    const Example& ex = examples_[i];
    if (ex.id != i) {
      throw ValidationError("examples", "ids must be dense 0..N-1 in order; found id " +
                                            std::to_string(ex.id) + " at position " +
                                            std::to_string(i));
    }
    if (ex.true_label > 1) throw ValidationError("examples", "labels must be 0 or 1");
    if (ex.features.size() != feature_dim_) {
      throw ValidationError("examples", "feature width mismatch at id " + std::to_string(i));
    }
    for (double f : ex.features) {
      if (!std::isfinite(f)) {
        throw ValidationError("examples", "non-finite feature at id " + std::to_string(i));
      }
    }
    ++class_counts_[ex.true_label];
  }
}

const Example& DataPool::at(std::uint64_t id) const {
  if (id >= examples_.size()) {
    throw ValidationError("id", "unknown example id " + std::to_string(id));
  }
  return examples_[id];
}

bool operator==(const DataPool& a, const DataPool& b) {
  return a.feature_dim_ == b.feature_dim_ && a.examples_ == b.examples_;
}

DataPool generate_task(const TaskSpec& spec) {
  spec.validate();
  const std::size_t dim = spec.feature_dim;

  Rng repr_rng(derive_seed(spec.seed, "representation"));
  const std::vector<double> concept_dir = random_unit(dim, repr_rng);
  const Representation rep = make_representation(dim, repr_rng);

  // Exactly balanced label multiset, shuffled.
  std::vector<std::uint8_t> labels(spec.pool_size);
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<std::uint8_t>(i % 2);
  Rng label_rng(derive_seed(spec.seed, "labels"));
  label_rng.shuffle(std::span<std::uint8_t>(labels));

  Rng latent_rng(derive_seed(spec.seed, "latent"));
  Rng noise_rng(derive_seed(spec.seed, "representation_noise"));
  const double half_margin = spec.concept_margin / 2.0;

  std::vector<Example> examples(spec.pool_size);
  std::vector<double> latent(dim);
  for (std::size_t i = 0; i < spec.pool_size; ++i) {
    Example& ex = examples[i];
    ex.id = i;
    ex.true_label = labels[i];
    const double sign = labels[i] ? 1.0 : -1.0;
    for (std::size_t c = 0; c < dim; ++c) {
      latent[c] = sign * half_margin * concept_dir[c] + latent_rng.normal();
    }
    ex.features.assign(dim, 0.0);
    rep.apply(latent, ex.features);
    if (spec.representation_noise > 0.0) {
      for (auto& f : ex.features) f += spec.representation_noise * noise_rng.normal();
    }
  }
  return DataPool(dim, std::move(examples));
}

SplitPlan SplitPlan::scaled(double scale, std::size_t test_size) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw ValidationError("split.scale", "must be positive");
  }
  SplitPlan plan;
  plan.annotator_train_size = static_cast<std::size_t>(std::llround(8000 * scale));
  plan.candidate_pool_size =
      plan.annotator_train_size + static_cast<std::size_t>(std::llround(50500 * scale));
  plan.test_size = test_size;
  return plan;
}

void SplitPlan::validate() const {
  if (annotator_train_size == 0) {
    throw ValidationError("annotator_train_size", "must be positive");
  }
  if (candidate_pool_size < annotator_train_size) {
    throw ValidationError("candidate_pool_size", "must include the annotator-train examples");
  }
  if (test_size == 0 || test_size % 2 != 0) {
    throw ValidationError("test_size", "must be positive and even (the test split is balanced)");
  }
}

Splits make_splits(const DataPool& pool, const SplitPlan& plan, std::uint64_t seed) {
  plan.validate();
  if (plan.test_size + plan.candidate_pool_size > pool.size()) {
    throw ValidationError("split", "plan needs " +
                                       std::to_string(plan.test_size + plan.candidate_pool_size) +
                                       " examples but the pool has " +
                                       std::to_string(pool.size()));
  }

  std::array<std::vector<std::uint64_t>, 2> by_class;
  for (const Example& ex : pool.examples()) by_class[ex.true_label].push_back(ex.id);
  Rng rng(seed);
  for (auto& ids : by_class) rng.shuffle(std::span<std::uint64_t>(ids));

  const std::size_t test_half = plan.test_size / 2;
  for (int c = 0; c < 2; ++c) {
    if (by_class[c].size() < test_half) {
      throw ValidationError("test_size", "class " + std::to_string(c) + " has only " +
                                             std::to_string(by_class[c].size()) +
                                             " examples; a balanced test split needs " +
                                             std::to_string(test_half));
    }
  }

  Splits out;
  for (int c = 0; c < 2; ++c) {
    out.test.insert(out.test.end(), by_class[c].begin(), by_class[c].begin() + test_half);
  }

  // Candidate pool: balanced to within one; the odd slot goes to the class with
  // more examples left (class 1 on a tie).
  const std::size_t cand_lo = plan.candidate_pool_size / 2;
  const std::size_t cand_hi = plan.candidate_pool_size - cand_lo;
  const bool zero_has_more = by_class[0].size() > by_class[1].size();
  const std::array<std::size_t, 2> cand_take =
      zero_has_more ? std::array<std::size_t, 2>{cand_hi, cand_lo}
                    : std::array<std::size_t, 2>{cand_lo, cand_hi};
  for (int c = 0; c < 2; ++c) {
    if (by_class[c].size() - test_half < cand_take[c]) {
      throw ValidationError("candidate_pool_size",
                            "not enough class-" + std::to_string(c) +
                                " examples left for a balanced candidate pool");
    }
  }
  std::vector<std::uint64_t> candidate;
  candidate.reserve(plan.candidate_pool_size);
  for (int c = 0; c < 2; ++c) {
    auto first = by_class[c].begin() + static_cast<std::ptrdiff_t>(test_half);
    candidate.insert(candidate.end(), first, first + static_cast<std::ptrdiff_t>(cand_take[c]));
  }
  rng.shuffle(std::span<std::uint64_t>(candidate));
  out.annotator_train.assign(candidate.begin(),
                             candidate.begin() + static_cast<std::ptrdiff_t>(plan.annotator_train_size));
  out.candidate = std::move(candidate);

  std::sort(out.test.begin(), out.test.end());
  std::sort(out.candidate.begin(), out.candidate.end());
  std::sort(out.annotator_train.begin(), out.annotator_train.end());
  return out;
}

}  // namespace elicit

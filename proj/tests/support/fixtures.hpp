#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "elicit/harness/experiment.hpp"
#include "elicit/methods.hpp"
#include "elicit/synth_tasks.hpp"

namespace elicit::testing {

/// The default task, split and q70 weak labels for master seed 0. Built once.
const harness::Experiment& default_experiment();
const Environment& default_environment();

/// A small, fast task (dim 32, 1200 examples) with q70-style weak labels.
const harness::Experiment& small_experiment();
const Environment& small_environment();

/// Independent logistic-regression fit by Newton's method (tiny ridge for
/// stability). Returns weights followed by the bias.
std::vector<double> fit_logistic_newton(const DataPool& pool, std::span<const std::uint64_t> ids,
                                        double ridge = 1e-6, int iterations = 50);

/// Fraction of `ids` classified correctly by a (weights..., bias) vector.
double linear_accuracy(const DataPool& pool, std::span<const std::uint64_t> ids,
                       std::span<const double> params);

std::unique_ptr<harness::Experiment> make_experiment(const TaskSpec& task, const SplitPlan& split,
                                                     const WeakAnnotatorSpec& weak,
                                                     std::uint64_t master_seed);

}  // namespace elicit::testing

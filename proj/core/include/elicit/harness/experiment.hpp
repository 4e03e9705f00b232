#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

#include "elicit/annotators.hpp"
#include "elicit/methods.hpp"
#include "elicit/synth_tasks.hpp"

namespace elicit::harness {

/// Inputs that determine the pool, its splits, and the weak labels.
struct ExperimentSetup {
  TaskSpec task;
  SplitPlan split;
  WeakAnnotatorSpec weak;
  std::uint64_t master_seed = 0;
};

/// Seeds of every stochastic component, all derived from the master seed.
struct SeedPlan {
  std::uint64_t task = 0;
  std::uint64_t split = 0;
  std::uint64_t weak = 0;

  static SeedPlan from_master(std::uint64_t master_seed);
  /// Data and init seeds of seed index `s`; independent of method, budget and rho.
  static RunSeeds run(std::uint64_t master_seed, std::size_t s);
};

/// A generated pool with its splits and weak annotations of the candidate pool.
/// Held behind a pointer because environments refer to the pool by address.
struct Experiment {
  ExperimentSetup setup;
  DataPool pool;
  Splits splits;
  std::vector<Annotation> weak_annotations;
  double weak_accuracy = 0.0;

  Environment environment(const CostModel& costs, const LearnerConfig& learner) const;
};

std::unique_ptr<Experiment> prepare_experiment(const ExperimentSetup& setup);

/// Rebuilds an experiment from stored artifacts (no regeneration).
std::unique_ptr<Experiment> assemble_experiment(const ExperimentSetup& setup, DataPool pool,
                                                Splits splits,
                                                std::vector<Annotation> weak_annotations);

}  // namespace elicit::harness

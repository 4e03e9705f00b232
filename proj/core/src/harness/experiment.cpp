#include "elicit/harness/experiment.hpp"

#include "elicit/rng.hpp"

namespace elicit::harness {

SeedPlan SeedPlan::from_master(std::uint64_t master_seed) {
  return SeedPlan{derive_seed(master_seed, "task"), derive_seed(master_seed, "split"),
                  derive_seed(master_seed, "weak_annotator")};
}

RunSeeds SeedPlan::run(std::uint64_t master_seed, std::size_t s) {
  return RunSeeds{derive_seed(master_seed, "run_data", s), derive_seed(master_seed, "run_init", s)};
}

Environment Experiment::environment(const CostModel& costs, const LearnerConfig& learner) const {
  return Environment::build(pool, splits, weak_annotations, costs, learner);
}

std::unique_ptr<Experiment> prepare_experiment(const ExperimentSetup& setup) {
  const SeedPlan seeds = SeedPlan::from_master(setup.master_seed);
  TaskSpec task = setup.task;
  task.seed = seeds.task;
  DataPool pool = generate_task(task);
  Splits splits = make_splits(pool, setup.split, seeds.split);

  WeakAnnotatorSpec weak = setup.weak;
  weak.seed = seeds.weak;
  const WeakAnnotator annotator = train_weak_annotator(pool, splits.annotator_train, weak);
  std::vector<Annotation> annotations = annotate(annotator, pool, splits.candidate);
  return assemble_experiment(setup, std::move(pool), std::move(splits), std::move(annotations));
}

std::unique_ptr<Experiment> assemble_experiment(const ExperimentSetup& setup, DataPool pool,
                                                Splits splits,
                                                std::vector<Annotation> weak_annotations) {
  auto exp = std::make_unique<Experiment>();
  exp->setup = setup;
  exp->pool = std::move(pool);
  exp->splits = std::move(splits);
  exp->weak_annotations = std::move(weak_annotations);
  exp->weak_accuracy = measure_weak_accuracy(exp->weak_annotations, exp->pool);
  return exp;
}

}  // namespace elicit::harness

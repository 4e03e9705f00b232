#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "elicit/harness/config.hpp"
#include "elicit/harness/experiment.hpp"
#include "elicit/harness/store.hpp"

namespace elicit::harness {

/// File names inside a run directory.
namespace artifact {
inline constexpr std::string_view config = "config.json";
inline constexpr std::string_view pool = "pool.bin";
inline constexpr std::string_view splits = "splits.csv";
inline constexpr std::string_view weak_annotations = "weak_annotations.csv";
inline constexpr std::string_view generate_manifest = "generate_manifest.json";
inline constexpr std::string_view journal = "journal.csv";
inline constexpr std::string_view sweep_manifest = "sweep_manifest.json";
inline constexpr std::string_view cost_models = "cost_models.csv";
std::string results_file(std::size_t cost_model);
}  // namespace artifact

struct GenerateReport {
  std::string config_hash;
  double weak_accuracy = 0.0;
  std::vector<std::pair<std::string, std::string>> artifact_hashes;  // (file, hash)
};

/// Generates the pool, splits and weak annotations and writes them, with the
/// canonical config and a manifest of artifact hashes, under `dir`.
GenerateReport generate_artifacts(const ExperimentConfig& config, const std::filesystem::path& dir);

/// Reads back what generate_artifacts wrote. Throws ValidationError when the
/// artifacts are missing, were produced by a different config, or do not match
/// their recorded hashes.
std::unique_ptr<Experiment> load_artifacts(const ExperimentConfig& config,
                                           const std::filesystem::path& dir);

/// One (cost model, method, budget, rho, seed) run.
struct Job {
  std::size_t cost_model = 0;
  MethodSpec method;
  Currency budget;
  double rho = 0.0;
  std::size_t seed = 0;

  std::string id() const;
};

/// Every job of the sweep in canonical order: cost model, method, budget, rho,
/// seed. Seed counts follow SweepGrid::seeds_for on the planned label counts;
/// cells the pool cannot support get the base seed count.
std::vector<Job> plan_jobs(const ExperimentConfig& config);

struct SweepOptions {
  std::size_t workers = 1;
  /// Keep completed jobs from an existing journal instead of starting over.
  bool resume = false;
  /// Stop after this many newly executed jobs (simulates an interrupted run).
  std::optional<std::size_t> max_jobs;
  /// Test hook: jobs for which this returns true throw instead of running.
  std::function<bool(const Job&)> inject_failure;
  std::function<void(const std::string&)> log;
};

struct SweepSummary {
  std::size_t total = 0;
  std::size_t reused = 0;
  std::size_t executed = 0;
  std::size_t done = 0;
  std::size_t infeasible = 0;
  std::size_t failed = 0;
  bool complete = false;  // every job has an outcome
  std::vector<std::string> failures;  // "job_id: reason"
};

/// Runs the sweep over artifacts in `dir` and materializes one results CSV per
/// cost model in canonical job order.
SweepSummary run_sweep(const ExperimentConfig& config, const std::filesystem::path& dir,
                       const SweepOptions& options = {});

/// Completed rows per cost model as recorded in the results files.
std::vector<std::vector<ResultRow>> load_results(const ExperimentConfig& config,
                                                 const std::filesystem::path& dir);

/// Worker count from ELICIT_WORKERS, else the hardware concurrency (at least 1).
std::size_t default_workers();

}  // namespace elicit::harness

#include "elicit/harness/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <map>
#include <thread>

#include <nlohmann/json.hpp>

#include "elicit/error.hpp"
#include "elicit/pool_io.hpp"
#include "elicit/text.hpp"

namespace elicit::harness {

namespace fs = std::filesystem;
using nlohmann::json;

std::string artifact::results_file(std::size_t cost_model) {
  return "results_cm" + std::to_string(cost_model) + ".csv";
}

namespace {

fs::path at(const fs::path& dir, std::string_view name) { return dir / std::string(name); }

}  // namespace

GenerateReport generate_artifacts(const ExperimentConfig& config, const fs::path& dir) {
  config.validate();
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw ValidationError("output_dir", "cannot create " + dir.string());
  }

  const auto exp = prepare_experiment(config.setup);
  GenerateReport report;
  report.config_hash = config_hash(config);
  report.weak_accuracy = exp->weak_accuracy;

  write_file_atomic(at(dir, artifact::config), canonical_json(config));
  {
    const fs::path pool_path = at(dir, artifact::pool);
    const fs::path tmp = pool_path.string() + ".tmp";
    save_pool_binary(exp->pool, tmp);
    fs::rename(tmp, pool_path);
  }
  write_splits_csv(exp->splits, at(dir, artifact::splits));
  write_annotations_file(exp->weak_annotations, at(dir, artifact::weak_annotations));

  json artifacts = json::object();
  for (auto name : {artifact::config, artifact::pool, artifact::splits,
                    artifact::weak_annotations}) {
    const std::string hash = file_hash(at(dir, name));
    artifacts[std::string(name)] = hash;
    report.artifact_hashes.emplace_back(std::string(name), hash);
  }
  json manifest = {{"config_hash", report.config_hash},
                   {"weak_accuracy", report.weak_accuracy},
                   {"weak_preset", config.weak_preset},
                   {"pool_size", exp->pool.size()},
                   {"candidate_size", exp->splits.candidate.size()},
                   {"annotator_train_size", exp->splits.annotator_train.size()},
                   {"test_size", exp->splits.test.size()},
                   {"artifacts", artifacts}};
  write_file_atomic(at(dir, artifact::generate_manifest), manifest.dump(2) + "\n");
  return report;
}

std::unique_ptr<Experiment> load_artifacts(const ExperimentConfig& config, const fs::path& dir) {
  const fs::path manifest_path = at(dir, artifact::generate_manifest);
  if (!fs::exists(manifest_path)) {
    throw ValidationError("output_dir", "no generated artifacts in " + dir.string() +
                                            " (run `generate` first)");
  }
  json manifest;
  try {
    manifest = json::parse(read_file(manifest_path));
  } catch (const json::exception& e) {
    throw ValidationError("output_dir", manifest_path.string() + ": " + e.what());
  }
  const std::string hash = config_hash(config);
  if (manifest.value("config_hash", "") != hash) {
    throw ValidationError("output_dir", "artifacts in " + dir.string() +
                                            " were generated from a different config");
  }
  const auto& artifacts = manifest.at("artifacts");
  for (auto name : {artifact::pool, artifact::splits, artifact::weak_annotations}) {
    const fs::path path = at(dir, name);
    if (!fs::exists(path)) {
      throw ValidationError("output_dir", "missing artifact " + path.string());
    }
    if (artifacts.value(std::string(name), "") != file_hash(path)) {
      throw ValidationError("output_dir", "artifact " + path.string() + " does not match its hash");
    }
  }
  return assemble_experiment(config.setup, load_pool_binary(at(dir, artifact::pool)),
                             read_splits_csv(at(dir, artifact::splits)),
                             read_annotations_file(at(dir, artifact::weak_annotations)));
}

std::string Job::id() const {
  return "cm" + std::to_string(cost_model) + "/" + method.name() + "/B" + budget.to_string() +
         "/r" + text::format_double(rho) + "/s" + std::to_string(seed);
}

std::vector<Job> plan_jobs(const ExperimentConfig& config) {
  std::vector<Job> jobs;
  const auto& grid = config.grid;
  for (std::size_t cm = 0; cm < grid.cost_models.size(); ++cm) {
    for (const auto& method : config.methods) {
      for (const auto& budget : grid.budgets) {
        for (double rho : grid.rho_grid) {
          std::size_t seeds = grid.seeds;
          try {
            seeds = grid.seeds_for(
                planned_counts(method, config.allocation(budget, rho), grid.cost_models[cm]));
          } catch (const InsufficientPoolError&) {
          }
          for (std::size_t s = 0; s < seeds; ++s) {
            jobs.push_back(Job{cm, method, budget, rho, s});
          }
        }
      }
    }
  }
  return jobs;
}

std::size_t default_workers() {
  if (const char* env = std::getenv("ELICIT_WORKERS"); env != nullptr && *env != '\0') {
    std::uint64_t n = 0;
    try {
      n = text::parse_uint(env);
    } catch (const std::exception&) {
      throw ValidationError("ELICIT_WORKERS", std::string("not a positive integer: ") + env);
    }
    if (n == 0) throw ValidationError("ELICIT_WORKERS", "must be at least 1");
    return static_cast<std::size_t>(n);
  }
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

namespace {

JournalEntry execute(const Job& job, const ExperimentConfig& config,
                     const std::vector<Environment>& envs, const SweepOptions& options) {
  JournalEntry entry;
  entry.job_id = job.id();
  entry.cost_model = job.cost_model;
  try {
    if (options.inject_failure && options.inject_failure(job)) {
      throw std::runtime_error("injected failure");
    }
    const RunOutput out =
        run_method(job.method, config.allocation(job.budget, job.rho), envs[job.cost_model],
                   SeedPlan::run(config.setup.master_seed, job.seed), job.seed);
    entry.status = JobStatus::done;
    entry.row = ResultRow::from_run(out.result);
  } catch (const InsufficientPoolError& e) {
    entry.status = JobStatus::infeasible;
    entry.reason = e.what();
  } catch (const std::exception& e) {
    entry.status = JobStatus::failed;
    entry.reason = e.what();
  }
  return entry;
}

void write_cost_models(const SweepGrid& grid, const fs::path& path) {
  std::string out = "cost_model,weak_cost,hq_cost\n";
  for (std::size_t i = 0; i < grid.cost_models.size(); ++i) {
    out += std::to_string(i) + "," + grid.cost_models[i].weak_cost.to_string() + "," +
           grid.cost_models[i].hq_cost.to_string() + "\n";
  }
  write_file_atomic(path, out);
}

}  // namespace

SweepSummary run_sweep(const ExperimentConfig& config, const fs::path& dir,
                       const SweepOptions& options) {
  config.validate();
  const std::string hash = config_hash(config);
  const auto exp = load_artifacts(config, dir);

  std::vector<Environment> envs;
  for (const auto& costs : config.grid.cost_models) {
    envs.push_back(exp->environment(costs, config.learner));
  }

  const std::vector<Job> jobs = plan_jobs(config);
  Journal journal(at(dir, artifact::journal), hash);
  std::map<std::string, JournalEntry> prior;
  if (options.resume) {
    prior = journal.load();
  } else {
    journal.reset();
  }

  SweepSummary summary;
  summary.total = jobs.size();
  std::vector<const Job*> pending;
  for (const auto& job : jobs) {
    const auto it = prior.find(job.id());
    if (it != prior.end() && it->second.status != JobStatus::failed) {
      ++summary.reused;
    } else {
      pending.push_back(&job);
    }
  }
  if (options.max_jobs && pending.size() > *options.max_jobs) pending.resize(*options.max_jobs);
  if (options.log) {
    options.log("sweep: " + std::to_string(jobs.size()) + " jobs, " +
                std::to_string(summary.reused) + " reused, " + std::to_string(pending.size()) +
                " to run");
  }

  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> finished{0};
  std::mutex log_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < pending.size(); i = next++) {
      journal.append(execute(*pending[i], config, envs, options));
      const std::size_t n = ++finished;
      if (options.log && (n % 50 == 0 || n == pending.size())) {
        std::lock_guard lock(log_mutex);
        options.log("sweep: " + std::to_string(n) + "/" + std::to_string(pending.size()));
      }
    }
  };
  const std::size_t n_workers = std::clamp<std::size_t>(options.workers, 1, std::max<std::size_t>(1, pending.size()));
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> threads;
    for (std::size_t w = 0; w < n_workers; ++w) threads.emplace_back(worker);
  }
  summary.executed = pending.size();

  const auto entries = journal.load();
  std::vector<std::vector<ResultRow>> rows(config.grid.cost_models.size());
  json infeasible = json::array();
  json failures = json::array();
  std::size_t recorded = 0;
  for (const auto& job : jobs) {
    const auto it = entries.find(job.id());
    if (it == entries.end()) continue;
    ++recorded;
    switch (it->second.status) {
      case JobStatus::done:
        ++summary.done;
        rows[job.cost_model].push_back(it->second.row);
        break;
      case JobStatus::infeasible:
        ++summary.infeasible;
        infeasible.push_back(job.id());
        break;
      case JobStatus::failed:
        ++summary.failed;
        summary.failures.push_back(job.id() + ": " + it->second.reason);
        failures.push_back({{"job", job.id()}, {"reason", it->second.reason}});
        break;
    }
  }
  summary.complete = recorded == jobs.size();

  json results = json::object();
  for (std::size_t cm = 0; cm < rows.size(); ++cm) {
    const fs::path path = at(dir, artifact::results_file(cm));
    write_results_csv(rows[cm], path);
    results[artifact::results_file(cm)] = file_hash(path);
  }
  write_cost_models(config.grid, at(dir, artifact::cost_models));
  json manifest = {{"config_hash", hash},
                   {"jobs", summary.total},
                   {"done", summary.done},
                   {"infeasible", summary.infeasible},
                   {"failed", summary.failed},
                   {"complete", summary.complete},
                   {"results", results},
                   {"infeasible_jobs", infeasible},
                   {"failures", failures}};
  write_file_atomic(at(dir, artifact::sweep_manifest), manifest.dump(2) + "\n");
  return summary;
}

std::vector<std::vector<ResultRow>> load_results(const ExperimentConfig& config,
                                                 const fs::path& dir) {
  std::vector<std::vector<ResultRow>> rows;
  for (std::size_t cm = 0; cm < config.grid.cost_models.size(); ++cm) {
    const fs::path path = at(dir, artifact::results_file(cm));
    if (!fs::exists(path)) {
      throw ValidationError("output_dir", "no results in " + dir.string() + " (run `sweep` first)");
    }
    rows.push_back(read_results_csv(path));
  }
  return rows;
}

}  // namespace elicit::harness

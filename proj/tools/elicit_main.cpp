#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "elicit/harness/commands.hpp"

int main(int argc, char** argv) {
  namespace h = elicit::harness;
  CLI::App app{"Label-budget sweeps over weak and high-quality annotations."};
  app.require_subcommand(1);

  h::CommandOptions options;
  std::string config;
  std::string out;
  std::size_t workers = 0;
  std::size_t max_jobs = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "Experiment config (JSON)")->required();
    sub->add_option("--out", out, "Run directory; overrides output_dir from the config");
  };

  add_common(app.add_subcommand("generate", "Build the pool, splits and weak annotations"));
  auto* sweep = app.add_subcommand("sweep", "Run every (method, budget, rho, seed) cell");
  add_common(sweep);
  CLI::Option* workers_opt = sweep->add_option("--workers", workers,
                    "Concurrent jobs (default: ELICIT_WORKERS, else hardware threads)")
                                   ->check(CLI::PositiveNumber);
  sweep->add_flag("--resume", options.resume, "Keep jobs already recorded in the journal");
  CLI::Option* max_jobs_opt = sweep->add_option("--max-jobs", max_jobs, "Stop after this many new jobs")->group("");
  add_common(app.add_subcommand("report", "Tables, frontier, regimes and plots"));
  add_common(app.add_subcommand("pareto", "Print and write the cost/accuracy frontier"));
  add_common(app.add_subcommand("regimes", "Print and write the regime map"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? h::exit_code::ok : h::exit_code::validation;
  }

  const CLI::App* chosen = app.get_subcommands().front();
  options.config = config;
  if (!out.empty()) options.out = out;
  if (workers_opt->count() > 0) options.workers = workers;
  if (max_jobs_opt->count() > 0) options.max_jobs = max_jobs;
  return h::run_command(chosen->get_name(), options, std::cout, std::cerr);
}

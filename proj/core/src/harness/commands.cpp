#include "elicit/harness/commands.hpp"

#include <ostream>

#include "elicit/error.hpp"
#include "elicit/harness/report.hpp"
#include "elicit/text.hpp"

namespace elicit::harness {

namespace fs = std::filesystem;

namespace {

int cmd_generate(const ExperimentConfig& config, const fs::path& dir, std::ostream& out) {
  const auto report = generate_artifacts(config, dir);
  out << "generated " << dir.string() << " (config " << report.config_hash << ")\n";
  out << "weak accuracy: " << text::format_fixed(report.weak_accuracy, 4);
  if (!config.weak_preset.empty()) out << " (preset " << config.weak_preset << ")";
  out << "\n";
  for (const auto& [name, hash] : report.artifact_hashes) out << "  " << name << "  " << hash << "\n";
  return exit_code::ok;
}

int cmd_sweep(const ExperimentConfig& config, const fs::path& dir, const CommandOptions& options,
              std::ostream& out, std::ostream& err) {
  SweepOptions sweep;
  sweep.workers = options.workers ? *options.workers : default_workers();
  sweep.resume = options.resume;
  sweep.max_jobs = options.max_jobs;
  sweep.inject_failure = options.inject_failure;
  sweep.log = [&err](const std::string& line) { err << line << "\n"; };
  const auto s = run_sweep(config, dir, sweep);
  out << "jobs " << s.total << ": " << s.done << " done, " << s.infeasible << " infeasible, "
      << s.failed << " failed (" << s.reused << " reused, " << s.executed << " executed)\n";
  if (!s.complete) out << "sweep incomplete; rerun with --resume to finish\n";
  for (const auto& f : s.failures) err << "failed: " << f << "\n";
  return s.failed > 0 ? exit_code::partial_failure : exit_code::ok;
}

int cmd_report(const ExperimentConfig& config, const fs::path& dir, std::ostream& out) {
  const auto files = write_report(config, dir);
  out << read_file(dir / "report.txt");
  out << "wrote";
  for (const auto& f : files) out << " " << f;
  out << "\n";
  return exit_code::ok;
}

template <typename Fn>
int per_cost_model(const ExperimentConfig& config, const fs::path& dir, Fn&& fn) {
  const auto results = load_results(config, dir);
  std::size_t total = 0;
  for (std::size_t cm = 0; cm < results.size(); ++cm) {
    check_ledger(results[cm], config.grid.cost_models[cm]);
    total += results[cm].size();
    if (!results[cm].empty()) fn(cm, cells_of(results[cm], cm));
  }
  if (total == 0) throw ValidationError("results", "store in " + dir.string() + " has no rows");
  return exit_code::ok;
}

std::string cost_label(const CostModel& c) {
  return "weak cost " + c.weak_cost.to_string() + ", high-quality cost " + c.hq_cost.to_string();
}

int cmd_pareto(const ExperimentConfig& config, const fs::path& dir, std::ostream& out) {
  return per_cost_model(config, dir, [&](std::size_t cm, const std::vector<CellStats>& cells) {
    const std::string csv = frontier_csv(cells, cm);
    write_file_atomic(dir / ("frontier_cm" + std::to_string(cm) + ".csv"), csv);
    out << "cost model " << cm << " (" << cost_label(config.grid.cost_models[cm]) << ")\n";
    out << "  cost        accuracy  method  rho  budget\n";
    for (const auto& p : frontier_of(cells)) {
      out << "  " << text::format_fixed(p.cost, 3) << "  " << text::format_fixed(p.accuracy, 4)
          << "  " << p.provenance.method << "  " << text::format_double(p.provenance.rho) << "  "
          << p.provenance.budget.to_string() << "\n";
    }
  });
}

int cmd_regimes(const ExperimentConfig& config, const fs::path& dir, std::ostream& out) {
  return per_cost_model(config, dir, [&](std::size_t cm, const std::vector<CellStats>& cells) {
    const auto regimes = regime_map(cells);
    write_file_atomic(dir / ("regimes_cm" + std::to_string(cm) + ".csv"), regimes_csv(regimes, cm));
    out << "cost model " << cm << " (" << cost_label(config.grid.cost_models[cm]) << ")\n"
        << regimes_text(regimes);
  });
}

}  // namespace

int run_command(std::string_view command, const CommandOptions& options, std::ostream& out,
                std::ostream& err) {
  try {
    if (command != "generate" && command != "sweep" && command != "report" &&
        command != "pareto" && command != "regimes") {
      throw ValidationError("command", "unknown command '" + std::string(command) + "'");
    }
    if (options.workers && *options.workers == 0) {
      throw ValidationError("workers", "must be at least 1");
    }
    const ExperimentConfig config = load_config(options.config);
    const fs::path dir = options.out ? *options.out : config.output_dir;
    if (command == "generate") return cmd_generate(config, dir, out);
    if (command == "sweep") return cmd_sweep(config, dir, options, out, err);
    if (command == "report") return cmd_report(config, dir, out);
    if (command == "pareto") return cmd_pareto(config, dir, out);
    return cmd_regimes(config, dir, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::validation;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::validation;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return exit_code::internal;
  }
}

}  // namespace elicit::harness

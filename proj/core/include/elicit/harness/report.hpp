#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "elicit/econ.hpp"
#include "elicit/harness/config.hpp"
#include "elicit/harness/store.hpp"

namespace elicit::harness {

/// Throws ValidationError("ledger", ...) naming the first row whose cost is not
/// exactly label_cost(n_weak, n_hq).
void check_ledger(std::span<const ResultRow> rows, const CostModel& costs);

std::vector<CellStats> cells_of(std::span<const ResultRow> rows, std::size_t cost_model);

/// Best cell per (budget, method) under the budget, as text and CSV. Text
/// entries read "acc ± std (rho)" in percent.
std::string budget_table_text(std::span<const CellStats> cells,
                              std::span<const std::string> methods,
                              std::span<const Currency> budgets);
std::string budget_table_csv(std::span<const CellStats> cells, std::span<const std::string> methods,
                             std::span<const Currency> budgets, std::size_t cost_model);

std::string frontier_csv(std::span<const CellStats> cells, std::size_t cost_model);

struct RegimeEntry {
  std::string method;
  Regime regime;
};

/// Regime per (method, budget) for every budget whose rho curve includes 0 and 1.
std::vector<RegimeEntry> regime_map(std::span<const CellStats> cells);
std::string regimes_csv(std::span<const RegimeEntry> regimes, std::size_t cost_model);
std::string regimes_text(std::span<const RegimeEntry> regimes);

/// Accuracy against mean cost on a log axis, points colored by weak-label
/// fraction with one marker shape per method, frontier drawn as a step line.
/// The legend lists only methods with at least one frontier point.
std::string frontier_svg(std::span<const CellStats> cells, const std::string& title);

/// Methods named in an SVG's legend, in legend order.
std::vector<std::string> svg_legend_methods(const std::string& svg);

/// One panel per budget: accuracy against weak labels used for one method.
std::string curves_svg(std::span<const CellStats> cells, const std::string& method,
                       const std::string& title);

/// Writes every report artifact for the results in `dir`; returns the file names.
/// Throws ValidationError on an empty store or a ledger mismatch.
std::vector<std::string> write_report(const ExperimentConfig& config,
                                      const std::filesystem::path& dir);

}  // namespace elicit::harness

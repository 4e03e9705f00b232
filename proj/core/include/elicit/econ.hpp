#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "elicit/currency.hpp"
#include "elicit/methods.hpp"

namespace elicit {

struct SweepGrid {
  std::vector<Currency> budgets;
  std::vector<double> rho_grid;
  std::size_t seeds = 3;
  std::size_t expanded_seeds = 7;
  std::size_t small_stage_threshold = 10;
  std::vector<CostModel> cost_models;

  /// Budgets 4^k + 1 for k = 1..6 and rho in {0, 0.1, ..., 0.9, 0.99, 1}.
  static SweepGrid defaults();

  /// Seed count for a cell: `expanded_seeds` when the smaller executed stage
  /// has at most `small_stage_threshold` labels, otherwise `seeds`.
  std::size_t seeds_for(const LabelCounts& counts) const;

  void validate() const;
};

struct Provenance {
  std::string method;
  double rho = 0.0;
  Currency budget;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct ParetoPoint {
  double cost = 0.0;
  double accuracy = 0.0;
  Provenance provenance;

  friend bool operator==(const ParetoPoint&, const ParetoPoint&) = default;
};

/// Non-dominated subset sorted by cost. Among exact (cost, accuracy)
/// duplicates only the earliest input survives.
std::vector<ParetoPoint> pareto_frontier(std::span<const ParetoPoint> points);

enum class RegimeKind { quantity_dominant, quality_dominant, mixed };

std::string_view to_string(RegimeKind kind);

struct Regime {
  RegimeKind kind = RegimeKind::quality_dominant;
  double optimal_rho = 0.0;
  Currency budget;
};

struct CurvePoint {
  double rho = 0.0;
  double mean = 0.0;
  double std = 0.0;
  std::size_t n = 0;
};

/// Argmax of mean accuracy over rho (ties toward smaller rho). An interior
/// optimum only counts as mixed if it beats both endpoints by more than one
/// pooled standard error; otherwise the better endpoint wins (ties to rho = 0).
/// Throws ValidationError on an empty curve or one missing rho = 0 or 1.
Regime classify_regime(std::span<const CurvePoint> curve, Currency budget);

struct Summary {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation over seeds
  std::size_t n = 0;
};

/// Throws ValidationError on empty input.
Summary summarize(std::span<const double> values);

struct CellKey {
  std::string method;
  std::int64_t budget_micros = 0;
  double rho = 0.0;
  std::size_t cost_model = 0;

  auto operator<=>(const CellKey&) const = default;
};

struct CellStats {
  CellKey key;
  Summary accuracy;
  double mean_cost = 0.0;
  double mean_n_weak = 0.0;
  double mean_n_hq = 0.0;

  /// n_weak / (n_weak + n_hq) of the mean counts.
  double count_fraction() const;
};

/// Groups results by (method, budget, rho, cost model) and summarizes each.
std::vector<CellStats> aggregate(std::span<const RunResult> results, std::size_t cost_model = 0);

/// Highest mean accuracy for `method` among cells whose mean realized cost is at
/// most `budget` (ties toward lower cost, then smaller rho).
std::optional<CellStats> best_under_budget(std::span<const CellStats> cells,
                                           std::string_view method, Currency budget);

/// Frontier over cell means, provenance carried through.
std::vector<ParetoPoint> frontier_of(std::span<const CellStats> cells);

/// Spearman rank correlation with midranks for ties. NaN when either side is
/// constant.
double spearman(std::span<const double> x, std::span<const double> y);

struct TTest {
  double t = 0.0;
  double p_value = 1.0;  // one-sided, H1: mean > mu0
  std::size_t df = 0;
};

/// One-sample one-sided t-test of H0: mean <= mu0.
TTest one_sided_t_test(std::span<const double> samples, double mu0);

}  // namespace elicit

#include "elicit/econ.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

#include "elicit/error.hpp"

namespace elicit {

SweepGrid SweepGrid::defaults() {
  SweepGrid grid;
  for (int k = 1; k <= 6; ++k) {
    grid.budgets.push_back(Currency::from_units(std::pow(4.0, k) + 1.0));
  }
  for (int i = 0; i <= 9; ++i) grid.rho_grid.push_back(i / 10.0);
  grid.rho_grid.push_back(0.99);
  grid.rho_grid.push_back(1.0);
  grid.cost_models.push_back(CostModel{});
  return grid;
}

std::size_t SweepGrid::seeds_for(const LabelCounts& counts) const {
  std::size_t smaller = 0;
  if (counts.n_weak > 0 && counts.n_hq > 0) {
    smaller = std::min(counts.n_weak, counts.n_hq);
  } else {
    smaller = std::max(counts.n_weak, counts.n_hq);
  }
  return smaller <= small_stage_threshold ? std::max(seeds, expanded_seeds) : seeds;
}

void SweepGrid::validate() const {
  if (budgets.empty()) throw ValidationError("budgets", "must not be empty");
  for (std::size_t i = 0; i < budgets.size(); ++i) {
    if (budgets[i].micros() <= 0) throw ValidationError("budgets", "must be positive");
    if (i > 0 && !(budgets[i - 1] < budgets[i])) {
      throw ValidationError("budgets", "must be strictly increasing");
    }
  }
  if (rho_grid.empty()) throw ValidationError("rho_grid", "must not be empty");
  for (double rho : rho_grid) {
    if (!(rho >= 0.0 && rho <= 1.0)) throw ValidationError("rho_grid", "values must be in [0, 1]");
  }
  if (std::find(rho_grid.begin(), rho_grid.end(), 0.0) == rho_grid.end() ||
      std::find(rho_grid.begin(), rho_grid.end(), 1.0) == rho_grid.end()) {
    throw ValidationError("rho_grid", "must contain 0 and 1");
  }
  if (seeds == 0) throw ValidationError("seeds", "must be at least 1");
  if (cost_models.empty()) throw ValidationError("cost_models", "must not be empty");
  for (const auto& c : cost_models) c.validate();
}

// ---------------------------------------------------------------------------

std::vector<ParetoPoint> pareto_frontier(std::span<const ParetoPoint> points) {
  for (const auto& p : points) {
    if (!std::isfinite(p.cost) || !std::isfinite(p.accuracy)) {
      throw ValidationError("points", "cost and accuracy must be finite");
    }
  }
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (points[a].cost != points[b].cost) return points[a].cost < points[b].cost;
    return points[a].accuracy > points[b].accuracy;
  });
  std::vector<ParetoPoint> frontier;
  double best = -std::numeric_limits<double>::infinity();
  for (auto i : order) {
    if (points[i].accuracy > best) {
      frontier.push_back(points[i]);
      best = points[i].accuracy;
    }
  }
  return frontier;
}

std::string_view to_string(RegimeKind kind) {
  switch (kind) {
    case RegimeKind::quantity_dominant: return "quantity_dominant";
    case RegimeKind::quality_dominant: return "quality_dominant";
    case RegimeKind::mixed: return "mixed";
  }
  return "?";
}

Regime classify_regime(std::span<const CurvePoint> curve, Currency budget) {
  if (curve.empty()) throw ValidationError("curve", "must not be empty");
  std::vector<CurvePoint> sorted(curve.begin(), curve.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const CurvePoint& a, const CurvePoint& b) { return a.rho < b.rho; });
  const CurvePoint& lo = sorted.front();
  const CurvePoint& hi = sorted.back();
  if (lo.rho != 0.0 || hi.rho != 1.0) {
    throw ValidationError("curve", "needs points at rho = 0 and rho = 1");
  }

  std::size_t arg = 0;
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i].mean > sorted[arg].mean) arg = i;
  }

  auto endpoint = [&]() {
    if (hi.mean > lo.mean) return Regime{RegimeKind::quantity_dominant, 1.0, budget};
    return Regime{RegimeKind::quality_dominant, 0.0, budget};
  };
  if (arg == 0 || arg == sorted.size() - 1) return endpoint();

  const CurvePoint& mid = sorted[arg];
  auto pooled_se = [](const CurvePoint& a, const CurvePoint& b) {
    if (a.n == 0 || b.n == 0) return std::numeric_limits<double>::infinity();
    return std::sqrt(a.std * a.std / static_cast<double>(a.n) +
                     b.std * b.std / static_cast<double>(b.n));
  };
  const bool beats_lo = mid.mean - lo.mean > pooled_se(mid, lo);
  const bool beats_hi = mid.mean - hi.mean > pooled_se(mid, hi);
  if (beats_lo && beats_hi) return Regime{RegimeKind::mixed, mid.rho, budget};
  return endpoint();
}

Summary summarize(std::span<const double> values) {
  if (values.empty()) throw ValidationError("values", "cannot summarize an empty sample");
  Summary s;
  s.n = values.size();
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(s.n);
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(ss / static_cast<double>(s.n));
  return s;
}

double CellStats::count_fraction() const {
  const double total = mean_n_weak + mean_n_hq;
  return total > 0.0 ? mean_n_weak / total : 0.0;
}

std::vector<CellStats> aggregate(std::span<const RunResult> results, std::size_t cost_model) {
  std::map<CellKey, std::vector<const RunResult*>> groups;
  for (const auto& r : results) {
    groups[CellKey{r.method, r.budget.micros(), r.rho, cost_model}].push_back(&r);
  }
  std::vector<CellStats> out;
  out.reserve(groups.size());
  for (const auto& [key, members] : groups) {
    CellStats stats;
    stats.key = key;
    std::vector<double> acc;
    for (const auto* r : members) {
      acc.push_back(r->test_accuracy);
      stats.mean_cost += r->cost.units();
      stats.mean_n_weak += static_cast<double>(r->n_weak);
      stats.mean_n_hq += static_cast<double>(r->n_hq);
    }
    const auto n = static_cast<double>(members.size());
    stats.accuracy = summarize(acc);
    stats.mean_cost /= n;
    stats.mean_n_weak /= n;
    stats.mean_n_hq /= n;
    out.push_back(std::move(stats));
  }
  return out;
}

std::optional<CellStats> best_under_budget(std::span<const CellStats> cells,
                                           std::string_view method, Currency budget) {
  const double limit = budget.units();
  const CellStats* best = nullptr;
  for (const auto& c : cells) {
    if (c.key.method != method || c.mean_cost > limit) continue;
    if (!best) {
      best = &c;
      continue;
    }
    const auto rank = [](const CellStats& s) {
      return std::make_tuple(-s.accuracy.mean, s.mean_cost, s.key.rho, s.key.budget_micros);
    };
    if (rank(c) < rank(*best)) best = &c;
  }
  if (!best) return std::nullopt;
  return *best;
}

std::vector<ParetoPoint> frontier_of(std::span<const CellStats> cells) {
  std::vector<ParetoPoint> points;
  points.reserve(cells.size());
  for (const auto& c : cells) {
    points.push_back(ParetoPoint{c.mean_cost, c.accuracy.mean,
                                 Provenance{c.key.method, c.key.rho,
                                            Currency::from_micros(c.key.budget_micros)}});
  }
  return pareto_frontier(points);
}

namespace {

std::vector<double> midranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ValidationError("y", "length differs from x");
  if (x.size() < 2) throw ValidationError("x", "needs at least two points");
  const auto rx = midranks(x);
  const auto ry = midranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sxy / std::sqrt(sxx * syy);
}

TTest one_sided_t_test(std::span<const double> samples, double mu0) {
  if (samples.size() < 2) throw ValidationError("samples", "t-test needs at least two samples");
  const double n = static_cast<double>(samples.size());
  const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : samples) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  TTest out;
  out.df = samples.size() - 1;
  if (sd == 0.0) {
    out.t = mean > mu0 ? std::numeric_limits<double>::infinity()
                       : (mean < mu0 ? -std::numeric_limits<double>::infinity() : 0.0);
    out.p_value = mean > mu0 ? 0.0 : 1.0;
    return out;
  }
  out.t = (mean - mu0) / (sd / std::sqrt(n));
  const boost::math::students_t dist(static_cast<double>(out.df));
  out.p_value = boost::math::cdf(boost::math::complement(dist, out.t));
  return out;
}

}  // namespace elicit

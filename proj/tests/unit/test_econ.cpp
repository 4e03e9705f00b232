#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "elicit/econ.hpp"
#include "elicit/error.hpp"
#include "elicit/rng.hpp"

namespace elicit {
namespace {

ParetoPoint pt(double cost, double acc, std::string method = "m") {
  return ParetoPoint{cost, acc, Provenance{std::move(method), 0.0, Currency{}}};
}

/// Quadratic reference: p survives unless some q is at least as good on both
/// axes and strictly better on one, or is an exact duplicate seen earlier.
std::vector<ParetoPoint> brute_frontier(const std::vector<ParetoPoint>& pts) {
  std::vector<ParetoPoint> out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    bool keep = true;
    for (std::size_t j = 0; j < pts.size() && keep; ++j) {
      if (i == j) continue;
      const auto& p = pts[i];
      const auto& q = pts[j];
      const bool weakly = q.cost <= p.cost && q.accuracy >= p.accuracy;
      const bool strictly = q.cost < p.cost || q.accuracy > p.accuracy;
      if (weakly && (strictly || j < i)) keep = false;
    }
    if (keep) out.push_back(pts[i]);
  }
  std::sort(out.begin(), out.end(),
            [](const ParetoPoint& a, const ParetoPoint& b) { return a.cost < b.cost; });
  return out;
}

std::vector<ParetoPoint> random_points(Rng& rng, std::size_t n) {
  std::vector<ParetoPoint> pts;
  for (std::size_t i = 0; i < n; ++i) {
    // Small integer grids force ties in both coordinates.
    pts.push_back(pt(static_cast<double>(rng.below(20)), static_cast<double>(rng.below(20)) / 20.0,
                     "m" + std::to_string(i)));
  }
  return pts;
}

TEST(Pareto, Examples) {
  const std::vector<ParetoPoint> pts{pt(1, 0.6), pt(2, 0.5), pt(3, 0.8), pt(3, 0.7), pt(5, 0.8)};
  const auto f = pareto_frontier(pts);
  ASSERT_EQ(f.size(), 2u);
  EXPECT_EQ(f[0], pts[0]);
  EXPECT_EQ(f[1], pts[2]);
  EXPECT_TRUE(pareto_frontier(std::vector<ParetoPoint>{}).empty());
}

TEST(Pareto, DuplicateKeepsEarliest) {
  const std::vector<ParetoPoint> pts{pt(1, 0.6, "a"), pt(1, 0.6, "b")};
  const auto f = pareto_frontier(pts);
  ASSERT_EQ(f.size(), 1u);
  EXPECT_EQ(f[0].provenance.method, "a");
}

TEST(Pareto, RejectsNonFinite) {
  const std::vector<ParetoPoint> pts{pt(1, NAN)};
  EXPECT_THROW(pareto_frontier(pts), ValidationError);
}

TEST(Pareto, MatchesBruteForce) {
  Rng rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    const auto pts = random_points(rng, 1 + rng.below(60));
    ASSERT_EQ(pareto_frontier(pts), brute_frontier(pts)) << "trial " << trial;
  }
}

TEST(Pareto, Properties) {
  Rng rng(4);
  for (int trial = 0; trial < 300; ++trial) {
    auto pts = random_points(rng, 2 + rng.below(40));
    const auto f = pareto_frontier(pts);
    // Idempotent, and strictly increasing in both coordinates.
    EXPECT_EQ(pareto_frontier(f), f);
    for (std::size_t i = 1; i < f.size(); ++i) {
      EXPECT_LT(f[i - 1].cost, f[i].cost);
      EXPECT_LT(f[i - 1].accuracy, f[i].accuracy);
    }
    // Adding a dominated point changes nothing.
    auto more = pts;
    const auto& anchor = f[rng.below(f.size())];
    more.push_back(pt(anchor.cost + 1.0, anchor.accuracy - 0.01, "dominated"));
    EXPECT_EQ(pareto_frontier(more), f);
    // Adding a point that dominates everything leaves only it.
    more.push_back(pt(-1.0, 2.0, "best"));
    const auto g = pareto_frontier(more);
    ASSERT_EQ(g.size(), 1u);
    EXPECT_EQ(g[0].provenance.method, "best");
  }
}

CurvePoint cp(double rho, double mean, double std = 0.0, std::size_t n = 5) {
  return CurvePoint{rho, mean, std, n};
}

TEST(Regime, Examples) {
  const Currency b = Currency::from_units(17);
  const std::vector<CurvePoint> mixed{cp(0, 0.8), cp(0.5, 0.85), cp(1, 0.7)};
  const Regime r = classify_regime(mixed, b);
  EXPECT_EQ(r.kind, RegimeKind::mixed);
  EXPECT_EQ(r.optimal_rho, 0.5);
  EXPECT_EQ(r.budget, b);

  const std::vector<CurvePoint> rising{cp(0, 0.6), cp(0.5, 0.7), cp(1, 0.8)};
  EXPECT_EQ(classify_regime(rising, b).kind, RegimeKind::quantity_dominant);
  EXPECT_EQ(classify_regime(rising, b).optimal_rho, 1.0);

  const std::vector<CurvePoint> falling{cp(1, 0.6), cp(0, 0.8), cp(0.5, 0.7)};
  EXPECT_EQ(classify_regime(falling, b).kind, RegimeKind::quality_dominant);

  const std::vector<CurvePoint> tie{cp(0, 0.7), cp(0.5, 0.6), cp(1, 0.7)};
  EXPECT_EQ(classify_regime(tie, b).kind, RegimeKind::quality_dominant);
}

TEST(Regime, InteriorPeakWithinNoiseIsNotMixed) {
  const Currency b = Currency::from_units(65);
  // Peak beats rho = 0 by 0.02; pooled SE is sqrt(2 * 0.05^2 / 5) ~ 0.0316.
  const std::vector<CurvePoint> noisy{cp(0, 0.80, 0.05), cp(0.5, 0.82, 0.05), cp(1, 0.70, 0.05)};
  EXPECT_EQ(classify_regime(noisy, b).kind, RegimeKind::quality_dominant);
  const std::vector<CurvePoint> clear{cp(0, 0.80, 0.05), cp(0.5, 0.84, 0.05), cp(1, 0.70, 0.05)};
  EXPECT_EQ(classify_regime(clear, b).kind, RegimeKind::mixed);
}

TEST(Regime, RequiresBothEndpoints) {
  const std::vector<CurvePoint> missing{cp(0, 0.8), cp(0.5, 0.85)};
  EXPECT_THROW(classify_regime(missing, Currency{}), ValidationError);
  EXPECT_THROW(classify_regime(std::vector<CurvePoint>{}, Currency{}), ValidationError);
}

TEST(Summary, PopulationStd) {
  const std::vector<double> v{1, 2, 3, 4};
  const Summary s = summarize(v);
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_DOUBLE_EQ(s.std, std::sqrt(1.25));
  EXPECT_EQ(s.n, 4u);
  EXPECT_THROW(summarize(std::vector<double>{}), ValidationError);
}

RunResult result(std::string method, double budget, double rho, std::size_t nw, std::size_t nh,
                 double acc) {
  RunResult r;
  r.method = std::move(method);
  r.budget = Currency::from_units(budget);
  r.rho = rho;
  r.n_weak = nw;
  r.n_hq = nh;
  r.cost = label_cost(nw, nh, CostModel{});
  r.test_accuracy = acc;
  return r;
}

TEST(Aggregate, GroupsAndSummarizes) {
  const std::vector<RunResult> rs{
      result("a", 10, 0.5, 50, 5, 0.7), result("a", 10, 0.5, 50, 5, 0.8),
      result("a", 10, 1.0, 100, 0, 0.6), result("b", 10, 0.5, 40, 6, 0.9)};
  const auto cells = aggregate(rs);
  ASSERT_EQ(cells.size(), 3u);
  EXPECT_EQ(cells[0].key.method, "a");
  EXPECT_EQ(cells[0].key.rho, 0.5);
  EXPECT_NEAR(cells[0].accuracy.mean, 0.75, 1e-12);
  EXPECT_NEAR(cells[0].accuracy.std, 0.05, 1e-12);
  EXPECT_EQ(cells[0].accuracy.n, 2u);
  EXPECT_DOUBLE_EQ(cells[0].mean_cost, 10.0);
  EXPECT_NEAR(cells[0].count_fraction(), 50.0 / 55.0, 1e-12);

  const auto best = best_under_budget(cells, "a", Currency::from_units(10));
  ASSERT_TRUE(best);
  EXPECT_EQ(best->key.rho, 0.5);
  EXPECT_FALSE(best_under_budget(cells, "a", Currency::from_units(9)));
  EXPECT_FALSE(best_under_budget(cells, "c", Currency::from_units(100)));

  const auto f = frontier_of(cells);
  ASSERT_EQ(f.size(), 1u);
  EXPECT_EQ(f[0].provenance.method, "b");
  EXPECT_EQ(f[0].provenance.budget, Currency::from_units(10));
}

TEST(Spearman, Examples) {
  const std::vector<double> a{1, 2, 2, 3, 5};
  const std::vector<double> b{5, 3, 3, 2, 1};
  EXPECT_NEAR(spearman(a, b), -1.0, 1e-12);
  const std::vector<double> c{1, 2, 3, 4};
  const std::vector<double> d{1, 3, 2, 4};
  EXPECT_NEAR(spearman(c, d), 0.8, 1e-12);
  const std::vector<double> flat{2, 2, 2, 2};
  EXPECT_TRUE(std::isnan(spearman(c, flat)));
  EXPECT_THROW(spearman(c, a), ValidationError);
}

TEST(TTest, ReferenceValues) {
  const std::vector<double> x{0.71, 0.74, 0.69, 0.77, 0.73};
  const TTest a = one_sided_t_test(x, 0.70);
  EXPECT_NEAR(a.t, 2.06418738616856, 1e-10);
  EXPECT_NEAR(a.p_value, 0.05396941114613827, 1e-10);
  EXPECT_EQ(a.df, 4u);
  const std::vector<double> y{1, 2, 3, 4, 5};
  const TTest b = one_sided_t_test(y, 2.0);
  EXPECT_NEAR(b.t, 1.414213562373095, 1e-12);
  EXPECT_NEAR(b.p_value, 0.11509982054024936, 1e-10);
}

TEST(TTest, ConstantSamplesAndErrors) {
  const std::vector<double> c{0.75, 0.75, 0.75};
  EXPECT_EQ(one_sided_t_test(c, 0.7).p_value, 0.0);
  EXPECT_EQ(one_sided_t_test(c, 0.9).p_value, 1.0);
  EXPECT_THROW(one_sided_t_test(std::vector<double>{0.5}, 0.0), ValidationError);
}

TEST(SweepGrid, Defaults) {
  const SweepGrid g = SweepGrid::defaults();
  ASSERT_EQ(g.budgets.size(), 6u);
  EXPECT_EQ(g.budgets.front(), Currency::from_units(5));
  EXPECT_EQ(g.budgets.back(), Currency::from_units(4097));
  EXPECT_EQ(g.rho_grid.size(), 12u);
  EXPECT_EQ(g.rho_grid[10], 0.99);
  EXPECT_NO_THROW(g.validate());
}

TEST(SweepGrid, Validate) {
  SweepGrid g = SweepGrid::defaults();
  g.budgets = {Currency::from_units(5), Currency::from_units(5)};
  EXPECT_THROW(g.validate(), ValidationError);
  g = SweepGrid::defaults();
  g.rho_grid = {0.0, 0.5};
  EXPECT_THROW(g.validate(), ValidationError);
  g = SweepGrid::defaults();
  g.seeds = 0;
  EXPECT_THROW(g.validate(), ValidationError);
}

TEST(SweepGrid, SeedsForUsesSmallerExecutedStage) {
  SweepGrid g;
  EXPECT_EQ(g.seeds_for({85, 8}), 7u);
  EXPECT_EQ(g.seeds_for({850, 80}), 3u);
  EXPECT_EQ(g.seeds_for({0, 8}), 7u);
  EXPECT_EQ(g.seeds_for({640, 0}), 3u);
  EXPECT_EQ(g.seeds_for({11, 10}), 7u);
}

}  // namespace
}  // namespace elicit

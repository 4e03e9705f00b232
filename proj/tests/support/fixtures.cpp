#include "fixtures.hpp"

#include <cmath>

#include <Eigen/Dense>

namespace elicit::testing {

std::unique_ptr<harness::Experiment> make_experiment(const TaskSpec& task, const SplitPlan& split,
                                                     const WeakAnnotatorSpec& weak,
                                                     std::uint64_t master_seed) {
  harness::ExperimentSetup setup{task, split, weak, master_seed};
  return harness::prepare_experiment(setup);
}

const harness::Experiment& default_experiment() {
  static const auto exp = make_experiment(TaskSpec{}, SplitPlan{},
                                          WeakAnnotatorSpec::preset("q70"), 0);
  return *exp;
}

const Environment& default_environment() {
  static const Environment env = default_experiment().environment(CostModel{}, LearnerConfig{});
  return env;
}

const harness::Experiment& small_experiment() {
  static const auto exp = [] {
    TaskSpec task;
    task.feature_dim = 32;
    task.pool_size = 1200;
    task.test_size = 200;
    SplitPlan split{100, 900, 200};
    WeakAnnotatorSpec weak;
    weak.visible_feature_fraction = 0.5;
    weak.input_noise = 0.9;
    return make_experiment(task, split, weak, 3);
  }();
  return *exp;
}

const Environment& small_environment() {
  static const Environment env = small_experiment().environment(CostModel{}, LearnerConfig{});
  return env;
}

std::vector<double> fit_logistic_newton(const DataPool& pool, std::span<const std::uint64_t> ids,
                                        double ridge, int iterations) {
  const auto n = static_cast<Eigen::Index>(ids.size());
  const auto d = static_cast<Eigen::Index>(pool.feature_dim());
  Eigen::MatrixXd X(n, d + 1);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Example& e = pool[ids[static_cast<std::size_t>(i)]];
    for (Eigen::Index j = 0; j < d; ++j) X(i, j) = e.features[static_cast<std::size_t>(j)];
    X(i, d) = 1.0;
    y(i) = e.true_label;
  }
  Eigen::VectorXd w = Eigen::VectorXd::Zero(d + 1);
  for (int it = 0; it < iterations; ++it) {
    const Eigen::VectorXd p = (1.0 + (-(X * w).array()).exp()).inverse().matrix();
    const Eigen::VectorXd s = (p.array() * (1.0 - p.array())).max(1e-12).matrix();
    Eigen::VectorXd grad = X.transpose() * (p - y) + ridge * w;
    Eigen::MatrixXd hess = X.transpose() * s.asDiagonal() * X;
    hess.diagonal().array() += ridge;
    const Eigen::VectorXd step = hess.ldlt().solve(grad);
    w -= step;
    if (step.norm() < 1e-10) break;
  }
  return std::vector<double>(w.data(), w.data() + w.size());
}

double linear_accuracy(const DataPool& pool, std::span<const std::uint64_t> ids,
                       std::span<const double> params) {
  std::size_t correct = 0;
  const std::size_t d = pool.feature_dim();
  for (auto id : ids) {
    const Example& e = pool[id];
    double z = params[d];
    for (std::size_t j = 0; j < d; ++j) z += params[j] * e.features[j];
    correct += static_cast<std::uint8_t>(z >= 0.0) == e.true_label;
  }
  return static_cast<double>(correct) / static_cast<double>(ids.size());
}

}  // namespace elicit::testing

#pragma once

#include <memory>
#include <random>

#include "wdrc/bellman.hpp"
#include "wdrc/distributions.hpp"
#include "wdrc/problem.hpp"

namespace testkit {

/// x' = a x + b u + c w on [0, 1] with w in [0, 1], finite actions, cost
/// (x - 0.5)^2 + k u. Coefficients keep successors inside the box.
inline wdrc::ControlProblem small_problem(int nodes = 11, std::vector<double> actions = {0.0, 1.0},
                                          double a = 0.5, double b = 0.3, double c = 0.2, double k = 0.1) {
  wdrc::ControlProblem p;
  p.dynamics = [a, b, c](const wdrc::State& x, const wdrc::Action& u, const wdrc::Disturbance& w) {
    wdrc::State n(1);
    n(0) = a * x(0) + b * u(0) + c * w(0);
    return n;
  };
  p.stage_cost = [k](const wdrc::State& x, const wdrc::Action& u) {
    return (x(0) - 0.5) * (x(0) - 0.5) + k * u(0);
  };
  std::vector<wdrc::Action> acts;
  for (double v : actions) acts.push_back(wdrc::Action::Constant(1, v));
  p.actions = std::make_shared<wdrc::FiniteActionSet>(acts);
  p.discount = 0.9;
  p.disturbance_lower = Eigen::VectorXd::Zero(1);
  p.disturbance_upper = Eigen::VectorXd::Ones(1);
  p.grid = std::make_shared<wdrc::RectGrid>(
      wdrc::RectGrid::uniform(Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1), {nodes}));
  p.growth_b = wdrc::sup_stage_cost(p);
  p.validate();
  return p;
}

inline wdrc::EmpiricalDistribution uniform_samples(int N, std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::MatrixXd atoms(N, 1);
  for (int i = 0; i < N; ++i) atoms(i, 0) = u(rng);
  return wdrc::EmpiricalDistribution(atoms);
}

inline wdrc::DrBellman make_op(const wdrc::ControlProblem& p, const wdrc::EmpiricalDistribution& samples,
                               double theta, int w_points, double order = 1.0,
                               wdrc::BellmanOptions options = {}) {
  const wdrc::GroundMetric metric(order);
  auto wg = wdrc::DisturbanceGrid::uniform(p.disturbance_lower, p.disturbance_upper, {w_points}, samples, metric);
  return wdrc::DrBellman(p, wdrc::Ambiguity{samples, theta, metric}, std::move(wg), options);
}

inline wdrc::GridValueFunction random_value(const std::shared_ptr<const wdrc::RectGrid>& grid, std::mt19937_64& rng,
                                            double scale = 1.0) {
  std::normal_distribution<double> z(0.0, scale);
  Eigen::VectorXd v(static_cast<Eigen::Index>(grid->size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = z(rng);
  return wdrc::GridValueFunction(grid, v);
}

}  // namespace testkit

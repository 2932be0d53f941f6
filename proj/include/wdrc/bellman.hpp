#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "wdrc/distributions.hpp"
#include "wdrc/grid.hpp"
#include "wdrc/problem.hpp"

namespace wdrc {

/// Wasserstein ball around the empirical distribution.
struct Ambiguity {
  EmpiricalDistribution center;
  double theta = 0.0;
  GroundMetric metric{1.0};

  /// theta^p
  double budget() const;
};

/// Finite discretization of the disturbance support used for the inner
/// maximization. Always contains every sample atom of the center.
class DisturbanceGrid {
 public:
  /// `points` holds one disturbance per row. Sample atoms missing from it
  /// are appended.
  DisturbanceGrid(Eigen::MatrixXd points, const EmpiricalDistribution& center, const GroundMetric& metric);

  /// Tensor lattice over [lower, upper] with `counts` points per axis, plus
  /// the sample atoms.
  static DisturbanceGrid uniform(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                                 const std::vector<int>& counts, const EmpiricalDistribution& center,
                                 const GroundMetric& metric);

  Eigen::Index size() const { return points_.rows(); }
  const Eigen::MatrixXd& points() const { return points_; }
  Disturbance point(Eigen::Index j) const { return points_.row(j).transpose(); }
  /// cost(i, j) = d(sample i, point j)^p
  const Eigen::MatrixXd& cost() const { return cost_; }
  /// Per sample: point indices sorted by (cost, index).
  const std::vector<std::vector<int>>& order() const { return order_; }
  /// Index of sample atom i inside the grid.
  int sample_index(Eigen::Index i) const { return sample_index_[static_cast<std::size_t>(i)]; }
  /// Smallest positive pairwise d^p between grid points.
  double min_positive_cost() const { return min_positive_cost_; }

 private:
  Eigen::MatrixXd points_;
  Eigen::MatrixXd cost_;
  std::vector<std::vector<int>> order_;
  std::vector<int> sample_index_;
  double min_positive_cost_ = 0.0;
};

struct BellmanSolveResult {
  double value = 0.0;
  Action action;
  double lambda = 0.0;
  /// l_i = max_w [alpha v(f(x,u,w)) - lambda d(w, sample i)^p]
  Eigen::VectorXd inner;
  /// transitions that left the state box and were clamped
  std::size_t clamped = 0;
};

/// Finitely supported adversary distribution. Entry k places weights(k) at
/// atoms.row(k) and originates from sample source(k).
struct WorstCaseDistribution {
  Eigen::MatrixXd atoms;
  Eigen::VectorXd weights;
  Eigen::VectorXi source;
  /// sum of weights * d(atom, source sample)^p
  double transport_cost = 0.0;
  /// theta^p - transport_cost
  double budget_slack = 0.0;
  double lambda = 0.0;
  /// sample whose mass is split between two atoms, -1 if none
  int split_sample = -1;
  double split_fraction = 0.0;

  EmpiricalDistribution distribution() const { return EmpiricalDistribution(atoms, weights); }
};

struct PolicyStepResult {
  double value = 0.0;
  double lambda = 0.0;
  Eigen::VectorXd inner;
  WorstCaseDistribution worst_case;
  std::size_t clamped = 0;
};

struct PenaltyResult {
  double value = 0.0;
  Action action;
  /// per-sample maximizing disturbances (one row each)
  Eigen::MatrixXd atoms;
};

struct DualityCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double lambda = 0.0;
};

struct BellmanOptions {
  /// Local refinement rounds around the best lattice action (continuous
  /// action sets only). Each round halves the step.
  int refinement_rounds = 0;
  /// 0 selects the default 10 alpha max|v| / min positive d^p, clipped to [1, 1e9].
  double lambda_max = 0.0;
  /// Points of the geometric lambda grid in penalty_duality_check.
  int lambda_grid_points = 200;
};

/// Dual-reformulated Bellman operators on a fixed problem, ambiguity set and
/// disturbance grid. All methods are const and safe to call concurrently.
class DrBellman {
 public:
  DrBellman(ControlProblem problem, Ambiguity ambiguity, DisturbanceGrid w_grid, BellmanOptions options = {});

  const ControlProblem& problem() const { return problem_; }
  const Ambiguity& ambiguity() const { return ambiguity_; }
  const DisturbanceGrid& disturbance_grid() const { return w_grid_; }
  const BellmanOptions& options() const { return options_; }

  /// (Tv)(x): min over actions of the exact minimum over lambda >= 0 of
  /// lambda theta^p + c(x,u) + sum_i q_i max_j [alpha v(f(x,u,w_j)) - lambda c_ij].
  BellmanSolveResult apply_T(const GridValueFunction& v, const State& x) const;

  /// Inner dual solve with the action fixed to u.
  BellmanSolveResult evaluate_action(const GridValueFunction& v, const State& x, const Action& u) const;

  /// (T^pi v)(x) together with the N+1-atom worst-case distribution.
  PolicyStepResult apply_T_pi(const GridValueFunction& v, const State& x, const Action& u) const;
  PolicyStepResult apply_T_pi(const GridValueFunction& v, const State& x, const StationaryPolicy& pi) const;

  /// (T'_lambda v)(x), lambda > 0.
  PenaltyResult apply_T_penalty(const GridValueFunction& v, const State& x, double lambda) const;

  /// lhs = (Tv)(x); rhs = min over a lambda grid refined by golden-section
  /// search of (T'_lambda v)(x) + lambda theta^p.
  DualityCheck penalty_duality_check(const GridValueFunction& v, const State& x) const;

  /// Default lambda_max for a given value function.
  double lambda_max(const GridValueFunction& v) const;

  /// Worst-case distribution at every grid node.
  std::vector<WorstCaseDistribution> extract_worst_case_policy(const StationaryPolicy& pi,
                                                               const GridValueFunction& v_pi) const;

 private:
  void successor_values(const GridValueFunction& v, const State& x, const Action& u, Eigen::VectorXd& h,
                        std::size_t& clamped) const;
  double penalty_value(const GridValueFunction& v, const State& x, double lambda, Action* best_u,
                       Eigen::MatrixXd* atoms) const;

  ControlProblem problem_;
  Ambiguity ambiguity_;
  DisturbanceGrid w_grid_;
  BellmanOptions options_;
};

}  // namespace wdrc

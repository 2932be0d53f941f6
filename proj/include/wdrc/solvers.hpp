#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "wdrc/bellman.hpp"

namespace wdrc {

struct SolverReport {
  int iterations = 0;
  double final_residual = 0.0;
  /// a-priori iteration estimate, 0 when not requested
  int bound_k = 0;
  std::vector<double> history;
  /// seconds since the solver started, one entry per iteration
  std::vector<double> wall_time;
  bool converged = false;
  std::size_t clamped = 0;
};

/// Smallest integer k > (log[(1-tau)^2 eps] - log(2 b tau)) / log tau; 0 if b = 0.
int vi_iteration_bound(double epsilon, double b, double tau);

/// Smallest k >= 1 with k tau^k < (1-tau)^2 eps / (2 r); 0 if r = 0.
int mpi_iteration_bound(double epsilon, double r, double tau);

struct StopRule {
  /// Stop when the weighted sup-norm of successive iterates drops below delta.
  double delta = 1e-6;
  /// When set, run exactly vi_iteration_bound(epsilon, b, tau) sweeps instead.
  std::optional<double> epsilon;
  int max_iter = 10000;
};

struct SweepResult {
  GridValueFunction value;
  /// one action per node (columns)
  Eigen::MatrixXd actions;
  std::size_t clamped = 0;
};

/// Node-wise application of T (parallel over nodes).
SweepResult bellman_sweep(const DrBellman& op, const GridValueFunction& v);
/// Node-wise application of T^pi.
SweepResult policy_sweep(const DrBellman& op, const StationaryPolicy& pi, const GridValueFunction& v);

/// Greedy policy with respect to v, i.e. the minimizers of (Tv)(node).
StationaryPolicy greedy_policy(const DrBellman& op, const GridValueFunction& v);

struct SolveResult {
  GridValueFunction value;
  StationaryPolicy policy;
  SolverReport report;
};

SolveResult value_iteration(const DrBellman& op, const GridValueFunction& v0, const StopRule& stop);

struct EvaluationResult {
  GridValueFunction value;
  SolverReport report;
};

EvaluationResult policy_evaluation(const DrBellman& op, const StationaryPolicy& pi, const GridValueFunction& v0,
                                   double delta, int max_iter);

SolveResult policy_iteration(const DrBellman& op, const StationaryPolicy& pi0, double delta_eval, double delta_stop,
                             int max_outer, int max_eval_iter = 100000);

/// order(k) returns M_k for outer iteration k = 1, 2, ...
using OrderSequence = std::function<int(int)>;
OrderSequence constant_order(int m);

/// When epsilon is given, bound_k = mpi_iteration_bound(epsilon, r, tau)
/// with r = ||v0 - T v0||_xi.
SolveResult modified_policy_iteration(const DrBellman& op, const GridValueFunction& v0, const OrderSequence& order,
                                      double delta_stop, int max_outer, std::optional<double> epsilon = std::nullopt);

/// Writes iteration, residual, wall_time rows.
void write_solver_log(const std::string& path, const SolverReport& report);

}  // namespace wdrc

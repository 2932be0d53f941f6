#pragma once

#include <Eigen/Dense>

namespace wdrc {

/// Optimal solution of a balanced transportation problem
///   min <C, X>  s.t.  X 1 = supply,  X^T 1 = demand,  X >= 0.
/// The potentials satisfy u_i + v_j <= C_ij with equality on the support
/// of X, so sum(supply .* u) + sum(demand .* v) certifies the cost.
struct TransportSolution {
  Eigen::MatrixXd flow;
  double cost = 0.0;
  Eigen::VectorXd source_potential;
  Eigen::VectorXd target_potential;
  int pivots = 0;
};

/// Transportation simplex (u-v / MODI method) started from the northwest
/// corner rule. Dense O(m n) pricing per pivot; intended for a few hundred
/// atoms per side. Supplies and demands must be nonnegative with equal
/// totals (relative mismatch <= 1e-9; the last demand absorbs rounding).
TransportSolution solve_transport(const Eigen::VectorXd& supply, const Eigen::VectorXd& demand,
                                  const Eigen::MatrixXd& cost);

}  // namespace wdrc

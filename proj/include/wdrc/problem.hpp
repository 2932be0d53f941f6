#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wdrc/grid.hpp"

namespace wdrc {

using Action = Eigen::VectorXd;
using Disturbance = Eigen::VectorXd;

using Dynamics = std::function<State(const State& x, const Action& u, const Disturbance& w)>;
using StageCost = std::function<double(const State& x, const Action& u)>;

/// Admissible-action map U(x). The outer minimization of the Bellman
/// operators scans candidates(x); continuous sets additionally allow local
/// refinement around the best candidate through project().
class ActionSpace {
 public:
  virtual ~ActionSpace() = default;

  virtual Eigen::Index dimension() const = 0;
  virtual std::vector<Action> candidates(const State& x) const = 0;
  virtual bool contains(const State& x, const Action& u, double tol = 1e-9) const = 0;

  /// false for enumerated sets; refinement is then skipped.
  virtual bool continuous() const { return false; }
  /// Nearest admissible action (continuous sets only).
  virtual Action project(const State& x, const Action& u) const;
  /// Spacing of the candidate lattice at x, used as the first refinement step.
  virtual double lattice_step(const State& x) const;
};

/// Explicit state-independent list of actions.
class FiniteActionSet final : public ActionSpace {
 public:
  explicit FiniteActionSet(std::vector<Action> actions);

  Eigen::Index dimension() const override;
  std::vector<Action> candidates(const State& x) const override;
  bool contains(const State& x, const Action& u, double tol = 1e-9) const override;

 private:
  std::vector<Action> actions_;
};

/// Fixed box [lower, upper] scanned on a tensor lattice.
class BoxActionSet final : public ActionSpace {
 public:
  BoxActionSet(Eigen::VectorXd lower, Eigen::VectorXd upper, std::vector<int> counts);

  Eigen::Index dimension() const override { return lower_.size(); }
  std::vector<Action> candidates(const State& x) const override;
  bool contains(const State& x, const Action& u, double tol = 1e-9) const override;
  bool continuous() const override { return true; }
  Action project(const State& x, const Action& u) const override;
  double lattice_step(const State& x) const override;

 private:
  Eigen::VectorXd lower_, upper_;
  std::vector<int> counts_;
  std::vector<Action> lattice_;
};

/// {u >= 0 : sum(u) <= budget(x)} with budget(x) = max(x(coordinate), 0).
/// Candidates are u = budget * s for s on the simplex lattice with step
/// 1/divisions.
class BudgetActionSet final : public ActionSpace {
 public:
  BudgetActionSet(Eigen::Index dimension, int divisions, Eigen::Index coordinate = 0);

  Eigen::Index dimension() const override { return dim_; }
  std::vector<Action> candidates(const State& x) const override;
  bool contains(const State& x, const Action& u, double tol = 1e-9) const override;
  bool continuous() const override { return true; }
  Action project(const State& x, const Action& u) const override;
  double lattice_step(const State& x) const override;

  double budget(const State& x) const;

 private:
  Eigen::Index dim_;
  int divisions_;
  Eigen::Index coordinate_;
  std::vector<Action> fractions_;
};

/// A discounted DR control instance together with its computational grid.
struct ControlProblem {
  Dynamics dynamics;
  StageCost stage_cost;
  std::shared_ptr<const ActionSpace> actions;
  double discount = 0.9;
  WeightFunction weight = unit_weight();
  /// |c(x,u)| <= growth_b * xi(x)
  double growth_b = 0.0;
  /// growth of xi along the dynamics; tau = discount * growth_beta
  double growth_beta = 1.0;
  Eigen::VectorXd disturbance_lower;
  Eigen::VectorXd disturbance_upper;
  std::shared_ptr<const RectGrid> grid;

  double tau() const { return discount * growth_beta; }
  Eigen::Index state_dimension() const { return grid ? grid->dimension() : 0; }
  Eigen::Index disturbance_dimension() const { return disturbance_lower.size(); }

  /// Checks the discount/growth constants and spot-checks the cost bound on
  /// every grid node and candidate action. Throws ConfigurationError.
  void validate() const;
};

/// max |c(node, u)| over grid nodes and their candidate actions.
double sup_stage_cost(const ControlProblem& problem);

/// Deterministic stationary policy.
class StationaryPolicy {
 public:
  enum class Kind { Tabular, Linear, Affine };

  /// One action per grid node (columns); lookup interpolates multilinearly.
  static StationaryPolicy tabular(std::shared_ptr<const RectGrid> grid, Eigen::MatrixXd actions);
  /// u = K x
  static StationaryPolicy linear(Eigen::MatrixXd gain);
  /// u = K [x - offset; 1]
  static StationaryPolicy affine(Eigen::MatrixXd gain, Eigen::VectorXd offset);

  Kind kind() const { return kind_; }
  Eigen::Index action_dimension() const;
  Action operator()(const State& x) const;

  /// Tabular only.
  const Eigen::MatrixXd& node_actions() const { return table_; }
  Action at_node(std::size_t flat) const;
  const RectGrid& grid() const { return *grid_; }

  const Eigen::MatrixXd& gain() const { return gain_; }
  const Eigen::VectorXd& offset() const { return offset_; }

  /// Tabular: every stored action lies in U(node). Other kinds: true.
  bool admissible(const ControlProblem& problem, double tol = 1e-9) const;

 private:
  Kind kind_ = Kind::Linear;
  std::shared_ptr<const RectGrid> grid_;
  Eigen::MatrixXd table_;
  Eigen::MatrixXd gain_;
  Eigen::VectorXd offset_;
};

}  // namespace wdrc

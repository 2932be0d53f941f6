#include "wdrc/solvers.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>

#include "wdrc/error.hpp"
#include "wdrc/parallel.hpp"

namespace wdrc {

namespace {

void check_tau(double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw InvalidInputError("iteration bound: tau must lie in (0,1)");
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void record(SolverReport& report, double residual, Clock::time_point t0) {
  if (!std::isfinite(residual)) throw NumericalError("solver: non-finite residual");
  ++report.iterations;
  report.final_residual = residual;
  report.history.push_back(residual);
  report.wall_time.push_back(seconds_since(t0));
}

}  // namespace

int vi_iteration_bound(double epsilon, double b, double tau) {
  check_tau(tau);
  if (!(epsilon > 0.0)) throw InvalidInputError("vi_iteration_bound: epsilon must be > 0");
  if (!(b >= 0.0)) throw InvalidInputError("vi_iteration_bound: b must be >= 0");
  if (b == 0.0) return 0;
  double x = (std::log((1.0 - tau) * (1.0 - tau) * epsilon) - std::log(2.0 * b * tau)) / std::log(tau);
  const double r = std::round(x);
  if (std::abs(x - r) <= 1e-9 * std::max(1.0, std::abs(x))) x = r;
  const double k = std::floor(x) + 1.0;
  if (k > 1e9) throw InvalidInputError("vi_iteration_bound: bound exceeds 1e9 iterations");
  return static_cast<int>(std::max(k, 0.0));
}

int mpi_iteration_bound(double epsilon, double r, double tau) {
  check_tau(tau);
  if (!(epsilon > 0.0)) throw InvalidInputError("mpi_iteration_bound: epsilon must be > 0");
  if (!(r >= 0.0)) throw InvalidInputError("mpi_iteration_bound: r must be >= 0");
  if (r == 0.0) return 0;
  const double threshold = (1.0 - tau) * (1.0 - tau) * epsilon / (2.0 * r);
  for (int k = 1; k < 100000000; ++k)
    if (k * std::pow(tau, k) < threshold) return k;
  throw InvalidInputError("mpi_iteration_bound: bound exceeds 1e8 iterations");
}

SweepResult bellman_sweep(const DrBellman& op, const GridValueFunction& v) {
  const RectGrid& grid = v.grid();
  const auto n = grid.size();
  Eigen::VectorXd values(static_cast<Eigen::Index>(n));
  Eigen::MatrixXd actions(op.problem().actions->dimension(), static_cast<Eigen::Index>(n));
  std::vector<std::size_t> clamped(n, 0);
  parallel_for(n, [&](std::size_t i) {
    const auto r = op.apply_T(v, grid.node(i));
    values(static_cast<Eigen::Index>(i)) = r.value;
    actions.col(static_cast<Eigen::Index>(i)) = r.action;
    clamped[i] = r.clamped;
  });
  SweepResult out{GridValueFunction(v.grid_ptr(), std::move(values)), std::move(actions), 0};
  for (auto c : clamped) out.clamped += c;
  return out;
}

SweepResult policy_sweep(const DrBellman& op, const StationaryPolicy& pi, const GridValueFunction& v) {
  const RectGrid& grid = v.grid();
  const auto n = grid.size();
  const bool tabular = pi.kind() == StationaryPolicy::Kind::Tabular;
  Eigen::VectorXd values(static_cast<Eigen::Index>(n));
  Eigen::MatrixXd actions(pi.action_dimension(), static_cast<Eigen::Index>(n));
  std::vector<std::size_t> clamped(n, 0);
  parallel_for(n, [&](std::size_t i) {
    const State x = grid.node(i);
    const Action u = tabular ? pi.at_node(i) : pi(x);
    const auto r = op.evaluate_action(v, x, u);
    values(static_cast<Eigen::Index>(i)) = r.value;
    actions.col(static_cast<Eigen::Index>(i)) = u;
    clamped[i] = r.clamped;
  });
  SweepResult out{GridValueFunction(v.grid_ptr(), std::move(values)), std::move(actions), 0};
  for (auto c : clamped) out.clamped += c;
  return out;
}

StationaryPolicy greedy_policy(const DrBellman& op, const GridValueFunction& v) {
  auto sweep = bellman_sweep(op, v);
  return StationaryPolicy::tabular(v.grid_ptr(), std::move(sweep.actions));
}

SolveResult value_iteration(const DrBellman& op, const GridValueFunction& v0, const StopRule& stop) {
  const auto t0 = Clock::now();
  const auto& problem = op.problem();
  const WeightFunction& xi = problem.weight;
  SolverReport report;
  GridValueFunction v = v0;

  if (stop.epsilon) {
    report.bound_k = vi_iteration_bound(*stop.epsilon, problem.growth_b, problem.tau());
    for (int k = 0; k < report.bound_k; ++k) {
      auto sweep = bellman_sweep(op, v);
      report.clamped += sweep.clamped;
      record(report, weighted_sup_norm_diff(sweep.value, v, xi), t0);
      v = std::move(sweep.value);
    }
    report.converged = true;
    auto last = bellman_sweep(op, v);
    return {std::move(v), StationaryPolicy::tabular(v0.grid_ptr(), std::move(last.actions)), std::move(report)};
  }

  Eigen::MatrixXd actions;
  while (report.iterations < stop.max_iter) {
    auto sweep = bellman_sweep(op, v);
    report.clamped += sweep.clamped;
    const double res = weighted_sup_norm_diff(sweep.value, v, xi);
    record(report, res, t0);
    v = std::move(sweep.value);
    actions = std::move(sweep.actions);
    if (res < stop.delta) {
      report.converged = true;
      break;
    }
  }
  if (actions.size() == 0) actions = bellman_sweep(op, v).actions;
  return {std::move(v), StationaryPolicy::tabular(v0.grid_ptr(), std::move(actions)), std::move(report)};
}

EvaluationResult policy_evaluation(const DrBellman& op, const StationaryPolicy& pi, const GridValueFunction& v0,
                                   double delta, int max_iter) {
  if (!(delta > 0.0)) throw InvalidInputError("policy_evaluation: delta must be > 0");
  const auto t0 = Clock::now();
  SolverReport report;
  GridValueFunction v = v0;
  while (report.iterations < max_iter) {
    auto sweep = policy_sweep(op, pi, v);
    report.clamped += sweep.clamped;
    const double res = weighted_sup_norm_diff(sweep.value, v, op.problem().weight);
    record(report, res, t0);
    v = std::move(sweep.value);
    if (res < delta) {
      report.converged = true;
      break;
    }
  }
  return {std::move(v), std::move(report)};
}

SolveResult policy_iteration(const DrBellman& op, const StationaryPolicy& pi0, double delta_eval, double delta_stop,
                             int max_outer, int max_eval_iter) {
  const auto t0 = Clock::now();
  const auto& xi = op.problem().weight;
  SolverReport report;
  StationaryPolicy pi = pi0;
  GridValueFunction v = GridValueFunction::constant(op.problem().grid, 0.0);
  std::optional<GridValueFunction> previous;
  for (int k = 0; k < max_outer; ++k) {
    auto eval = policy_evaluation(op, pi, previous ? *previous : v, delta_eval, max_eval_iter);
    report.clamped += eval.report.clamped;
    const double res = previous ? weighted_sup_norm_diff(eval.value, *previous, xi)
                                : std::numeric_limits<double>::infinity();
    v = std::move(eval.value);
    // the evaluation of pi0 itself is not counted as an outer iteration
    if (previous) {
      record(report, res, t0);
      if (res < delta_stop) {
        report.converged = true;
        break;
      }
    }
    previous = v;
    auto sweep = bellman_sweep(op, v);
    report.clamped += sweep.clamped;
    pi = StationaryPolicy::tabular(v.grid_ptr(), std::move(sweep.actions));
  }
  return {std::move(v), std::move(pi), std::move(report)};
}

OrderSequence constant_order(int m) {
  if (m < 1) throw InvalidInputError("order sequence: M_k must be >= 1");
  return [m](int) { return m; };
}

SolveResult modified_policy_iteration(const DrBellman& op, const GridValueFunction& v0, const OrderSequence& order,
                                      double delta_stop, int max_outer, std::optional<double> epsilon) {
  const auto t0 = Clock::now();
  const auto& xi = op.problem().weight;
  SolverReport report;
  GridValueFunction v = v0;
  Eigen::MatrixXd actions;
  for (int k = 1; k <= max_outer; ++k) {
    auto improve = bellman_sweep(op, v);
    report.clamped += improve.clamped;
    if (k == 1 && epsilon)
      report.bound_k = mpi_iteration_bound(*epsilon, weighted_sup_norm_diff(v, improve.value, xi), op.problem().tau());
    const StationaryPolicy pi = StationaryPolicy::tabular(v.grid_ptr(), improve.actions);
    const int m = order(k);
    if (m < 1) throw InvalidInputError("modified_policy_iteration: M_k must be >= 1");
    // the first application of T^pi_k to v_{k-1} is T v_{k-1}
    GridValueFunction w = std::move(improve.value);
    for (int s = 1; s < m; ++s) {
      auto step = policy_sweep(op, pi, w);
      report.clamped += step.clamped;
      w = std::move(step.value);
    }
    const double res = weighted_sup_norm_diff(w, v, xi);
    record(report, res, t0);
    v = std::move(w);
    actions = std::move(improve.actions);
    if (res < delta_stop) {
      report.converged = true;
      break;
    }
  }
  if (actions.size() == 0) actions = bellman_sweep(op, v).actions;
  return {std::move(v), StationaryPolicy::tabular(v0.grid_ptr(), std::move(actions)), std::move(report)};
}

void write_solver_log(const std::string& path, const SolverReport& report) {
  std::ofstream out(path);
  if (!out) throw ConfigurationError("cannot write solver log " + path);
  out.precision(17);
  out << "iteration,residual,wall_time\n";
  for (std::size_t k = 0; k < report.history.size(); ++k)
    out << k + 1 << "," << report.history[k] << "," << (k < report.wall_time.size() ? report.wall_time[k] : 0.0)
        << "\n";
}

}  // namespace wdrc

#include "wdrc/bellman.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>

#include "wdrc/error.hpp"
#include "wdrc/parallel.hpp"

namespace wdrc {

double Ambiguity::budget() const { return std::pow(theta, metric.order()); }

DisturbanceGrid::DisturbanceGrid(Eigen::MatrixXd points, const EmpiricalDistribution& center,
                                 const GroundMetric& metric) {
  if (center.size() == 0) throw InvalidInputError("disturbance grid: empty sample set");
  if (points.rows() > 0 && points.cols() != center.dimension())
    throw InvalidInputError("disturbance grid: dimension differs from the samples");
  std::vector<Eigen::VectorXd> rows;
  rows.reserve(static_cast<std::size_t>(points.rows() + center.size()));
  for (Eigen::Index j = 0; j < points.rows(); ++j) rows.push_back(points.row(j).transpose());
  sample_index_.resize(static_cast<std::size_t>(center.size()));
  for (Eigen::Index i = 0; i < center.size(); ++i) {
    const Eigen::VectorXd a = center.atom(i);
    int found = -1;
    for (std::size_t j = 0; j < rows.size(); ++j)
      if ((rows[j] - a).cwiseAbs().maxCoeff() <= 1e-12) {
        found = static_cast<int>(j);
        break;
      }
    if (found < 0) {
      rows.push_back(a);
      found = static_cast<int>(rows.size()) - 1;
    }
    sample_index_[static_cast<std::size_t>(i)] = found;
  }
  points_.resize(static_cast<Eigen::Index>(rows.size()), center.dimension());
  for (std::size_t j = 0; j < rows.size(); ++j) points_.row(static_cast<Eigen::Index>(j)) = rows[j].transpose();
  for (const auto& r : rows)
    if (!r.allFinite()) throw InvalidInputError("disturbance grid: non-finite point");

  cost_ = metric.cost_matrix(center.atoms(), points_);
  order_.resize(static_cast<std::size_t>(center.size()));
  for (Eigen::Index i = 0; i < center.size(); ++i) {
    auto& o = order_[static_cast<std::size_t>(i)];
    o.resize(rows.size());
    std::iota(o.begin(), o.end(), 0);
    std::stable_sort(o.begin(), o.end(), [&](int a, int b) { return cost_(i, a) < cost_(i, b); });
  }
  double mpc = std::numeric_limits<double>::infinity();
  for (Eigen::Index a = 0; a < points_.rows(); ++a)
    for (Eigen::Index b = a + 1; b < points_.rows(); ++b) {
      const double c = metric.cost(points_.row(a).transpose(), points_.row(b).transpose());
      if (c > 0.0) mpc = std::min(mpc, c);
    }
  min_positive_cost_ = std::isfinite(mpc) ? mpc : 1.0;
}

DisturbanceGrid DisturbanceGrid::uniform(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                                         const std::vector<int>& counts, const EmpiricalDistribution& center,
                                         const GroundMetric& metric) {
  const RectGrid lattice = RectGrid::uniform(lower, upper, counts);
  return DisturbanceGrid(lattice.nodes().transpose(), center, metric);
}

namespace {

/// Upper envelope of the lines h_j - lambda c_ij for one sample, lambda >= 0.
/// vertex[0] has the smallest cost; vertex.back() maximizes h (smallest cost
/// among ties). Breakpoint t separates vertex t (right) from vertex t+1 (left).
struct Envelope {
  std::vector<int> vertex;
  std::vector<double> breakpoint;
};

void build_envelope(const Eigen::VectorXd& h, const Eigen::MatrixXd& cost, Eigen::Index i,
                    const std::vector<int>& order, Envelope& env) {
  auto& st = env.vertex;
  st.clear();
  for (int j : order) {
    const double cj = cost(i, j), hj = h(j);
    if (!st.empty()) {
      if (hj <= h(st.back())) continue;
      if (cj == cost(i, st.back())) st.pop_back();
    }
    while (st.size() >= 2) {
      const int a = st[st.size() - 2], b = st.back();
      const double lhs = (h(b) - h(a)) * (cj - cost(i, b));
      const double rhs = (hj - h(b)) * (cost(i, b) - cost(i, a));
      if (lhs <= rhs)
        st.pop_back();
      else
        break;
    }
    st.push_back(j);
  }
  env.breakpoint.resize(st.size() - 1);
  for (std::size_t t = 0; t + 1 < st.size(); ++t)
    env.breakpoint[t] = (h(st[t + 1]) - h(st[t])) / (cost(i, st[t + 1]) - cost(i, st[t]));
}

struct DualSolve {
  double lambda = 0.0;
  /// sum_i q_i l_i
  double penalty_sum = 0.0;
  Eigen::VectorXd inner;
  std::vector<int> near, far;
};

struct BreakEvent {
  double lambda;
  int sample;
};

/// Exact minimizer of lambda b + sum_i q_i max_j (h_j - lambda c_ij) over
/// lambda >= 0: the first lambda at which the right-continuous transport
/// budget of the argmax selection drops to b.
DualSolve solve_dual(const Eigen::VectorXd& h, const DisturbanceGrid& g, const Eigen::VectorXd& q, double budget,
                     std::vector<Envelope>& envs) {
  const Eigen::MatrixXd& cost = g.cost();
  const auto n = q.size();
  envs.resize(static_cast<std::size_t>(n));
  std::vector<int> pos(static_cast<std::size_t>(n));
  double b_now = 0.0;
  std::size_t events = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    auto& env = envs[static_cast<std::size_t>(i)];
    build_envelope(h, cost, i, g.order()[static_cast<std::size_t>(i)], env);
    pos[static_cast<std::size_t>(i)] = static_cast<int>(env.vertex.size()) - 1;
    b_now += q(i) * cost(i, env.vertex.back());
    events += env.breakpoint.size();
  }
  const auto exact_budget = [&]() {
    double b = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      b += q(i) * cost(i, envs[static_cast<std::size_t>(i)].vertex[static_cast<std::size_t>(pos[static_cast<std::size_t>(i)])]);
    return b;
  };

  DualSolve out;
  out.near.resize(static_cast<std::size_t>(n));
  out.far.resize(static_cast<std::size_t>(n));
  std::vector<int> far_pos = pos;
  if (b_now > budget) {
    std::vector<BreakEvent> ev;
    ev.reserve(events);
    for (Eigen::Index i = 0; i < n; ++i)
      for (double s : envs[static_cast<std::size_t>(i)].breakpoint) ev.push_back({s, static_cast<int>(i)});
    std::sort(ev.begin(), ev.end(), [](const BreakEvent& a, const BreakEvent& b) {
      return a.lambda < b.lambda || (a.lambda == b.lambda && a.sample < b.sample);
    });
    const double slack_tol = 1e-12 * (1.0 + b_now);
    bool done = false;
    std::size_t k = 0;
    while (k < ev.size() && !done) {
      const double s = ev[k].lambda;
      far_pos = pos;
      std::size_t e = k;
      for (; e < ev.size() && ev[e].lambda == s; ++e) {
        const auto i = static_cast<std::size_t>(ev[e].sample);
        const auto& env = envs[i];
        const int from = pos[i];
        b_now -= q(static_cast<Eigen::Index>(i)) *
                 (cost(ev[e].sample, env.vertex[static_cast<std::size_t>(from)]) -
                  cost(ev[e].sample, env.vertex[static_cast<std::size_t>(from - 1)]));
        pos[i] = from - 1;
      }
      k = e;
      if (b_now <= budget + slack_tol) {
        b_now = exact_budget();
        if (b_now <= budget) {
          out.lambda = s;
          done = true;
        }
      }
    }
    if (!done) throw NumericalError("dual solve: transport budget unattainable on the disturbance grid");
  }

  out.inner.resize(n);
  out.penalty_sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto ii = static_cast<std::size_t>(i);
    const int j = envs[ii].vertex[static_cast<std::size_t>(pos[ii])];
    out.near[ii] = j;
    out.far[ii] = envs[ii].vertex[static_cast<std::size_t>(far_pos[ii])];
    out.inner(i) = h(j) - out.lambda * cost(i, j);
    out.penalty_sum += q(i) * out.inner(i);
  }
  return out;
}

WorstCaseDistribution build_worst_case(const DualSolve& d, const DisturbanceGrid& g, const Eigen::VectorXd& q,
                                       double budget) {
  const Eigen::MatrixXd& cost = g.cost();
  const auto n = q.size();
  WorstCaseDistribution wc;
  wc.lambda = d.lambda;
  double spent = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) spent += q(i) * cost(i, d.near[static_cast<std::size_t>(i)]);

  std::vector<int> chosen(d.near);
  if (d.lambda > 0.0) {
    double deficit = budget - spent;
    for (Eigen::Index i = 0; i < n && deficit > 0.0; ++i) {
      const auto ii = static_cast<std::size_t>(i);
      if (d.far[ii] == d.near[ii]) continue;
      const double delta = q(i) * (cost(i, d.far[ii]) - cost(i, d.near[ii]));
      if (delta <= deficit) {
        chosen[ii] = d.far[ii];
        deficit -= delta;
        spent += delta;
      } else {
        wc.split_sample = static_cast<int>(i);
        wc.split_fraction = deficit / delta;
        spent += deficit;
        deficit = 0.0;
      }
    }
  }

  const Eigen::Index count = n + (wc.split_sample >= 0 ? 1 : 0);
  wc.atoms.resize(count, g.points().cols());
  wc.weights.resize(count);
  wc.source.resize(count);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto ii = static_cast<std::size_t>(i);
    if (static_cast<int>(i) == wc.split_sample) {
      wc.atoms.row(k) = g.points().row(d.near[ii]);
      wc.weights(k) = q(i) * (1.0 - wc.split_fraction);
      wc.source(k++) = static_cast<int>(i);
      wc.atoms.row(k) = g.points().row(d.far[ii]);
      wc.weights(k) = q(i) * wc.split_fraction;
      wc.source(k++) = static_cast<int>(i);
    } else {
      wc.atoms.row(k) = g.points().row(chosen[ii]);
      wc.weights(k) = q(i);
      wc.source(k++) = static_cast<int>(i);
    }
  }
  wc.transport_cost = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto ii = static_cast<std::size_t>(i);
    if (static_cast<int>(i) == wc.split_sample)
      wc.transport_cost += q(i) * ((1.0 - wc.split_fraction) * cost(i, d.near[ii]) + wc.split_fraction * cost(i, d.far[ii]));
    else
      wc.transport_cost += q(i) * cost(i, chosen[ii]);
  }
  wc.budget_slack = budget - wc.transport_cost;
  return wc;
}

std::string describe(const State& x) {
  std::ostringstream s;
  s << "(" << x.transpose() << ")";
  return s.str();
}

/// Candidate scan followed by coordinate pattern search on continuous sets.
template <typename Eval>
std::pair<Action, double> minimize_over_actions(const ActionSpace& space, const State& x, int rounds, Eval&& eval) {
  const auto cands = space.candidates(x);
  if (cands.empty()) throw ConfigurationError("bellman: empty action candidate set at " + describe(x));
  Action best = cands.front();
  double best_value = std::numeric_limits<double>::infinity();
  for (const auto& u : cands) {
    const double val = eval(u);
    if (val < best_value) {
      best_value = val;
      best = u;
    }
  }
  if (!space.continuous() || rounds <= 0) return {best, best_value};
  double step = 0.5 * space.lattice_step(x);
  for (int r = 0; r < rounds && step > 0.0; ++r, step *= 0.5) {
    bool moved = true;
    while (moved) {
      moved = false;
      for (Eigen::Index k = 0; k < best.size(); ++k)
        for (double sign : {-1.0, 1.0}) {
          Action trial = best;
          trial(k) += sign * step;
          trial = space.project(x, trial);
          if ((trial - best).cwiseAbs().maxCoeff() == 0.0) continue;
          const double val = eval(trial);
          if (val < best_value - 1e-14 * (1.0 + std::abs(best_value))) {
            best_value = val;
            best = trial;
            moved = true;
          }
        }
    }
  }
  return {best, best_value};
}

}  // namespace

DrBellman::DrBellman(ControlProblem problem, Ambiguity ambiguity, DisturbanceGrid w_grid, BellmanOptions options)
    : problem_(std::move(problem)),
      ambiguity_(std::move(ambiguity)),
      w_grid_(std::move(w_grid)),
      options_(options) {
  if (!(ambiguity_.theta >= 0.0)) throw InvalidInputError("bellman: theta must be >= 0");
  if (!problem_.grid || !problem_.actions || !problem_.dynamics || !problem_.stage_cost)
    throw ConfigurationError("bellman: incomplete control problem");
  if (w_grid_.cost().rows() != ambiguity_.center.size())
    throw InvalidInputError("bellman: disturbance grid was built for a different sample set");
}

void DrBellman::successor_values(const GridValueFunction& v, const State& x, const Action& u, Eigen::VectorXd& h,
                                 std::size_t& clamped) const {
  const auto G = w_grid_.size();
  h.resize(G);
  const double alpha = problem_.discount;
  for (Eigen::Index j = 0; j < G; ++j) {
    const State next = problem_.dynamics(x, u, w_grid_.point(j));
    bool c = false;
    const double val = v.evaluate_clamped(next, &c);
    if (c) ++clamped;
    if (!std::isfinite(val) || !next.allFinite())
      throw NumericalError("bellman: non-finite value at successor state " + describe(next) + " of state " +
                           describe(x));
    h(j) = alpha * val;
  }
}

BellmanSolveResult DrBellman::evaluate_action(const GridValueFunction& v, const State& x, const Action& u) const {
  Eigen::VectorXd h;
  std::vector<Envelope> envs;
  BellmanSolveResult r;
  successor_values(v, x, u, h, r.clamped);
  const DualSolve d = solve_dual(h, w_grid_, ambiguity_.center.weights(), ambiguity_.budget(), envs);
  const double c = problem_.stage_cost(x, u);
  r.value = d.lambda * ambiguity_.budget() + c + d.penalty_sum;
  r.action = u;
  r.lambda = d.lambda;
  r.inner = d.inner;
  return r;
}

BellmanSolveResult DrBellman::apply_T(const GridValueFunction& v, const State& x) const {
  Eigen::VectorXd h;
  std::vector<Envelope> envs;
  std::size_t clamped = 0;
  const double budget = ambiguity_.budget();
  const auto& q = ambiguity_.center.weights();
  const auto eval = [&](const Action& u) {
    successor_values(v, x, u, h, clamped);
    const DualSolve d = solve_dual(h, w_grid_, q, budget, envs);
    return d.lambda * budget + problem_.stage_cost(x, u) + d.penalty_sum;
  };
  const auto [u, value] = minimize_over_actions(*problem_.actions, x, options_.refinement_rounds, eval);
  (void)value;
  BellmanSolveResult r = evaluate_action(v, x, u);
  r.clamped += clamped;
  return r;
}

PolicyStepResult DrBellman::apply_T_pi(const GridValueFunction& v, const State& x, const Action& u) const {
  Eigen::VectorXd h;
  std::vector<Envelope> envs;
  PolicyStepResult r;
  successor_values(v, x, u, h, r.clamped);
  const auto& q = ambiguity_.center.weights();
  const double budget = ambiguity_.budget();
  const DualSolve d = solve_dual(h, w_grid_, q, budget, envs);
  r.value = d.lambda * budget + problem_.stage_cost(x, u) + d.penalty_sum;
  r.lambda = d.lambda;
  r.inner = d.inner;
  r.worst_case = build_worst_case(d, w_grid_, q, budget);
  return r;
}

PolicyStepResult DrBellman::apply_T_pi(const GridValueFunction& v, const State& x, const StationaryPolicy& pi) const {
  return apply_T_pi(v, x, pi(x));
}

double DrBellman::penalty_value(const GridValueFunction& v, const State& x, double lambda, Action* best_u,
                                Eigen::MatrixXd* atoms) const {
  Eigen::VectorXd h;
  std::size_t clamped = 0;
  const auto& q = ambiguity_.center.weights();
  const Eigen::MatrixXd& cost = w_grid_.cost();
  const auto n = q.size();
  const auto per_sample = [&](Eigen::Index i, int* arg) {
    double best = -std::numeric_limits<double>::infinity();
    int at = -1;
    for (int j : w_grid_.order()[static_cast<std::size_t>(i)]) {
      const double val = h(j) - lambda * cost(i, j);
      if (val > best) {
        best = val;
        at = j;
      }
    }
    if (arg) *arg = at;
    return best;
  };
  const auto eval = [&](const Action& u) {
    successor_values(v, x, u, h, clamped);
    double acc = problem_.stage_cost(x, u);
    for (Eigen::Index i = 0; i < n; ++i) acc += q(i) * per_sample(i, nullptr);
    return acc;
  };
  const auto [u, value] = minimize_over_actions(*problem_.actions, x, options_.refinement_rounds, eval);
  if (best_u) *best_u = u;
  if (atoms) {
    successor_values(v, x, u, h, clamped);
    atoms->resize(n, w_grid_.points().cols());
    for (Eigen::Index i = 0; i < n; ++i) {
      int at = -1;
      per_sample(i, &at);
      atoms->row(i) = w_grid_.points().row(at);
    }
  }
  return value;
}

PenaltyResult DrBellman::apply_T_penalty(const GridValueFunction& v, const State& x, double lambda) const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InvalidInputError("apply_T_penalty: lambda must be > 0");
  PenaltyResult r;
  r.value = penalty_value(v, x, lambda, &r.action, &r.atoms);
  return r;
}

double DrBellman::lambda_max(const GridValueFunction& v) const {
  if (options_.lambda_max > 0.0) return options_.lambda_max;
  const double vmax = v.values().cwiseAbs().maxCoeff();
  const double raw = 10.0 * problem_.discount * vmax / w_grid_.min_positive_cost();
  return std::clamp(raw, 1.0, 1e9);
}

namespace {

// Geometric grid over [0, lmax] followed by golden-section refinement around
// the best grid point. Exact up to tolerance when f is convex.
std::pair<double, double> minimize_scalar(const std::function<double(double)>& f, double lmax, int points) {
  std::vector<double> grid{0.0};
  const double lmin = lmax * 1e-9;
  for (int k = 0; k < points; ++k) grid.push_back(lmin * std::pow(lmax / lmin, static_cast<double>(k) / (points - 1)));
  std::vector<double> vals(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) vals[k] = f(grid[k]);
  const auto best = static_cast<std::size_t>(std::min_element(vals.begin(), vals.end()) - vals.begin());
  double best_lambda = grid[best], best_value = vals[best];

  double a = grid[best == 0 ? 0 : best - 1];
  double b = grid[std::min(best + 1, grid.size() - 1)];
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - phi * (b - a), d = a + phi * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 200 && (b - a) > 1e-13 * (1.0 + b); ++it) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = f(d);
    }
  }
  for (const auto& [lam, val] : {std::pair{c, fc}, std::pair{d, fd}})
    if (val < best_value) {
      best_value = val;
      best_lambda = lam;
    }
  return {best_lambda, best_value};
}

}  // namespace

DualityCheck DrBellman::penalty_duality_check(const GridValueFunction& v, const State& x) const {
  DualityCheck out;
  out.lhs = apply_T(v, x).value;
  const double budget = ambiguity_.budget();
  const double lmax = lambda_max(v);
  const int m = std::max(options_.lambda_grid_points, 3);

  // min over lambda of the joint penalty value; the min over actions makes
  // it nonconvex, so each lattice action is also searched on its own
  auto [best_lambda, best_value] =
      minimize_scalar([&](double lam) { return penalty_value(v, x, lam, nullptr, nullptr) + lam * budget; }, lmax, m);

  const auto& q = ambiguity_.center.weights();
  const Eigen::MatrixXd& cost = w_grid_.cost();
  Eigen::VectorXd h;
  std::size_t clamped = 0;
  for (const Action& u : problem_.actions->candidates(x)) {
    successor_values(v, x, u, h, clamped);
    const double stage = problem_.stage_cost(x, u);
    const auto per_action = [&](double lam) {
      double acc = stage + lam * budget;
      for (Eigen::Index i = 0; i < q.size(); ++i)
        acc += q(i) * (h.transpose() - lam * cost.row(i)).maxCoeff();
      return acc;
    };
    const auto [lam, val] = minimize_scalar(per_action, lmax, m);
    if (val < best_value) {
      best_value = val;
      best_lambda = lam;
    }
  }
  out.rhs = best_value;
  out.lambda = best_lambda;
  return out;
}

std::vector<WorstCaseDistribution> DrBellman::extract_worst_case_policy(const StationaryPolicy& pi,
                                                                        const GridValueFunction& v_pi) const {
  const RectGrid& grid = *problem_.grid;
  std::vector<WorstCaseDistribution> out(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) {
    const State x = grid.node(i);
    const Action u = pi.kind() == StationaryPolicy::Kind::Tabular ? pi.at_node(i) : pi(x);
    out[i] = apply_T_pi(v_pi, x, u).worst_case;
  });
  return out;
}

}  // namespace wdrc

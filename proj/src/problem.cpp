#include "wdrc/problem.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "wdrc/error.hpp"

namespace wdrc {

Action ActionSpace::project(const State&, const Action& u) const { return u; }

double ActionSpace::lattice_step(const State&) const { return 0.0; }

FiniteActionSet::FiniteActionSet(std::vector<Action> actions) : actions_(std::move(actions)) {
  if (actions_.empty()) throw ConfigurationError("finite action set is empty");
  for (const auto& a : actions_)
    if (a.size() != actions_.front().size()) throw ConfigurationError("finite action set: mixed dimensions");
}

Eigen::Index FiniteActionSet::dimension() const { return actions_.front().size(); }

std::vector<Action> FiniteActionSet::candidates(const State&) const { return actions_; }

bool FiniteActionSet::contains(const State&, const Action& u, double tol) const {
  return std::any_of(actions_.begin(), actions_.end(), [&](const Action& a) {
    return a.size() == u.size() && (a - u).cwiseAbs().maxCoeff() <= tol;
  });
}

BoxActionSet::BoxActionSet(Eigen::VectorXd lower, Eigen::VectorXd upper, std::vector<int> counts)
    : lower_(std::move(lower)), upper_(std::move(upper)), counts_(std::move(counts)) {
  if (lower_.size() != upper_.size() || static_cast<std::size_t>(lower_.size()) != counts_.size() ||
      lower_.size() == 0)
    throw ConfigurationError("box action set: inconsistent dimensions");
  std::size_t total = 1;
  for (Eigen::Index k = 0; k < lower_.size(); ++k) {
    if (!(upper_(k) >= lower_(k))) throw ConfigurationError("box action set: empty box");
    if (counts_[static_cast<std::size_t>(k)] < 1) throw ConfigurationError("box action set: count must be >= 1");
    total *= static_cast<std::size_t>(counts_[static_cast<std::size_t>(k)]);
  }
  lattice_.reserve(total);
  for (std::size_t flat = 0; flat < total; ++flat) {
    Action u(lower_.size());
    std::size_t rest = flat;
    for (Eigen::Index k = 0; k < lower_.size(); ++k) {
      const int n = counts_[static_cast<std::size_t>(k)];
      const auto i = static_cast<int>(rest % static_cast<std::size_t>(n));
      rest /= static_cast<std::size_t>(n);
      u(k) = n == 1 ? 0.5 * (lower_(k) + upper_(k)) : lower_(k) + (upper_(k) - lower_(k)) * i / (n - 1);
    }
    lattice_.push_back(std::move(u));
  }
}

std::vector<Action> BoxActionSet::candidates(const State&) const { return lattice_; }

bool BoxActionSet::contains(const State&, const Action& u, double tol) const {
  if (u.size() != lower_.size()) return false;
  return ((u - lower_).array() >= -tol).all() && ((upper_ - u).array() >= -tol).all();
}

Action BoxActionSet::project(const State&, const Action& u) const {
  return u.cwiseMax(lower_).cwiseMin(upper_);
}

double BoxActionSet::lattice_step(const State&) const {
  double step = 0.0;
  for (Eigen::Index k = 0; k < lower_.size(); ++k) {
    const int n = counts_[static_cast<std::size_t>(k)];
    if (n > 1) step = std::max(step, (upper_(k) - lower_(k)) / (n - 1));
  }
  return step;
}

BudgetActionSet::BudgetActionSet(Eigen::Index dimension, int divisions, Eigen::Index coordinate)
    : dim_(dimension), divisions_(divisions), coordinate_(coordinate) {
  if (dim_ < 1) throw ConfigurationError("budget action set: dimension must be >= 1");
  if (divisions_ < 1) throw ConfigurationError("budget action set: divisions must be >= 1");
  if (coordinate_ < 0) throw ConfigurationError("budget action set: negative coordinate");
  // all integer vectors k >= 0 with sum(k) <= divisions
  std::vector<int> k(static_cast<std::size_t>(dim_), 0);
  while (true) {
    Action s(dim_);
    for (Eigen::Index i = 0; i < dim_; ++i) s(i) = static_cast<double>(k[static_cast<std::size_t>(i)]) / divisions_;
    fractions_.push_back(std::move(s));
    std::size_t pos = 0;
    while (pos < k.size()) {
      ++k[pos];
      int sum = 0;
      for (int v : k) sum += v;
      if (sum <= divisions_) break;
      k[pos] = 0;
      ++pos;
    }
    if (pos == k.size()) break;
  }
}

double BudgetActionSet::budget(const State& x) const {
  if (coordinate_ >= x.size()) throw InvalidInputError("budget action set: state too short");
  return std::max(x(coordinate_), 0.0);
}

std::vector<Action> BudgetActionSet::candidates(const State& x) const {
  const double b = budget(x);
  if (b == 0.0) return {Action::Zero(dim_)};
  std::vector<Action> out;
  out.reserve(fractions_.size());
  for (const auto& s : fractions_) out.push_back(b * s);
  return out;
}

bool BudgetActionSet::contains(const State& x, const Action& u, double tol) const {
  if (u.size() != dim_) return false;
  return (u.array() >= -tol).all() && u.sum() <= budget(x) + tol;
}

Action BudgetActionSet::project(const State& x, const Action& u) const {
  // Euclidean projection onto {u >= 0, sum u <= b}
  const double b = budget(x);
  Action v = u.cwiseMax(0.0);
  if (v.sum() <= b) return v;
  std::vector<double> s(u.data(), u.data() + u.size());
  std::sort(s.begin(), s.end(), std::greater<>());
  double cum = 0.0, shift = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    cum += s[i];
    const double t = (cum - b) / static_cast<double>(i + 1);
    if (s[i] - t > 0.0) shift = t;
  }
  return (u.array() - shift).cwiseMax(0.0).matrix();
}

double BudgetActionSet::lattice_step(const State& x) const { return budget(x) / divisions_; }

void ControlProblem::validate() const {
  if (!dynamics || !stage_cost) throw ConfigurationError("problem: dynamics and stage cost are required");
  if (!actions) throw ConfigurationError("problem: action set is required");
  if (!grid) throw ConfigurationError("problem: state grid is required");
  if (!(discount > 0.0 && discount < 1.0)) throw ConfigurationError("problem: discount must lie in (0,1)");
  if (!(growth_beta >= 1.0 && growth_beta < 1.0 / discount))
    throw ConfigurationError("problem: growth_beta must lie in [1, 1/discount)");
  if (!(growth_b >= 0.0)) throw ConfigurationError("problem: growth_b must be >= 0");
  if (disturbance_lower.size() == 0 || disturbance_lower.size() != disturbance_upper.size())
    throw ConfigurationError("problem: disturbance support box is malformed");
  if (((disturbance_upper - disturbance_lower).array() < 0.0).any())
    throw ConfigurationError("problem: disturbance support box is empty");
  for (std::size_t i = 0; i < grid->size(); ++i) {
    const State x = grid->node(i);
    const double xi = weight(x);
    if (!(xi >= 1.0)) throw ConfigurationError("problem: weight function must be >= 1");
    const auto cands = actions->candidates(x);
    if (cands.empty()) {
      std::ostringstream msg;
      msg << "problem: empty action set at state (" << x.transpose() << ")";
      throw ConfigurationError(msg.str());
    }
    for (const auto& u : cands) {
      const double c = stage_cost(x, u);
      if (std::abs(c) > growth_b * xi * (1.0 + 1e-9) + 1e-12) {
        std::ostringstream msg;
        msg << "problem: |c(x,u)| = " << std::abs(c) << " exceeds growth_b*xi(x) = " << growth_b * xi
            << " at x = (" << x.transpose() << ")";
        throw ConfigurationError(msg.str());
      }
    }
  }
}

double sup_stage_cost(const ControlProblem& problem) {
  double worst = 0.0;
  for (std::size_t i = 0; i < problem.grid->size(); ++i) {
    const State x = problem.grid->node(i);
    for (const auto& u : problem.actions->candidates(x)) worst = std::max(worst, std::abs(problem.stage_cost(x, u)));
  }
  return worst;
}

}  // namespace wdrc

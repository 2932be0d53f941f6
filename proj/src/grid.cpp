#include "wdrc/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "wdrc/error.hpp"

namespace wdrc {

RectGrid::RectGrid(std::vector<std::vector<double>> axes) : axes_(std::move(axes)) {
  if (axes_.empty()) throw InvalidInputError("grid: no axes");
  if (axes_.size() > 4) throw UnsupportedError("grid: at most 4 dimensions are supported");
  size_ = 1;
  strides_.resize(axes_.size());
  uniform_.resize(axes_.size());
  for (std::size_t k = 0; k < axes_.size(); ++k) {
    const auto& a = axes_[k];
    if (a.size() < 2) throw InvalidInputError("grid: every axis needs at least 2 nodes");
    for (std::size_t i = 1; i < a.size(); ++i)
      if (!(a[i] > a[i - 1])) throw InvalidInputError("grid: axis nodes must be strictly increasing");
    const double h = (a.back() - a.front()) / static_cast<double>(a.size() - 1);
    bool uniform = true;
    for (std::size_t i = 0; i < a.size() && uniform; ++i)
      uniform = std::abs(a[i] - (a.front() + h * static_cast<double>(i))) <= 1e-12 * (1.0 + std::abs(a.back()));
    uniform_[k] = uniform;
    strides_[k] = size_;
    size_ *= a.size();
  }
  const auto d = static_cast<Eigen::Index>(axes_.size());
  nodes_.resize(d, static_cast<Eigen::Index>(size_));
  for (std::size_t flat = 0; flat < size_; ++flat) {
    std::size_t rest = flat;
    for (std::size_t k = 0; k < axes_.size(); ++k) {
      const auto n = axes_[k].size();
      nodes_(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(flat)) = axes_[k][rest % n];
      rest /= n;
    }
  }
}

RectGrid RectGrid::uniform(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                           const std::vector<int>& counts) {
  if (lower.size() != upper.size() || static_cast<std::size_t>(lower.size()) != counts.size())
    throw InvalidInputError("grid: bounds and node counts disagree in dimension");
  std::vector<std::vector<double>> axes(counts.size());
  for (std::size_t k = 0; k < counts.size(); ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    if (counts[k] < 2) throw InvalidInputError("grid: every axis needs at least 2 nodes");
    if (!(upper(kk) > lower(kk))) throw InvalidInputError("grid: empty box");
    axes[k].resize(static_cast<std::size_t>(counts[k]));
    const double h = (upper(kk) - lower(kk)) / (counts[k] - 1);
    for (int i = 0; i < counts[k]; ++i) axes[k][static_cast<std::size_t>(i)] = lower(kk) + h * i;
    axes[k].back() = upper(kk);
  }
  return RectGrid(std::move(axes));
}

Eigen::VectorXd RectGrid::lower() const {
  Eigen::VectorXd x(dimension());
  for (std::size_t k = 0; k < axes_.size(); ++k) x(static_cast<Eigen::Index>(k)) = axes_[k].front();
  return x;
}

Eigen::VectorXd RectGrid::upper() const {
  Eigen::VectorXd x(dimension());
  for (std::size_t k = 0; k < axes_.size(); ++k) x(static_cast<Eigen::Index>(k)) = axes_[k].back();
  return x;
}

bool RectGrid::contains(const Eigen::Ref<const Eigen::VectorXd>& x, double tol) const {
  if (x.size() != dimension()) return false;
  for (std::size_t k = 0; k < axes_.size(); ++k) {
    const double xi = x(static_cast<Eigen::Index>(k));
    if (!(xi >= axes_[k].front() - tol && xi <= axes_[k].back() + tol)) return false;
  }
  return true;
}

State RectGrid::clamp(const Eigen::Ref<const Eigen::VectorXd>& x, bool* clamped) const {
  if (x.size() != dimension()) throw InvalidInputError("grid: state dimension mismatch");
  State y = x;
  bool moved = false;
  for (std::size_t k = 0; k < axes_.size(); ++k) {
    auto& yi = y(static_cast<Eigen::Index>(k));
    if (yi < axes_[k].front()) {
      yi = axes_[k].front();
      moved = true;
    } else if (yi > axes_[k].back()) {
      yi = axes_[k].back();
      moved = true;
    }
  }
  if (clamped) *clamped = moved;
  return y;
}

Stencil RectGrid::stencil(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  const std::size_t d = axes_.size();
  std::array<std::size_t, 4> lo{};
  std::array<double, 4> t{};
  for (std::size_t k = 0; k < d; ++k) {
    const auto& a = axes_[k];
    const double xi = std::clamp(x(static_cast<Eigen::Index>(k)), a.front(), a.back());
    std::size_t cell;
    if (uniform_[k]) {
      const double h = (a.back() - a.front()) / static_cast<double>(a.size() - 1);
      const double s = (xi - a.front()) / h;
      cell = static_cast<std::size_t>(std::max(0.0, std::floor(s)));
      cell = std::min(cell, a.size() - 2);
    } else {
      auto it = std::upper_bound(a.begin(), a.end(), xi);
      cell = it == a.begin() ? 0 : static_cast<std::size_t>(it - a.begin()) - 1;
      cell = std::min(cell, a.size() - 2);
    }
    lo[k] = cell;
    const double frac = (xi - a[cell]) / (a[cell + 1] - a[cell]);
    t[k] = std::clamp(frac, 0.0, 1.0);
  }
  Stencil s;
  s.count = 0;
  const int corners = 1 << d;
  for (int c = 0; c < corners; ++c) {
    double w = 1.0;
    std::size_t flat = 0;
    for (std::size_t k = 0; k < d; ++k) {
      const bool upper = (c >> k) & 1;
      w *= upper ? t[k] : 1.0 - t[k];
      flat += (lo[k] + (upper ? 1 : 0)) * strides_[k];
    }
    if (w == 0.0) continue;
    s.node[static_cast<std::size_t>(s.count)] = flat;
    s.weight[static_cast<std::size_t>(s.count)] = w;
    ++s.count;
  }
  return s;
}

WeightFunction unit_weight() {
  return [](const State&) { return 1.0; };
}

GridValueFunction::GridValueFunction(std::shared_ptr<const RectGrid> grid, Eigen::VectorXd values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (!grid_) throw InvalidInputError("value function: null grid");
  if (static_cast<std::size_t>(values_.size()) != grid_->size())
    throw InvalidInputError("value function: value count does not match grid size");
}

GridValueFunction GridValueFunction::constant(std::shared_ptr<const RectGrid> grid, double value) {
  const auto n = static_cast<Eigen::Index>(grid->size());
  return GridValueFunction(std::move(grid), Eigen::VectorXd::Constant(n, value));
}

GridValueFunction GridValueFunction::from_function(std::shared_ptr<const RectGrid> grid,
                                                   const std::function<double(const State&)>& f) {
  Eigen::VectorXd values(static_cast<Eigen::Index>(grid->size()));
  for (std::size_t i = 0; i < grid->size(); ++i) values(static_cast<Eigen::Index>(i)) = f(grid->node(i));
  return GridValueFunction(std::move(grid), std::move(values));
}

double GridValueFunction::evaluate(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != grid_->dimension()) throw InvalidInputError("value function: state dimension mismatch");
  if (!grid_->contains(x, 0.0)) {
    if (!grid_->contains(x, 1e-9)) {
      std::ostringstream msg;
      msg << "value function: state (" << x.transpose() << ") outside the grid box";
      throw OutOfDomainError(msg.str());
    }
    log_warning("value function: state within 1e-9 of the box clamped");
  }
  const Stencil s = grid_->stencil(x);
  double acc = 0.0;
  for (int c = 0; c < s.count; ++c)
    acc += s.weight[static_cast<std::size_t>(c)] * values_(static_cast<Eigen::Index>(s.node[static_cast<std::size_t>(c)]));
  return acc;
}

double GridValueFunction::evaluate_clamped(const Eigen::Ref<const Eigen::VectorXd>& x, bool* clamped) const {
  if (clamped) *clamped = !grid_->contains(x, 0.0);
  const Stencil s = grid_->stencil(x);
  double acc = 0.0;
  for (int c = 0; c < s.count; ++c)
    acc += s.weight[static_cast<std::size_t>(c)] * values_(static_cast<Eigen::Index>(s.node[static_cast<std::size_t>(c)]));
  return acc;
}

double weighted_sup_norm_diff(const GridValueFunction& v1, const GridValueFunction& v2,
                              const WeightFunction& xi) {
  if (!(v1.grid() == v2.grid())) throw InvalidInputError("weighted_sup_norm_diff: grids differ");
  double worst = 0.0;
  for (std::size_t i = 0; i < v1.grid().size(); ++i) {
    const double w = xi(v1.grid().node(i));
    if (!(w > 0.0)) throw InvalidInputError("weighted_sup_norm_diff: weight must be positive");
    worst = std::max(worst, std::abs(v1.at_node(i) - v2.at_node(i)) / w);
  }
  return worst;
}

}  // namespace wdrc

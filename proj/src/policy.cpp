#include <sstream>

#include "wdrc/error.hpp"
#include "wdrc/problem.hpp"

namespace wdrc {

StationaryPolicy StationaryPolicy::tabular(std::shared_ptr<const RectGrid> grid, Eigen::MatrixXd actions) {
  if (!grid) throw InvalidInputError("policy: null grid");
  if (static_cast<std::size_t>(actions.cols()) != grid->size())
    throw InvalidInputError("policy: one action column per grid node is required");
  StationaryPolicy p;
  p.kind_ = Kind::Tabular;
  p.grid_ = std::move(grid);
  p.table_ = std::move(actions);
  return p;
}

StationaryPolicy StationaryPolicy::linear(Eigen::MatrixXd gain) {
  StationaryPolicy p;
  p.kind_ = Kind::Linear;
  p.gain_ = std::move(gain);
  return p;
}

StationaryPolicy StationaryPolicy::affine(Eigen::MatrixXd gain, Eigen::VectorXd offset) {
  if (gain.cols() != offset.size() + 1) throw InvalidInputError("policy: affine gain must have n+1 columns");
  StationaryPolicy p;
  p.kind_ = Kind::Affine;
  p.gain_ = std::move(gain);
  p.offset_ = std::move(offset);
  return p;
}

Eigen::Index StationaryPolicy::action_dimension() const {
  return kind_ == Kind::Tabular ? table_.rows() : gain_.rows();
}

Action StationaryPolicy::operator()(const State& x) const {
  switch (kind_) {
    case Kind::Tabular: {
      const Stencil s = grid_->stencil(x);
      Action u = Action::Zero(table_.rows());
      for (int c = 0; c < s.count; ++c)
        u += s.weight[static_cast<std::size_t>(c)] * table_.col(static_cast<Eigen::Index>(s.node[static_cast<std::size_t>(c)]));
      return u;
    }
    case Kind::Linear:
      if (x.size() != gain_.cols()) throw InvalidInputError("policy: state dimension mismatch");
      return gain_ * x;
    case Kind::Affine: {
      if (x.size() != offset_.size()) throw InvalidInputError("policy: state dimension mismatch");
      Eigen::VectorXd xa(x.size() + 1);
      xa << x - offset_, 1.0;
      return gain_ * xa;
    }
  }
  return {};
}

Action StationaryPolicy::at_node(std::size_t flat) const {
  if (kind_ != Kind::Tabular) throw InvalidInputError("policy: at_node requires a tabular policy");
  return table_.col(static_cast<Eigen::Index>(flat));
}

bool StationaryPolicy::admissible(const ControlProblem& problem, double tol) const {
  if (kind_ != Kind::Tabular) return true;
  for (std::size_t i = 0; i < grid_->size(); ++i)
    if (!problem.actions->contains(grid_->node(i), at_node(i), tol)) return false;
  return true;
}

}  // namespace wdrc

#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Dense>

namespace wdrc {

using State = Eigen::VectorXd;

/// Multilinear interpolation stencil: at most 2^d corner nodes with
/// nonnegative weights summing to one.
struct Stencil {
  static constexpr int kMaxCorners = 16;
  std::array<std::size_t, kMaxCorners> node{};
  std::array<double, kMaxCorners> weight{};
  int count = 0;
};

/// Tensor-product lattice over a box. Each axis holds >= 2 strictly
/// increasing nodes; dimension is limited to 4.
class RectGrid {
 public:
  explicit RectGrid(std::vector<std::vector<double>> axes);

  static RectGrid uniform(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                          const std::vector<int>& counts);

  Eigen::Index dimension() const { return static_cast<Eigen::Index>(axes_.size()); }
  std::size_t size() const { return size_; }
  const std::vector<double>& axis(Eigen::Index k) const { return axes_[static_cast<std::size_t>(k)]; }

  /// Node coordinates; the first axis varies fastest.
  State node(std::size_t flat) const { return nodes_.col(static_cast<Eigen::Index>(flat)); }
  const Eigen::MatrixXd& nodes() const { return nodes_; }

  Eigen::VectorXd lower() const;
  Eigen::VectorXd upper() const;

  bool contains(const Eigen::Ref<const Eigen::VectorXd>& x, double tol = 0.0) const;
  /// Projects onto the box; `clamped` reports whether any coordinate moved.
  State clamp(const Eigen::Ref<const Eigen::VectorXd>& x, bool* clamped = nullptr) const;

  /// Stencil of a point inside the box (coordinates are clamped first).
  Stencil stencil(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  bool operator==(const RectGrid& other) const { return axes_ == other.axes_; }

 private:
  std::vector<std::vector<double>> axes_;
  std::vector<bool> uniform_;
  std::vector<std::size_t> strides_;
  std::size_t size_ = 0;
  Eigen::MatrixXd nodes_;
};

using WeightFunction = std::function<double(const State&)>;

/// Constant weight 1.
WeightFunction unit_weight();

/// Values stored at grid nodes, multilinear interpolation in between.
/// Immutable once built; sweeps construct a fresh instance.
class GridValueFunction {
 public:
  GridValueFunction(std::shared_ptr<const RectGrid> grid, Eigen::VectorXd values);

  static GridValueFunction constant(std::shared_ptr<const RectGrid> grid, double value);
  static GridValueFunction from_function(std::shared_ptr<const RectGrid> grid,
                                         const std::function<double(const State&)>& f);

  const RectGrid& grid() const { return *grid_; }
  const std::shared_ptr<const RectGrid>& grid_ptr() const { return grid_; }
  const Eigen::VectorXd& values() const { return values_; }
  double at_node(std::size_t flat) const { return values_(static_cast<Eigen::Index>(flat)); }

  /// Interpolated value. Points outside the box by at most 1e-9 are clamped
  /// (with a warning); farther points raise OutOfDomainError.
  double evaluate(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  /// Interpolated value at the projection of x onto the box.
  double evaluate_clamped(const Eigen::Ref<const Eigen::VectorXd>& x, bool* clamped) const;

 private:
  std::shared_ptr<const RectGrid> grid_;
  Eigen::VectorXd values_;
};

/// max over nodes of |v1 - v2| / xi(node). Grids must be identical.
double weighted_sup_norm_diff(const GridValueFunction& v1, const GridValueFunction& v2,
                              const WeightFunction& xi);

}  // namespace wdrc

#include "wdrc/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "wdrc/error.hpp"

namespace wdrc {

namespace {

struct Cell {
  Eigen::Index row;
  Eigen::Index col;
};

// Basis cells form a spanning tree over the m + n row/column nodes.
// Nodes 0..m-1 are rows, m..m+n-1 are columns.
class BasisTree {
 public:
  BasisTree(Eigen::Index m, Eigen::Index n) : m_(m), adjacency_(static_cast<std::size_t>(m + n)) {}

  void rebuild(const std::vector<Cell>& cells) {
    for (auto& a : adjacency_) a.clear();
    for (std::size_t k = 0; k < cells.size(); ++k) {
      adjacency_[node_of_row(cells[k].row)].push_back(k);
      adjacency_[node_of_col(cells[k].col)].push_back(k);
    }
  }

  std::size_t node_of_row(Eigen::Index i) const { return static_cast<std::size_t>(i); }
  std::size_t node_of_col(Eigen::Index j) const { return static_cast<std::size_t>(m_ + j); }
  const std::vector<std::size_t>& edges(std::size_t node) const { return adjacency_[node]; }
  std::size_t node_count() const { return adjacency_.size(); }

  std::size_t other_end(const Cell& c, std::size_t node) const {
    const auto r = node_of_row(c.row);
    return node == r ? node_of_col(c.col) : r;
  }

 private:
  Eigen::Index m_;
  std::vector<std::vector<std::size_t>> adjacency_;
};

}  // namespace

TransportSolution solve_transport(const Eigen::VectorXd& supply, const Eigen::VectorXd& demand,
                                  const Eigen::MatrixXd& cost) {
  const Eigen::Index m = supply.size();
  const Eigen::Index n = demand.size();
  if (m == 0 || n == 0) throw InvalidInputError("transport: empty marginal");
  if (cost.rows() != m || cost.cols() != n)
    throw InvalidInputError("transport: cost matrix shape does not match marginals");
  if ((supply.array() < 0.0).any() || (demand.array() < 0.0).any())
    throw InvalidInputError("transport: negative mass");
  if (!cost.allFinite()) throw InvalidInputError("transport: non-finite cost");

  const double total_supply = supply.sum();
  const double total_demand = demand.sum();
  if (std::abs(total_supply - total_demand) > 1e-9 * std::max(1.0, total_supply)) {
    std::ostringstream msg;
    msg << "transport: unbalanced marginals (" << total_supply << " vs " << total_demand << ")";
    throw InvalidInputError(msg.str());
  }
  Eigen::VectorXd b = demand;
  b(n - 1) = std::max(0.0, b(n - 1) + (total_supply - total_demand));

  // Northwest corner: exactly one index advances per step, giving m + n - 1
  // cells that form a spanning tree (degenerate zero cells included).
  Eigen::MatrixXd flow = Eigen::MatrixXd::Zero(m, n);
  std::vector<Cell> basis;
  basis.reserve(static_cast<std::size_t>(m + n - 1));
  {
    Eigen::VectorXd ra = supply;
    Eigen::VectorXd rb = b;
    Eigen::Index i = 0, j = 0;
    for (;;) {
      const double x = std::min(ra(i), rb(j));
      flow(i, j) = x;
      basis.push_back({i, j});
      const bool row_done = ra(i) <= rb(j);
      ra(i) -= x;
      rb(j) -= x;
      if (i == m - 1 && j == n - 1) break;
      if (i == m - 1) {
        ++j;
      } else if (j == n - 1) {
        ++i;
      } else if (row_done) {
        ++i;
      } else {
        ++j;
      }
    }
  }

  std::vector<char> is_basic(static_cast<std::size_t>(m * n), 0);
  auto basic_flag = [&](Eigen::Index i, Eigen::Index j) -> char& {
    return is_basic[static_cast<std::size_t>(i * n + j)];
  };
  for (const auto& c : basis) basic_flag(c.row, c.col) = 1;

  const double scale = 1.0 + cost.cwiseAbs().maxCoeff();
  const double tol = 1e-12 * scale;
  const long max_pivots = 50L * m * n + 1000;

  BasisTree tree(m, n);
  Eigen::VectorXd u(m), v(n);
  std::vector<std::size_t> stack;
  std::vector<char> seen(tree.node_count());
  std::vector<long> parent_edge(tree.node_count());

  TransportSolution out;
  for (long pivot = 0;; ++pivot) {
    if (pivot > max_pivots) throw NumericalError("transport: pivot limit exceeded (cycling?)");
    tree.rebuild(basis);

    // Potentials by traversal from row 0.
    std::fill(seen.begin(), seen.end(), 0);
    stack.assign(1, tree.node_of_row(0));
    seen[0] = 1;
    u(0) = 0.0;
    while (!stack.empty()) {
      const auto node = stack.back();
      stack.pop_back();
      for (auto k : tree.edges(node)) {
        const Cell& c = basis[k];
        const auto next = tree.other_end(c, node);
        if (seen[next]) continue;
        seen[next] = 1;
        if (next >= static_cast<std::size_t>(m)) {
          v(c.col) = cost(c.row, c.col) - u(c.row);
        } else {
          u(c.row) = cost(c.row, c.col) - v(c.col);
        }
        stack.push_back(next);
      }
    }

    // Dantzig pricing.
    double best = -tol;
    Eigen::Index enter_i = -1, enter_j = -1;
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = 0; i < m; ++i) {
        if (basic_flag(i, j)) continue;
        const double reduced = cost(i, j) - u(i) - v(j);
        if (reduced < best) {
          best = reduced;
          enter_i = i;
          enter_j = j;
        }
      }
    }
    if (enter_i < 0) {
      out.pivots = static_cast<int>(pivot);
      break;
    }

    // Tree path from row enter_i to column enter_j closes the cycle.
    std::fill(seen.begin(), seen.end(), 0);
    std::fill(parent_edge.begin(), parent_edge.end(), -1);
    const auto start = tree.node_of_row(enter_i);
    const auto target = tree.node_of_col(enter_j);
    stack.assign(1, start);
    seen[start] = 1;
    while (!stack.empty()) {
      const auto node = stack.back();
      stack.pop_back();
      if (node == target) break;
      for (auto k : tree.edges(node)) {
        const auto next = tree.other_end(basis[k], node);
        if (seen[next]) continue;
        seen[next] = 1;
        parent_edge[next] = static_cast<long>(k);
        stack.push_back(next);
      }
    }
    if (!seen[target]) throw NumericalError("transport: basis is not a spanning tree");

    // Walk back from the column; signs alternate -, +, -, ... along the path.
    std::vector<std::size_t> path;
    for (auto node = target; node != start;) {
      const auto k = static_cast<std::size_t>(parent_edge[node]);
      path.push_back(k);
      node = tree.other_end(basis[k], node);
    }
    double step = std::numeric_limits<double>::infinity();
    std::size_t leaving = path.front();
    for (std::size_t t = 0; t < path.size(); t += 2) {
      const Cell& c = basis[path[t]];
      if (flow(c.row, c.col) < step) {
        step = flow(c.row, c.col);
        leaving = path[t];
      }
    }
    for (std::size_t t = 0; t < path.size(); ++t) {
      const Cell& c = basis[path[t]];
      flow(c.row, c.col) += (t % 2 == 0) ? -step : step;
    }
    flow(enter_i, enter_j) += step;
    const Cell gone = basis[leaving];
    flow(gone.row, gone.col) = 0.0;
    basic_flag(gone.row, gone.col) = 0;
    basis[leaving] = {enter_i, enter_j};
    basic_flag(enter_i, enter_j) = 1;
  }

  flow = flow.cwiseMax(0.0);
  out.flow = std::move(flow);
  out.cost = (out.flow.array() * cost.array()).sum();
  out.source_potential = u;
  out.target_potential = v;
  return out;
}

}  // namespace wdrc

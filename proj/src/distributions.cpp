#include "wdrc/distributions.hpp"

#include <cmath>
#include <sstream>

#include "wdrc/csv.hpp"
#include "wdrc/error.hpp"

namespace wdrc {

EmpiricalDistribution::EmpiricalDistribution(Eigen::MatrixXd atoms)
    : EmpiricalDistribution(atoms, Eigen::VectorXd::Constant(atoms.rows(), 1.0 / std::max<Eigen::Index>(1, atoms.rows()))) {}

EmpiricalDistribution::EmpiricalDistribution(Eigen::MatrixXd atoms, Eigen::VectorXd weights)
    : atoms_(std::move(atoms)), weights_(std::move(weights)) {
  if (atoms_.rows() == 0) throw InvalidInputError("distribution: no atoms");
  if (atoms_.cols() == 0) throw InvalidInputError("distribution: zero-dimensional atoms");
  if (weights_.size() != atoms_.rows())
    throw InvalidInputError("distribution: weight count does not match atom count");
  if (!atoms_.allFinite() || !weights_.allFinite())
    throw InvalidInputError("distribution: non-finite atom or weight");
  if ((weights_.array() < 0.0).any()) throw InvalidInputError("distribution: negative weight");
  if (std::abs(weights_.sum() - 1.0) > 1e-12) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "distribution: weights sum to " << weights_.sum() << ", expected 1";
    throw InvalidInputError(msg.str());
  }
}

EmpiricalDistribution EmpiricalDistribution::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw InvalidInputError("distribution: no samples");
  const auto l = rows.front().size();
  Eigen::MatrixXd atoms(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(l));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != l) throw InvalidInputError("distribution: ragged sample rows");
    for (std::size_t k = 0; k < l; ++k)
      atoms(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
  }
  return EmpiricalDistribution(std::move(atoms));
}

Eigen::VectorXd EmpiricalDistribution::mean() const { return atoms_.transpose() * weights_; }

Eigen::MatrixXd EmpiricalDistribution::second_moment() const {
  return atoms_.transpose() * weights_.asDiagonal() * atoms_;
}

Eigen::MatrixXd EmpiricalDistribution::covariance() const { return centered().second_moment(); }

EmpiricalDistribution EmpiricalDistribution::centered() const {
  Eigen::MatrixXd shifted = atoms_.rowwise() - mean().transpose();
  return EmpiricalDistribution(std::move(shifted), weights_);
}

GroundMetric::GroundMetric(double order) : order_(order) {
  if (!(order >= 1.0) || !std::isfinite(order))
    throw InvalidInputError("ground metric: order p must lie in [1, inf)");
}

double GroundMetric::distance(const Eigen::Ref<const Eigen::VectorXd>& a,
                              const Eigen::Ref<const Eigen::VectorXd>& b) const {
  if (a.size() != b.size()) throw InvalidInputError("ground metric: dimension mismatch");
  return (a - b).norm();
}

double GroundMetric::cost(const Eigen::Ref<const Eigen::VectorXd>& a,
                          const Eigen::Ref<const Eigen::VectorXd>& b) const {
  const double d = distance(a, b);
  if (order_ == 1.0) return d;
  if (order_ == 2.0) return d * d;
  return std::pow(d, order_);
}

Eigen::MatrixXd GroundMetric::cost_matrix(const Eigen::MatrixXd& from, const Eigen::MatrixXd& to) const {
  if (from.cols() != to.cols()) throw InvalidInputError("ground metric: dimension mismatch");
  Eigen::MatrixXd c(from.rows(), to.rows());
  for (Eigen::Index i = 0; i < from.rows(); ++i)
    for (Eigen::Index j = 0; j < to.rows(); ++j)
      c(i, j) = cost(from.row(i).transpose(), to.row(j).transpose());
  return c;
}

WassersteinResult wasserstein_distance(const EmpiricalDistribution& mu,
                                       const EmpiricalDistribution& nu,
                                       const GroundMetric& metric) {
  if (mu.dimension() != nu.dimension()) {
    std::ostringstream msg;
    msg << "wasserstein_distance: dimension mismatch (" << mu.dimension() << " vs "
        << nu.dimension() << ")";
    throw InvalidInputError(msg.str());
  }
  const Eigen::MatrixXd cost = metric.cost_matrix(mu.atoms(), nu.atoms());
  TransportSolution sol = solve_transport(mu.weights(), nu.weights(), cost);

  WassersteinResult out;
  out.plan.cost = std::max(0.0, sol.cost);
  out.plan.coupling = std::move(sol.flow);
  out.plan.source_potential = std::move(sol.source_potential);
  out.plan.target_potential = std::move(sol.target_potential);
  out.distance = metric.order() == 1.0 ? out.plan.cost : std::pow(out.plan.cost, 1.0 / metric.order());
  return out;
}

bool ball_membership(const EmpiricalDistribution& mu, const EmpiricalDistribution& center,
                     double theta, const GroundMetric& metric) {
  if (!(theta >= 0.0)) throw InvalidInputError("ball_membership: radius must be nonnegative");
  return wasserstein_distance(mu, center, metric).distance <= theta + 1e-12;
}

EmpiricalDistribution read_samples_csv(const std::filesystem::path& path, bool header) {
  const auto table = read_numeric_csv(path, header);
  return EmpiricalDistribution::from_rows(table.rows);
}

}  // namespace wdrc

#pragma once

#include <filesystem>
#include <vector>

#include <Eigen/Dense>

#include "wdrc/transport.hpp"

namespace wdrc {

/// Finitely supported probability distribution in R^l. Atoms are stored as
/// rows. Weights default to uniform 1/N when built from raw samples.
class EmpiricalDistribution {
 public:
  EmpiricalDistribution() = default;
  explicit EmpiricalDistribution(Eigen::MatrixXd atoms);
  EmpiricalDistribution(Eigen::MatrixXd atoms, Eigen::VectorXd weights);

  static EmpiricalDistribution from_rows(const std::vector<std::vector<double>>& rows);

  Eigen::Index size() const { return atoms_.rows(); }
  Eigen::Index dimension() const { return atoms_.cols(); }
  const Eigen::MatrixXd& atoms() const { return atoms_; }
  const Eigen::VectorXd& weights() const { return weights_; }
  Eigen::VectorXd atom(Eigen::Index i) const { return atoms_.row(i).transpose(); }
  double weight(Eigen::Index i) const { return weights_(i); }

  Eigen::VectorXd mean() const;
  /// E[w w^T]
  Eigen::MatrixXd second_moment() const;
  /// E[(w - mean)(w - mean)^T]
  Eigen::MatrixXd covariance() const;

  /// Same weights, atoms shifted by -mean.
  EmpiricalDistribution centered() const;

 private:
  Eigen::MatrixXd atoms_;
  Eigen::VectorXd weights_;
};

/// Euclidean ground metric raised to the transport order p >= 1.
class GroundMetric {
 public:
  explicit GroundMetric(double order = 1.0);

  double order() const { return order_; }
  double distance(const Eigen::Ref<const Eigen::VectorXd>& a,
                  const Eigen::Ref<const Eigen::VectorXd>& b) const;
  /// d(a, b)^p
  double cost(const Eigen::Ref<const Eigen::VectorXd>& a,
              const Eigen::Ref<const Eigen::VectorXd>& b) const;
  /// Pairwise d^p between the atom rows of two matrices.
  Eigen::MatrixXd cost_matrix(const Eigen::MatrixXd& from, const Eigen::MatrixXd& to) const;

 private:
  double order_;
};

struct TransportPlan {
  /// coupling(i, j): mass moved from atom i of the first argument to atom j of the second
  Eigen::MatrixXd coupling;
  /// sum coupling .* d^p
  double cost = 0.0;
  /// Kantorovich potentials (phi, psi) with phi_i + psi_j <= d^p_ij.
  Eigen::VectorXd source_potential;
  Eigen::VectorXd target_potential;
};

struct WassersteinResult {
  double distance = 0.0;
  TransportPlan plan;
};

/// W_p between two discrete distributions by exact discrete transport.
WassersteinResult wasserstein_distance(const EmpiricalDistribution& mu,
                                       const EmpiricalDistribution& nu,
                                       const GroundMetric& metric);

/// true iff W_p(mu, center) <= theta + 1e-12.
bool ball_membership(const EmpiricalDistribution& mu, const EmpiricalDistribution& center,
                     double theta, const GroundMetric& metric);

/// One sample per row, columns are coordinates. A leading header row is
/// skipped when `header` is set.
EmpiricalDistribution read_samples_csv(const std::filesystem::path& path, bool header = false);

}  // namespace wdrc

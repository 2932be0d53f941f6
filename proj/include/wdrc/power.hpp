#pragma once

#include <complex>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace wdrc {

struct Bus {
  int id = 0;
  bool generator = false;
  double inertia = 0.0;  ///< M_i, pu s^2/rad (generators only)
  double damping = 0.0;  ///< D_i, pu s/rad (generators only)
};

/// Series branch with admittance y = g - j b (b = 1/x for a lossless line).
struct Line {
  int from = 0;
  int to = 0;
  double susceptance = 0.0;
  double conductance = 0.0;
};

class PowerNetwork {
 public:
  PowerNetwork(std::vector<Bus> buses, std::vector<Line> lines, double dt = 0.1);

  /// buses.csv: id,type,M,D (type is "gen" or "load"); lines.csv:
  /// from,to,susceptance,conductance. Both files have a header row.
  static PowerNetwork from_csv(const std::filesystem::path& buses, const std::filesystem::path& lines,
                               double dt = 0.1);

  const std::vector<Bus>& buses() const { return buses_; }
  const std::vector<Line>& lines() const { return lines_; }
  double dt() const { return dt_; }

  Eigen::MatrixXcd admittance() const;
  /// Positions (in bus order) of the generator buses.
  std::vector<int> generator_positions() const;
  Eigen::VectorXd inertia() const;
  Eigen::VectorXd damping() const;

  /// Kron-reduced Laplacian over the generator buses.
  Eigen::MatrixXd reduced_laplacian() const;

 private:
  std::vector<Bus> buses_;
  std::vector<Line> lines_;
  double dt_;
};

/// Eliminates every index not in `keep` in the given order (default:
/// ascending). Y_ij <- Y_ij - Y_ik Y_kj / Y_kk. Result rows/columns follow
/// the ascending order of `keep`.
Eigen::MatrixXcd kron_reduce(const Eigen::MatrixXcd& Y, const std::vector<int>& keep,
                             const std::vector<int>& elimination_order = {});

/// L_ij = -B_ij (i != j), L_ii = sum_{k != i} B_ik with B = Im(Y).
Eigen::MatrixXd laplacian_from_susceptance(const Eigen::MatrixXd& B);

struct SwingModel {
  Eigen::MatrixXd Ac, Bc;
  Eigen::MatrixXd A, B;
};

/// x = (theta, theta_dot); M theta'' + D theta' = u - L theta.
SwingModel build_swing_state_space(const Eigen::MatrixXd& L, const Eigen::VectorXd& inertia,
                                   const Eigen::VectorXd& damping, double dt);

/// Zero-order-hold discretization via the augmented matrix exponential.
void zero_order_hold(const Eigen::MatrixXd& Ac, const Eigen::MatrixXd& Bc, double dt, Eigen::MatrixXd& A,
                     Eigen::MatrixXd& B);

/// Cost weights for the frequency-control problem: theta' (I - 11'/n) theta
/// + 0.5 theta_dot' M theta_dot.
Eigen::MatrixXd swing_state_cost(const Eigen::VectorXd& inertia);

struct FrequencyMetrics {
  /// time after which the deviation stays below the threshold; +inf if the
  /// last recorded sample is still above it
  Eigen::VectorXd per_bus;
  double mean = 0.0;
  bool settled = true;
};

/// `deviation` holds one row per recorded step (time k*dt) and one column
/// per bus. Threshold is fraction * |reference|.
FrequencyMetrics frequency_metrics(const Eigen::MatrixXd& deviation, double dt, double fraction,
                                   double reference);

/// Last-crossing time of a single trace.
double time_to_threshold(const Eigen::VectorXd& trace, double dt, double level);

}  // namespace wdrc

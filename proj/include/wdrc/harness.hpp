#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wdrc/bellman.hpp"
#include "wdrc/lq.hpp"
#include "wdrc/power.hpp"
#include "wdrc/random.hpp"
#include "wdrc/solvers.hpp"

namespace wdrc {

using Sampler = std::function<Eigen::VectorXd(Rng&)>;

/// Independent normal coordinates.
Sampler gaussian_sampler(Eigen::VectorXd mean, Eigen::VectorXd stddev);
/// Always returns w.
Sampler point_mass_sampler(Eigen::VectorXd w);

/// N draws from the sampler on a stream derived from seed.
EmpiricalDistribution draw_samples(const Sampler& sampler, int N, std::uint64_t seed);

struct InvestmentParams {
  double zeta = 0.25;
  double discount = 0.9;
  double eta = 1.02;
  double x_max = 1.4;
  int grid_nodes = 36;
  /// simplex lattice step 1/divisions for (u1, u2) / x
  int action_divisions = 10;
  double w_lower = 0.58;
  double w_upper = 1.58;
};

/// x' = eta (x - u1 - u2) + w u1, c = -(u2 - zeta u2^2), U(x) = {u >= 0, u1 + u2 <= x}.
/// growth_b is set to the grid supremum of |c| (weight xi = 1).
ControlProblem investment_problem(const InvestmentParams& params);

enum class SolverKind { VI, PI, MPI };

struct DpOptions {
  SolverKind solver = SolverKind::VI;
  double delta = 1e-6;
  int mpi_order = 5;
  int max_iter = 100000;
  /// disturbance lattice points per axis over the support box (samples are added)
  int w_points = 41;
  BellmanOptions bellman;
};

struct DpSolution {
  GridValueFunction value;
  StationaryPolicy policy;
  SolverReport report;
};

DrBellman make_bellman(const ControlProblem& problem, const EmpiricalDistribution& samples, double theta,
                       const GroundMetric& metric, const DpOptions& options);

/// DR solve on the problem grid from v0 = 0 with the configured solver.
DpSolution solve_dr(const ControlProblem& problem, const EmpiricalDistribution& samples, double theta,
                    const GroundMetric& metric, const DpOptions& options);

/// solve_dr with theta = 0.
DpSolution saa_policy(const ControlProblem& problem, const EmpiricalDistribution& samples, const GroundMetric& metric,
                      const DpOptions& options);

struct OutOfSampleOptions {
  int horizon = 200;
  int rollouts = 200;
  /// > 0: require alpha^T b xi_max / (1 - tau) <= tolerance
  double truncation_tolerance = 0.0;
  /// Successors spread over their stencil nodes with the interpolation
  /// weights, which is the Markov chain the grid DP solves. The node
  /// distribution is propagated exactly and only w is sampled. Otherwise
  /// states evolve continuously and are clamped to the box.
  bool grid_chain = true;
  /// cap for the horizon named in the truncation error
  int horizon_cap = 100000;
};

struct OutOfSampleResult {
  double mean = 0.0;
  double standard_error = 0.0;
  Eigen::VectorXd per_rollout;
  double truncation_bound = 0.0;
  std::size_t clamped = 0;
};

/// Smallest T with alpha^T b xi_max / (1 - tau) <= tolerance.
int required_horizon(double tolerance, double b, double xi_max, double discount, double tau);

/// Monte Carlo discounted cost with rollout r drawing from derive_seed(seed, {r}).
OutOfSampleResult out_of_sample_cost(const StationaryPolicy& policy, const ControlProblem& problem,
                                     const Sampler& truth, const State& x0, const OutOfSampleOptions& options,
                                     std::uint64_t seed);

/// Conservative success: estimate + one standard error <= certificate, with
/// the truncation bound as the only slack.
bool reliable(double estimate, double standard_error, double certificate, double truncation_bound = 0.0);

struct ReliabilityReport {
  std::vector<double> parameter;  ///< theta or lambda
  std::vector<int> N;
  Eigen::MatrixXd reliability;     ///< parameter x N
  Eigen::MatrixXd standard_error;  ///< sqrt(p(1-p)/trials)
  Eigen::MatrixXd mean_cost;       ///< mean out-of-sample cost over trials (first x0)
  Eigen::MatrixXd mean_certificate;
  int trials = 0;
  Eigen::MatrixXi excluded;
  /// success[(k * N.size() + n) * trials + t]
  std::vector<unsigned char> success;
  /// cost[(k * N.size() + n) * trials + t], first x0
  std::vector<double> cost;

  std::size_t index(std::size_t k, std::size_t n, std::size_t t) const {
    return (k * N.size() + n) * static_cast<std::size_t>(trials) + t;
  }
};

struct InvestmentStudyConfig {
  InvestmentParams problem;
  DpOptions dp;
  OutOfSampleOptions evaluation;
  std::vector<int> N{5, 10, 20};
  std::vector<double> theta{0.0, 0.005, 0.01, 0.02, 0.05, 0.1};
  int trials = 200;
  std::vector<double> x0{1.0};
  double truth_mean = 1.08;
  double truth_std = 0.1;
  std::uint64_t seed = 1;
};

/// Per trial: draw N samples, solve the DR problem for each theta, evaluate
/// out-of-sample with common random numbers across theta.
ReliabilityReport investment_reliability(const InvestmentStudyConfig& config);

struct ComparisonTable {
  std::vector<double> theta;
  /// cost(draw, k) for theta index k; column theta.size() holds SAA
  Eigen::MatrixXd cost;
  Eigen::VectorXd mean;  ///< per column
  int best_theta = 0;    ///< index of the lowest mean DR column
  int N = 0;
};

ComparisonTable dr_vs_saa_comparison(const InvestmentStudyConfig& config, int N, int training_draws);

/// LQ penalty route: per trial fit the DR Riccati solution on N samples and
/// compare x0'Px0 + z with the simulated cost under the truth.
struct LqReliabilityConfig {
  LqProblem base;  ///< samples ignored
  std::vector<double> lambda{0.03, 0.3, 3.0};
  std::vector<int> N{10};
  int trials = 100;
  int horizon = 200;
  int rollouts = 200;
  Eigen::VectorXd x0;
  Sampler truth;
  std::uint64_t seed = 1;
};
ReliabilityReport lq_reliability(const LqReliabilityConfig& config);

/// Spearman rank correlation with average ranks for ties.
double spearman(const std::vector<double>& x, const std::vector<double>& y);
/// One-sided p-value of rho > 0 by the normal approximation z = rho sqrt(n-1).
double spearman_p_value(double rho, std::size_t n);
/// One-sided sign test p-value for "positive differences dominate" (zeros dropped).
double sign_test_p_value(const std::vector<double>& differences);
double median(std::vector<double> v);

/// 3 generators and 2 load buses used for quick power-model checks.
PowerNetwork synthetic_three_generator_network(double dt = 0.1);

struct PowerStudyConfig {
  int N = 10;
  double lambda = 0.03;
  double discount = 0.9;
  double sample_std = 0.1;
  double initial_frequency = 0.1;  ///< theta_dot of the first generator at t = 0
  int horizon = 600;
  int rollouts = 200;
  double threshold = 0.01;
  std::uint64_t seed = 1;
};

struct PowerStudyResult {
  LqProblem lq;
  DrRiccatiSolution dr;
  DareSolution lqg;
  FrequencyMetrics dr_metrics;
  FrequencyMetrics lqg_metrics;
  /// rollout-mean frequency deviation, one row per step, one column per generator
  Eigen::MatrixXd dr_frequency;
  Eigen::MatrixXd lqg_frequency;
};

/// DR and LQG gains on the swing model, both simulated under the DR
/// worst-case atoms (Xi = B, centered N(0, sample_std^2 I) samples).
PowerStudyResult power_frequency_study(const PowerNetwork& network, const PowerStudyConfig& config);

/// LQ problem for the swing model: Q from swing_state_cost, R = I, Xi = B.
LqProblem swing_lq_problem(const PowerNetwork& network, double discount, double lambda,
                           const EmpiricalDistribution& samples);

}  // namespace wdrc

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "wdrc/distributions.hpp"
#include "wdrc/problem.hpp"
#include "wdrc/random.hpp"

namespace wdrc {

/// x' = A x + B u + Xi w, cost x'Qx + u'Ru, penalty lambda ||w - w_hat||^2.
struct LqProblem {
  Eigen::MatrixXd A, B, Xi, Q, R;
  double discount = 0.9;
  double lambda = 1.0;
  EmpiricalDistribution samples;

  Eigen::Index n() const { return A.rows(); }
  Eigen::Index m() const { return B.cols(); }
  Eigen::Index l() const { return Xi.cols(); }

  void validate() const;
  double stage_cost(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const;
};

struct DrRiccatiSolution {
  Eigen::MatrixXd P;
  double z = 0.0;
  Eigen::MatrixXd K;
  /// (lambda I - alpha Xi'P Xi)^{-1}
  Eigen::MatrixXd G;
  /// lambda I - alpha Xi'P Xi > margin I held at every iterate
  bool lambda_ok = false;
  /// smallest eigenvalue of lambda I - alpha Xi'P Xi at the solution
  double lambda_margin = 0.0;
  /// ||P - (Q + alpha A'PA + alpha^2 A'SA)||_F
  double residual = 0.0;
  int iterations = 0;
};

struct RiccatiOptions {
  /// stop when ||P_{j+1} - P_j||_F <= tol (1 + ||P_j||_F)
  double tol = 1e-14;
  int max_iter = 200000;
  double margin = 1e-8;
};

/// S(P) of the DR recursion together with the pieces reused by K.
struct DrRiccatiTerms {
  Eigen::MatrixXd G, H, Rm, S;
  double margin = 0.0;
};
DrRiccatiTerms dr_riccati_terms(const LqProblem& lq, const Eigen::MatrixXd& P);

/// Fixed-point iteration P <- Q + alpha A'PA + alpha^2 A'S(P)A from P = Q.
DrRiccatiSolution solve_dr_riccati(const LqProblem& lq, const RiccatiOptions& options = {});

struct DareSolution {
  Eigen::MatrixXd P;
  Eigen::MatrixXd K;
  double residual = 0.0;
  int iterations = 0;
  bool stabilizable = true;
  bool observable = true;
};

/// Discounted DARE by fixed-point iteration from P = Q.
DareSolution solve_dare(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Eigen::MatrixXd& Q,
                        const Eigen::MatrixXd& R, double discount, double tol = 1e-14, int max_iter = 200000);

/// Rank of [B AB ... A^{n-1}B] equals n (tolerance 1e-8).
bool controllable(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);
/// (A, C) observable with Q = C'C.
bool observable_from_cost(const Eigen::MatrixXd& A, const Eigen::MatrixXd& Q);

/// Worst-case atoms G [alpha Xi'P (A + B K) x + lambda w_hat_i], one per row.
Eigen::MatrixXd worst_case_atoms(const DrRiccatiSolution& sol, const LqProblem& lq, const Eigen::VectorXd& x);

struct AugmentedLq {
  LqProblem problem;
  Eigen::VectorXd x_bar;
  Eigen::VectorXd w_bar;
  double condition = 0.0;

  /// (x - x_bar, 1)
  Eigen::VectorXd lift(const Eigen::VectorXd& x) const;
  /// pi'(x) = K' (x - x_bar, 1)
  StationaryPolicy policy(const Eigen::MatrixXd& augmented_gain) const;
};

/// Rewrites a nonzero-mean sample problem on the state (x - x_bar, 1).
AugmentedLq augment_nonzero_mean(const LqProblem& lq);

/// Disturbance source for closed-loop simulation.
struct DisturbanceModel {
  enum class Mode { Fixed, Sampler, WorstCase };
  Mode mode = Mode::Fixed;
  /// Fixed: row t is w_t (the last row repeats); an empty matrix means w = 0.
  Eigen::MatrixXd fixed;
  /// Sampler: draws one disturbance; each rollout owns a derived stream.
  std::function<Eigen::VectorXd(Rng&)> sampler;
  /// WorstCase: adversary solution whose atoms are drawn uniformly.
  std::optional<DrRiccatiSolution> adversary;
  /// WorstCase: the problem the adversary solution belongs to.
  std::optional<LqProblem> adversary_problem;
  std::uint64_t seed = 0;
  bool seeded = false;

  static DisturbanceModel zero();
  static DisturbanceModel fixed_sequence(Eigen::MatrixXd w);
  static DisturbanceModel sampled(std::function<Eigen::VectorXd(Rng&)> sampler, std::uint64_t seed);
  static DisturbanceModel worst_case(DrRiccatiSolution sol, LqProblem lq, std::uint64_t seed);
};

struct SimulationResult {
  /// trajectories[r] has T+1 columns x_0..x_T
  std::vector<Eigen::MatrixXd> trajectories;
  Eigen::VectorXd cost;
  double mean_cost = 0.0;
  /// alpha^T max stage cost / (1 - alpha)
  double tail_bound = 0.0;
};

SimulationResult closed_loop_simulate(const LqProblem& lq, const StationaryPolicy& policy,
                                      const DisturbanceModel& disturbance, const Eigen::VectorXd& x0, int horizon,
                                      int rollouts, bool keep_trajectories = true);

}  // namespace wdrc

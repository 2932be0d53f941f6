#include "wdrc/lq.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "wdrc/error.hpp"
#include "wdrc/parallel.hpp"

namespace wdrc {

namespace {

double symmetric_condition(const Eigen::MatrixXd& M) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  const double lo = ev.cwiseAbs().minCoeff(), hi = ev.cwiseAbs().maxCoeff();
  return lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
}

/// Inverse of a symmetric positive definite matrix by Cholesky.
Eigen::MatrixXd spd_inverse(const Eigen::MatrixXd& M, const char* what) {
  Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (M + M.transpose()));
  if (llt.info() != Eigen::Success) throw NumericalError(std::string(what) + " is not positive definite");
  return llt.solve(Eigen::MatrixXd::Identity(M.rows(), M.cols()));
}

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& M) { return 0.5 * (M + M.transpose()); }

void check_spd_inputs(const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R) {
  if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-10 * (1.0 + Q.cwiseAbs().maxCoeff()))
    throw InvalidInputError("lq: Q must be symmetric");
  if ((R - R.transpose()).cwiseAbs().maxCoeff() > 1e-10 * (1.0 + R.cwiseAbs().maxCoeff()))
    throw InvalidInputError("lq: R must be symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eq(symmetrize(Q), Eigen::EigenvaluesOnly);
  if (eq.eigenvalues().minCoeff() < -1e-10) throw InvalidInputError("lq: Q must be positive semidefinite");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> er(symmetrize(R), Eigen::EigenvaluesOnly);
  if (!(er.eigenvalues().minCoeff() > 0.0)) throw InvalidInputError("lq: R must be positive definite");
}

}  // namespace

void LqProblem::validate() const {
  const auto nn = A.rows();
  if (A.cols() != nn || nn == 0) throw InvalidInputError("lq: A must be square");
  if (B.rows() != nn || B.cols() == 0) throw InvalidInputError("lq: B must have n rows");
  if (Xi.rows() != nn) throw InvalidInputError("lq: Xi must have n rows");
  if (Q.rows() != nn || Q.cols() != nn) throw InvalidInputError("lq: Q must be n x n");
  if (R.rows() != B.cols() || R.cols() != B.cols()) throw InvalidInputError("lq: R must be m x m");
  if (!(discount > 0.0 && discount < 1.0)) throw InvalidInputError("lq: discount must lie in (0,1)");
  if (!(lambda > 0.0)) throw InvalidInputError("lq: lambda must be > 0");
  if (samples.size() == 0 || samples.dimension() != Xi.cols())
    throw InvalidInputError("lq: samples must be l-dimensional and nonempty");
  check_spd_inputs(Q, R);
}

double LqProblem::stage_cost(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const {
  return x.dot(Q * x) + u.dot(R * u);
}

DrRiccatiTerms dr_riccati_terms(const LqProblem& lq, const Eigen::MatrixXd& P) {
  const double a = lq.discount;
  DrRiccatiTerms t;
  const Eigen::MatrixXd inner = lq.lambda * Eigen::MatrixXd::Identity(lq.l(), lq.l()) -
                                a * lq.Xi.transpose() * P * lq.Xi;
  if (lq.l() > 0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrize(inner), Eigen::EigenvaluesOnly);
    t.margin = es.eigenvalues().minCoeff();
  } else {
    t.margin = lq.lambda;
  }
  if (!(t.margin > 0.0)) {
    std::ostringstream msg;
    msg << "lq: lambda too small; lambda*I - alpha*Xi'P Xi has smallest eigenvalue " << t.margin;
    throw NumericalError(msg.str());
  }
  t.G = lq.l() > 0 ? spd_inverse(inner, "lambda I - alpha Xi'P Xi") : Eigen::MatrixXd(0, 0);
  const Eigen::MatrixXd XGX = lq.Xi * t.G * lq.Xi.transpose();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(lq.n(), lq.n());
  t.H = I + a * XGX * P;
  t.Rm = symmetrize(lq.R + a * lq.B.transpose() * (P + a * P * XGX * P) * lq.B);
  const Eigen::MatrixXd PB = P * lq.B;
  Eigen::LLT<Eigen::MatrixXd> rm(t.Rm);
  if (rm.info() != Eigen::Success) throw NumericalError("lq: R + alpha B'(P + alpha P Xi G Xi'P)B lost definiteness");
  t.S = P * XGX * P - t.H.transpose() * PB * rm.solve(PB.transpose() * t.H);
  t.S = symmetrize(t.S);
  return t;
}

DrRiccatiSolution solve_dr_riccati(const LqProblem& lq, const RiccatiOptions& options) {
  lq.validate();
  const double a = lq.discount;
  const auto& A = lq.A;
  Eigen::MatrixXd P = symmetrize(lq.Q);
  DrRiccatiSolution sol;
  for (int j = 0; j < options.max_iter; ++j) {
    const DrRiccatiTerms t = dr_riccati_terms(lq, P);
    if (!(t.margin > options.margin)) {
      std::ostringstream msg;
      msg << "lq: lambda too small; smallest eigenvalue of lambda*I - alpha*Xi'P Xi is " << t.margin
          << " at iteration " << j << " (margin " << options.margin << ")";
      throw NumericalError(msg.str());
    }
    const Eigen::MatrixXd next = symmetrize(lq.Q + a * A.transpose() * P * A + a * a * A.transpose() * t.S * A);
    if (!next.allFinite()) throw NumericalError("lq: Riccati iterate became non-finite");
    const double step = (next - P).norm();
    P = next;
    sol.iterations = j + 1;
    if (step <= options.tol * (1.0 + P.norm())) break;
    if (j + 1 == options.max_iter) {
      std::ostringstream msg;
      msg << "lq: DR Riccati iteration did not converge; last step " << step;
      throw NotConvergedError(msg.str());
    }
  }
  const DrRiccatiTerms t = dr_riccati_terms(lq, P);
  if (!(t.margin > options.margin)) throw NumericalError("lq: lambda too small at the converged P");
  sol.P = P;
  sol.G = t.G;
  sol.lambda_margin = t.margin;
  sol.lambda_ok = true;
  sol.residual = (P - (lq.Q + a * A.transpose() * P * A + a * a * A.transpose() * t.S * A)).norm();
  Eigen::LLT<Eigen::MatrixXd> rm(t.Rm);
  sol.K = -rm.solve(a * lq.B.transpose() * P.transpose() * t.H * A);
  if (symmetric_condition(t.Rm) > 1e12) log_warning("lq: R + alpha B'(...)B has condition number above 1e12");
  if (lq.l() > 0 && symmetric_condition(t.G) > 1e12)
    log_warning("lq: lambda I - alpha Xi'P Xi has condition number above 1e12");
  const Eigen::MatrixXd sigma = lq.samples.covariance();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(lq.l(), lq.l());
  sol.z = lq.lambda * ((lq.lambda * t.G - I) * sigma).trace() / (1.0 - a);
  return sol;
}

bool controllable(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  const auto n = A.rows();
  Eigen::MatrixXd C(n, n * B.cols());
  Eigen::MatrixXd blk = B;
  for (Eigen::Index k = 0; k < n; ++k) {
    C.middleCols(k * B.cols(), B.cols()) = blk;
    blk = A * blk;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(C);
  svd.setThreshold(1e-8);
  return svd.rank() == n;
}

bool observable_from_cost(const Eigen::MatrixXd& A, const Eigen::MatrixXd& Q) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrize(Q));
  const Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Eigen::MatrixXd C = ev.asDiagonal() * es.eigenvectors().transpose();
  return controllable(A.transpose(), C.transpose());
}

DareSolution solve_dare(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Eigen::MatrixXd& Q,
                        const Eigen::MatrixXd& R, double discount, double tol, int max_iter) {
  if (A.rows() != A.cols() || B.rows() != A.rows() || Q.rows() != A.rows() || R.rows() != B.cols())
    throw InvalidInputError("dare: inconsistent dimensions");
  if (!(discount > 0.0 && discount < 1.0)) throw InvalidInputError("dare: discount must lie in (0,1)");
  check_spd_inputs(Q, R);
  DareSolution sol;
  sol.stabilizable = controllable(A, B);
  sol.observable = observable_from_cost(A, Q);
  if (!sol.stabilizable) log_warning("dare: (A, B) failed the controllability rank check");
  if (!sol.observable) log_warning("dare: (A, C) failed the observability rank check");
  const double a = discount;
  const auto update = [&](const Eigen::MatrixXd& P) {
    const Eigen::MatrixXd PB = P * B;
    const Eigen::MatrixXd Rm = symmetrize(R + a * B.transpose() * PB);
    return symmetrize(Q + a * A.transpose() * P * A -
                      a * a * A.transpose() * PB * Rm.llt().solve(PB.transpose() * A));
  };
  Eigen::MatrixXd P = symmetrize(Q);
  for (int j = 0; j < max_iter; ++j) {
    const Eigen::MatrixXd next = update(P);
    if (!next.allFinite()) throw NotConvergedError("dare: iteration diverged");
    const double step = (next - P).norm();
    P = next;
    sol.iterations = j + 1;
    if (step <= tol * (1.0 + P.norm())) break;
    if (j + 1 == max_iter) {
      std::ostringstream msg;
      msg << "dare: iteration did not converge; last step " << step;
      throw NotConvergedError(msg.str());
    }
  }
  sol.P = P;
  sol.residual = (P - update(P)).norm();
  const Eigen::MatrixXd Rm = symmetrize(R + a * B.transpose() * P * B);
  sol.K = -a * Rm.llt().solve(B.transpose() * P * A);
  return sol;
}

Eigen::MatrixXd worst_case_atoms(const DrRiccatiSolution& sol, const LqProblem& lq, const Eigen::VectorXd& x) {
  if (!sol.lambda_ok) throw InvalidInputError("worst_case_atoms: solution is not certified for this lambda");
  if (x.size() != lq.n()) throw InvalidInputError("worst_case_atoms: state dimension mismatch");
  const Eigen::VectorXd shift = lq.discount * lq.Xi.transpose() * sol.P * (lq.A + lq.B * sol.K) * x;
  Eigen::MatrixXd atoms(lq.samples.size(), lq.l());
  for (Eigen::Index i = 0; i < lq.samples.size(); ++i)
    atoms.row(i) = (sol.G * (shift + lq.lambda * lq.samples.atom(i))).transpose();
  return atoms;
}

Eigen::VectorXd AugmentedLq::lift(const Eigen::VectorXd& x) const {
  Eigen::VectorXd out(x.size() + 1);
  out << x - x_bar, 1.0;
  return out;
}

StationaryPolicy AugmentedLq::policy(const Eigen::MatrixXd& augmented_gain) const {
  return StationaryPolicy::affine(augmented_gain, x_bar);
}

AugmentedLq augment_nonzero_mean(const LqProblem& lq) {
  lq.validate();
  const auto n = lq.n();
  const Eigen::MatrixXd IA = Eigen::MatrixXd::Identity(n, n) - lq.A;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(IA, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  AugmentedLq out;
  out.condition = s(n - 1) > 0.0 ? s(0) / s(n - 1) : std::numeric_limits<double>::infinity();
  if (!(s(n - 1) > 1e-12 * std::max(1.0, s(0)))) {
    std::ostringstream msg;
    msg << "augment_nonzero_mean: I - A is singular (condition " << out.condition << ")";
    throw UnsupportedError(msg.str());
  }
  if (out.condition > 1e12) log_warning("augment_nonzero_mean: I - A has condition number above 1e12");
  out.w_bar = lq.samples.mean();
  out.x_bar = svd.solve(lq.Xi * out.w_bar);

  LqProblem& p = out.problem;
  p.A = Eigen::MatrixXd::Zero(n + 1, n + 1);
  p.A.topLeftCorner(n, n) = lq.A;
  p.A(n, n) = 1.0;
  p.B = Eigen::MatrixXd::Zero(n + 1, lq.m());
  p.B.topRows(n) = lq.B;
  p.Xi = Eigen::MatrixXd::Zero(n + 1, lq.l());
  p.Xi.topRows(n) = lq.Xi;
  Eigen::MatrixXd E(n, n + 1);
  E << Eigen::MatrixXd::Identity(n, n), out.x_bar;
  p.Q = symmetrize(E.transpose() * lq.Q * E);
  p.R = lq.R;
  p.discount = lq.discount;
  p.lambda = lq.lambda;
  p.samples = lq.samples.centered();
  return out;
}

DisturbanceModel DisturbanceModel::zero() { return {}; }

DisturbanceModel DisturbanceModel::fixed_sequence(Eigen::MatrixXd w) {
  DisturbanceModel d;
  d.fixed = std::move(w);
  return d;
}

DisturbanceModel DisturbanceModel::sampled(std::function<Eigen::VectorXd(Rng&)> sampler, std::uint64_t seed) {
  DisturbanceModel d;
  d.mode = Mode::Sampler;
  d.sampler = std::move(sampler);
  d.seed = seed;
  d.seeded = true;
  return d;
}

DisturbanceModel DisturbanceModel::worst_case(DrRiccatiSolution sol, LqProblem lq, std::uint64_t seed) {
  DisturbanceModel d;
  d.mode = Mode::WorstCase;
  d.adversary = std::move(sol);
  d.adversary_problem = std::move(lq);
  d.seed = seed;
  d.seeded = true;
  return d;
}

SimulationResult closed_loop_simulate(const LqProblem& lq, const StationaryPolicy& policy,
                                      const DisturbanceModel& disturbance, const Eigen::VectorXd& x0, int horizon,
                                      int rollouts, bool keep_trajectories) {
  if (horizon < 1 || rollouts < 1) throw InvalidInputError("closed_loop_simulate: horizon and rollouts must be >= 1");
  if (x0.size() != lq.n()) throw InvalidInputError("closed_loop_simulate: x0 dimension mismatch");
  using Mode = DisturbanceModel::Mode;
  if (disturbance.mode != Mode::Fixed && !disturbance.seeded)
    throw InvalidInputError("closed_loop_simulate: random disturbance modes require a seed");
  if (disturbance.mode == Mode::Sampler && !disturbance.sampler)
    throw InvalidInputError("closed_loop_simulate: sampler mode without a sampler");
  if (disturbance.mode == Mode::WorstCase && (!disturbance.adversary || !disturbance.adversary_problem))
    throw InvalidInputError("closed_loop_simulate: worst-case mode without an adversary solution");
  if (disturbance.mode == Mode::Fixed && disturbance.fixed.size() > 0 && disturbance.fixed.cols() != lq.l())
    throw InvalidInputError("closed_loop_simulate: fixed disturbances must have l columns");

  SimulationResult out;
  out.cost.resize(rollouts);
  if (keep_trajectories) out.trajectories.resize(static_cast<std::size_t>(rollouts));
  std::vector<double> max_stage(static_cast<std::size_t>(rollouts), 0.0);
  parallel_for(static_cast<std::size_t>(rollouts), [&](std::size_t r) {
    Rng rng(derive_seed(disturbance.seed, {static_cast<std::uint64_t>(r)}));
    Eigen::MatrixXd traj;
    if (keep_trajectories) {
      traj.resize(lq.n(), horizon + 1);
      traj.col(0) = x0;
    }
    Eigen::VectorXd x = x0;
    Eigen::VectorXd w = Eigen::VectorXd::Zero(lq.l());
    double cost = 0.0, disc = 1.0, worst = 0.0;
    for (int t = 0; t < horizon; ++t) {
      const Eigen::VectorXd u = policy(x);
      const double c = lq.stage_cost(x, u);
      worst = std::max(worst, c);
      cost += disc * c;
      disc *= lq.discount;
      switch (disturbance.mode) {
        case Mode::Fixed:
          if (disturbance.fixed.rows() > 0)
            w = disturbance.fixed.row(std::min<Eigen::Index>(t, disturbance.fixed.rows() - 1)).transpose();
          break;
        case Mode::Sampler:
          w = disturbance.sampler(rng);
          break;
        case Mode::WorstCase: {
          const Eigen::MatrixXd atoms = worst_case_atoms(*disturbance.adversary, *disturbance.adversary_problem, x);
          std::uniform_int_distribution<Eigen::Index> pick(0, atoms.rows() - 1);
          w = atoms.row(pick(rng)).transpose();
          break;
        }
      }
      x = lq.A * x + lq.B * u + lq.Xi * w;
      if (!x.allFinite()) {
        std::ostringstream msg;
        msg << "closed_loop_simulate: state blew up at step " << t + 1 << " of rollout " << r;
        throw NumericalError(msg.str());
      }
      if (keep_trajectories) traj.col(t + 1) = x;
    }
    out.cost(static_cast<Eigen::Index>(r)) = cost;
    max_stage[r] = worst;
    if (keep_trajectories) out.trajectories[r] = std::move(traj);
  });
  out.mean_cost = out.cost.mean();
  double worst = 0.0;
  for (double v : max_stage) worst = std::max(worst, v);
  out.tail_bound = std::pow(lq.discount, horizon) * worst / (1.0 - lq.discount);
  return out;
}

}  // namespace wdrc

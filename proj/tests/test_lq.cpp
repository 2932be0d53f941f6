#include <doctest.h>

#include <cmath>

#include "wdrc/error.hpp"
#include "wdrc/lq.hpp"

using namespace wdrc;

namespace {

Eigen::MatrixXd scalar(double v) { return Eigen::MatrixXd::Constant(1, 1, v); }

LqProblem scalar_problem(double lambda, std::vector<double> w = {0.2, -0.2, 0.5, -0.5}) {
  LqProblem lq;
  lq.A = scalar(1.1);
  lq.B = scalar(0.5);
  lq.Xi = scalar(0.3);
  lq.Q = scalar(1.0);
  lq.R = scalar(2.0);
  lq.discount = 0.9;
  lq.lambda = lambda;
  Eigen::MatrixXd atoms(static_cast<Eigen::Index>(w.size()), 1);
  for (std::size_t i = 0; i < w.size(); ++i) atoms(static_cast<Eigen::Index>(i), 0) = w[i];
  lq.samples = EmpiricalDistribution(atoms);
  return lq;
}

LqProblem two_state(double lambda) {
  LqProblem lq;
  lq.A.resize(2, 2);
  lq.A << 0.9, 0.3, -0.2, 1.05;
  lq.B.resize(2, 1);
  lq.B << 0.0, 1.0;
  lq.Xi.resize(2, 2);
  lq.Xi << 0.2, 0.0, 0.1, 0.3;
  lq.Q = Eigen::MatrixXd::Identity(2, 2);
  lq.R = scalar(0.5);
  lq.discount = 0.95;
  lq.lambda = lambda;
  Eigen::MatrixXd atoms(3, 2);
  atoms << 0.3, -0.1, -0.2, 0.4, -0.1, -0.3;
  lq.samples = EmpiricalDistribution(atoms);
  return lq;
}

// sup_w alpha (y + xi w)^2 p - lambda (w - w_hat)^2 by direct search
double grid_sup(double y, double xi, double p, double alpha, double lambda, double w_hat, double& argmax) {
  double best = -1e300;
  for (int k = -200000; k <= 200000; ++k) {
    const double w = w_hat + 1e-5 * k;
    const double v = alpha * p * (y + xi * w) * (y + xi * w) - lambda * (w - w_hat) * (w - w_hat);
    if (v > best) {
      best = v;
      argmax = w;
    }
  }
  return best;
}

}  // namespace

TEST_SUITE("lq") {

TEST_CASE("scalar DR Riccati frozen values") {
  const auto sol = solve_dr_riccati(scalar_problem(5.0));
  CHECK(sol.P(0, 0) == doctest::Approx(4.3251093282315884).epsilon(1e-12));
  CHECK(sol.K(0, 0) == doctest::Approx(-0.75570666550717917).epsilon(1e-12));
  CHECK(sol.lambda_margin == doctest::Approx(4.6496661444132413).epsilon(1e-12));
  CHECK(sol.lambda_ok);
  CHECK(sol.residual <= 1e-9);
  const auto dare = solve_dare(scalar(1.1), scalar(0.5), scalar(1.0), scalar(2.0), 0.9);
  CHECK(dare.P(0, 0) == doctest::Approx(4.0085779843175631).epsilon(1e-12));
  CHECK(dare.K(0, 0) == doctest::Approx(-0.68376772370853708).epsilon(1e-12));
  CHECK(sol.P(0, 0) > dare.P(0, 0));
}

TEST_CASE("degenerate adversaries reduce to the DARE") {
  auto lq = two_state(1.0);
  lq.Xi.setZero();
  const auto dr = solve_dr_riccati(lq);
  const auto dare = solve_dare(lq.A, lq.B, lq.Q, lq.R, lq.discount);
  CHECK((dr.P - dare.P).norm() <= 1e-9 * dare.P.norm());
  CHECK((dr.K - dare.K).norm() <= 1e-9);
  CHECK(dr.z == doctest::Approx(0.0));

  lq = two_state(1e6);
  const auto big = solve_dr_riccati(lq);
  CHECK((big.P - dare.P).norm() <= 1e-4 * dare.P.norm());
  CHECK((big.K - dare.K).norm() <= 1e-4);

  // P decreases toward the DARE as lambda grows
  double prev = 1e300;
  for (double lam : {2.0, 5.0, 20.0, 100.0}) {
    const double tr = solve_dr_riccati(two_state(lam)).P.trace();
    CHECK(tr < prev);
    prev = tr;
  }
}

TEST_CASE("small lambda is rejected") {
  CHECK_THROWS_AS(solve_dr_riccati(two_state(1e-3)), NumericalError);
}

TEST_CASE("DARE closed forms") {
  const auto a0 = solve_dare(scalar(0.0), scalar(1.0), scalar(3.0), scalar(1.0), 0.9);
  CHECK(a0.P(0, 0) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(a0.K(0, 0) == doctest::Approx(0.0));
  const auto b0 = solve_dare(scalar(0.9), scalar(0.0), scalar(1.0), scalar(1.0), 0.9);
  CHECK(b0.P(0, 0) == doctest::Approx(1.0 / (1.0 - 0.9 * 0.81)).epsilon(1e-12));
  const auto dare = solve_dare(two_state(1).A, two_state(1).B, two_state(1).Q, two_state(1).R, 0.95);
  CHECK(dare.residual <= 1e-9);
  CHECK(controllable(two_state(1).A, two_state(1).B));
  CHECK(observable_from_cost(two_state(1).A, two_state(1).Q));
  CHECK_FALSE(controllable(Eigen::MatrixXd::Identity(2, 2), two_state(1).B));
}

TEST_CASE("sample covariance enters only through z") {
  const auto a = solve_dr_riccati(scalar_problem(5.0, {0.2, -0.2, 0.5, -0.5}));
  const auto b = solve_dr_riccati(scalar_problem(5.0, {1.0, -1.0}));
  CHECK(a.P(0, 0) == b.P(0, 0));
  CHECK(a.K(0, 0) == b.K(0, 0));
  CHECK(a.z != b.z);
  const double sigma = (0.04 + 0.04 + 0.25 + 0.25) / 4.0;
  const double g = a.G(0, 0);
  CHECK(a.z == doctest::Approx(5.0 * (5.0 * g - 1.0) * sigma / 0.1).epsilon(1e-12));
  CHECK(g == doctest::Approx(1.0 / (5.0 - 0.9 * 0.09 * a.P(0, 0))).epsilon(1e-13));
}

TEST_CASE("quadratic value satisfies the penalized Bellman equation") {
  const auto lq = scalar_problem(5.0);
  const auto sol = solve_dr_riccati(lq);
  const double p = sol.P(0, 0), k = sol.K(0, 0);
  for (double x : {-1.0, 0.3, 2.0}) {
    auto rhs = [&](double u) {
      const double y = 1.1 * x + 0.5 * u;
      double total = 0.0;
      for (Eigen::Index i = 0; i < lq.samples.size(); ++i) {
        const double w_hat = lq.samples.atom(i)(0);
        const double w = (0.9 * 0.3 * p * y + 5.0 * w_hat) / (5.0 - 0.9 * 0.09 * p);
        total += 0.9 * (p * (y + 0.3 * w) * (y + 0.3 * w) + sol.z) - 5.0 * (w - w_hat) * (w - w_hat);
      }
      return x * x + 2.0 * u * u + total / static_cast<double>(lq.samples.size());
    };
    const double v = p * x * x + sol.z;
    CHECK(rhs(k * x) == doctest::Approx(v).epsilon(1e-10));
    CHECK(rhs(k * x + 1e-3) > rhs(k * x));
    CHECK(rhs(k * x - 1e-3) > rhs(k * x));

    const Eigen::MatrixXd atoms = worst_case_atoms(sol, lq, Eigen::VectorXd::Constant(1, x));
    for (Eigen::Index i = 0; i < lq.samples.size(); ++i) {
      double arg = 0.0;
      grid_sup((1.1 + 0.5 * k) * x, 0.3, p, 0.9, 5.0, lq.samples.atom(i)(0), arg);
      CHECK(atoms(i, 0) == doctest::Approx(arg).epsilon(2e-5));
    }
  }
}

TEST_CASE("nonzero-mean augmentation") {
  auto lq = two_state(4.0);
  const auto plain = solve_dr_riccati(lq);
  const auto noop = augment_nonzero_mean(lq);
  CHECK(noop.x_bar.norm() <= 1e-12);
  const auto aug0 = solve_dr_riccati(noop.problem);
  CHECK((aug0.K.leftCols(2) - plain.K).norm() <= 1e-9);
  CHECK(aug0.K.col(2).norm() <= 1e-9);

  Eigen::MatrixXd shifted = lq.samples.atoms();
  shifted.rowwise() += Eigen::RowVector2d(0.5, -0.2);
  lq.samples = EmpiricalDistribution(shifted);
  const auto aug = augment_nonzero_mean(lq);
  const Eigen::Matrix2d IA = Eigen::Matrix2d::Identity() - lq.A;
  CHECK((IA * aug.x_bar - lq.Xi * aug.w_bar).norm() <= 1e-12);
  CHECK(aug.problem.samples.mean().norm() <= 1e-14);
  const Eigen::Vector2d x(0.7, -1.3);
  const Eigen::VectorXd z = aug.lift(x);
  CHECK(z.dot(aug.problem.Q * z) == doctest::Approx(x.dot(lq.Q * x)).epsilon(1e-12));
  // the lifted dynamics reproduce the original ones under the mean disturbance
  const Eigen::VectorXd u = Eigen::VectorXd::Constant(1, 0.4);
  const Eigen::VectorXd next = lq.A * x + lq.B * u + lq.Xi * aug.w_bar;
  const Eigen::VectorXd lifted = aug.problem.A * z + aug.problem.B * u;
  CHECK((lifted - aug.lift(next)).norm() <= 1e-12);

  lq.A = Eigen::MatrixXd::Identity(2, 2);
  CHECK_THROWS_AS(augment_nonzero_mean(lq), UnsupportedError);
}

TEST_CASE("closed-loop simulation") {
  auto lq = two_state(4.0);
  lq.Xi.setZero();
  const auto dare = solve_dare(lq.A, lq.B, lq.Q, lq.R, lq.discount);
  const auto policy = StationaryPolicy::linear(dare.K);
  const Eigen::Vector2d x0(1.0, -0.5);
  const auto sim = closed_loop_simulate(lq, policy, DisturbanceModel::zero(), x0, 600, 1);
  CHECK(sim.mean_cost == doctest::Approx(x0.dot(dare.P * x0)).epsilon(1e-9));
  const Eigen::MatrixXd Acl = lq.A + lq.B * dare.K;
  Eigen::VectorXd x = x0;
  for (int t = 0; t < 5; ++t) x = Acl * x;
  CHECK((sim.trajectories[0].col(5) - x).norm() <= 1e-12);
  CHECK(sim.tail_bound >= 0.0);

  const auto dr_lq = two_state(4.0);
  auto sampler = [](Rng& rng) {
    std::normal_distribution<double> n(0.0, 0.1);
    return Eigen::Vector2d(n(rng), n(rng)).eval();
  };
  const auto s1 = closed_loop_simulate(dr_lq, policy, DisturbanceModel::sampled(sampler, 11), x0, 50, 8, false);
  const auto s2 = closed_loop_simulate(dr_lq, policy, DisturbanceModel::sampled(sampler, 11), x0, 50, 8, false);
  CHECK(s1.cost == s2.cost);
  CHECK(s1.trajectories.empty());

  Eigen::MatrixXd fixed(1, 2);
  fixed << 0.1, 0.0;
  const auto f = closed_loop_simulate(dr_lq, policy, DisturbanceModel::fixed_sequence(fixed), x0, 3, 1);
  Eigen::VectorXd y = x0;
  for (int t = 0; t < 3; ++t) y = (dr_lq.A + dr_lq.B * dare.K) * y + dr_lq.Xi * fixed.row(0).transpose();
  CHECK((f.trajectories[0].col(3) - y).norm() <= 1e-12);

  const auto sol = solve_dr_riccati(dr_lq);
  const auto wc = closed_loop_simulate(dr_lq, StationaryPolicy::linear(sol.K),
                                       DisturbanceModel::worst_case(sol, dr_lq, 3), x0, 400, 64, false);
  // the worst-case atoms raise the cost above the undisturbed one
  const auto calm = closed_loop_simulate(dr_lq, StationaryPolicy::linear(sol.K), DisturbanceModel::zero(), x0, 400, 1);
  CHECK(wc.mean_cost > calm.mean_cost);
  CHECK_THROWS_AS(closed_loop_simulate(dr_lq, policy, DisturbanceModel{}, Eigen::VectorXd::Zero(3), 5, 1),
                  InvalidInputError);
}

}

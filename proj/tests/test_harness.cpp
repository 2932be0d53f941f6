#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "support/instances.hpp"
#include "wdrc/error.hpp"
#include "wdrc/harness.hpp"

using namespace wdrc;

namespace {

InvestmentStudyConfig quick_investment() {
  InvestmentStudyConfig c;
  c.problem.grid_nodes = 15;
  c.problem.action_divisions = 5;
  c.dp.solver = SolverKind::MPI;
  c.dp.w_points = 11;
  c.evaluation.horizon = 60;
  c.evaluation.rollouts = 40;
  c.N = {5};
  c.theta = {0.0, 0.05};
  c.trials = 30;
  c.seed = 17;
  return c;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("horizon and success rule") {
  const int T = required_horizon(1e-3, 2.0, 1.0, 0.9, 0.9);
  CHECK(std::pow(0.9, T) * 2.0 / 0.1 <= 1e-3);
  CHECK(std::pow(0.9, T - 1) * 2.0 / 0.1 > 1e-3);
  CHECK(reliable(1.0, 0.1, 1.1));
  CHECK_FALSE(reliable(1.0, 0.1, 1.05));
  CHECK(reliable(1.0, 0.1, 1.05, 0.05));
}

TEST_CASE("out-of-sample cost closed forms") {
  auto p = testkit::small_problem(11, {0.0}, 0.5, 0.0, 0.0, 0.0);
  const auto policy = StationaryPolicy::tabular(p.grid, Eigen::MatrixXd::Zero(1, 11));
  const auto truth = point_mass_sampler(Eigen::VectorXd::Zero(1));
  OutOfSampleOptions o;
  o.horizon = 40;
  o.rollouts = 3;
  o.grid_chain = false;
  const auto r = out_of_sample_cost(policy, p, truth, State::Ones(1), o, 1);
  double expect = 0.0, x = 1.0, d = 1.0;
  for (int t = 0; t < 40; ++t, x *= 0.5, d *= 0.9) expect += d * (x - 0.5) * (x - 0.5);
  CHECK(r.mean == doctest::Approx(expect).epsilon(1e-12));
  CHECK(r.standard_error == doctest::Approx(0.0));

  p.stage_cost = [](const State&, const Action&) { return 1.0; };
  p.growth_b = 1.0;
  for (bool chain : {true, false}) {
    o.grid_chain = chain;
    const auto one = out_of_sample_cost(policy, p, truth, State::Constant(1, 0.37), o, 2);
    CHECK(one.mean == doctest::Approx((1.0 - std::pow(0.9, 40)) / 0.1).epsilon(1e-12));
    CHECK(one.truncation_bound == doctest::Approx(std::pow(0.9, 40) / 0.1).epsilon(1e-12));
  }
  p.stage_cost = [](const State&, const Action&) { return 0.0; };
  CHECK(out_of_sample_cost(policy, p, gaussian_sampler(Eigen::VectorXd::Constant(1, 0.5), Eigen::VectorXd::Ones(1)),
                           State::Ones(1), o, 3)
            .mean == 0.0);

  o.truncation_tolerance = 1e-300;
  o.horizon_cap = 100;
  CHECK_THROWS_AS(out_of_sample_cost(policy, p, truth, State::Ones(1), o, 4), ConfigurationError);
}

TEST_CASE("DR solve properties") {
  const auto p = testkit::small_problem(21, {0.0, 0.5, 1.0});
  std::mt19937_64 rng(5);
  const auto s = testkit::uniform_samples(6, rng);
  const GroundMetric metric(1.0);
  DpOptions o;
  o.w_points = 21;
  const auto saa = saa_policy(p, s, metric, o);
  const auto zero = solve_dr(p, s, 0.0, metric, o);
  CHECK(saa.value.values() == zero.value.values());

  Eigen::MatrixXd rev = s.atoms().colwise().reverse();
  const auto a = solve_dr(p, s, 0.1, metric, o);
  const auto b = solve_dr(p, EmpiricalDistribution(rev), 0.1, metric, o);
  CHECK((a.value.values() - b.value.values()).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK((a.value.values() - saa.value.values()).minCoeff() >= -1e-10);
  for (auto kind : {SolverKind::PI, SolverKind::MPI}) {
    o.solver = kind;
    const auto c = solve_dr(p, s, 0.1, metric, o);
    CHECK((a.value.values() - c.value.values()).cwiseAbs().maxCoeff() <= 1e-4);
  }
}

TEST_CASE("investment studies") {
  const auto c = quick_investment();
  const auto rep = investment_reliability(c);
  CHECK(rep.reliability.rows() == 2);
  CHECK(rep.reliability.cols() == 1);
  CHECK(rep.excluded.sum() == 0);
  CHECK(rep.success.size() == 60);
  CHECK(rep.reliability(1, 0) >= rep.reliability(0, 0));
  const auto again = investment_reliability(c);
  CHECK(again.cost == rep.cost);

  auto z = c;
  z.theta = {0.0};
  const auto table = dr_vs_saa_comparison(z, 5, 20);
  CHECK(table.cost.cols() == 2);
  CHECK(table.cost.col(0) == table.cost.col(1));
  CHECK(table.best_theta == 0);
  auto few = c;
  few.trials = 10;
  CHECK_THROWS_AS(investment_reliability(few), ConfigurationError);
}

TEST_CASE("statistics helpers") {
  CHECK(spearman({1, 2, 3, 4}, {10, 20, 25, 100}) == doctest::Approx(1.0));
  CHECK(spearman({1, 2, 3, 4}, {4, 3, 2, 1}) == doctest::Approx(-1.0));
  // x ranks 1 2.5 2.5 4 against 1 2 3 4
  CHECK(spearman({1, 2, 2, 3}, {1, 2, 3, 4}) == doctest::Approx(4.5 / std::sqrt(4.5 * 5.0)));
  CHECK(spearman_p_value(0.0, 10) == doctest::Approx(0.5));
  CHECK(spearman_p_value(0.9, 30) < 1e-5);
  CHECK(sign_test_p_value({1, 2, 3, 4, 5}) == doctest::Approx(1.0 / 32.0));
  CHECK(sign_test_p_value({1, -1, 0}) == doctest::Approx(0.75));
  CHECK(median({3, 1, 2}) == 2.0);
  CHECK(median({4, 1, 2, 3}) == 2.5);
}

TEST_CASE("LQ reliability and power study") {
  LqReliabilityConfig c;
  c.base.A = Eigen::MatrixXd::Constant(1, 1, 0.8);
  c.base.B = Eigen::MatrixXd::Constant(1, 1, 1.0);
  c.base.Xi = Eigen::MatrixXd::Constant(1, 1, 1.0);
  c.base.Q = Eigen::MatrixXd::Identity(1, 1);
  c.base.R = Eigen::MatrixXd::Identity(1, 1);
  c.base.discount = 0.9;
  c.lambda = {3.0, 30.0};
  c.N = {5};
  c.trials = 30;
  c.horizon = 100;
  c.rollouts = 50;
  c.x0 = Eigen::VectorXd::Ones(1);
  c.truth = gaussian_sampler(Eigen::VectorXd::Zero(1), Eigen::VectorXd::Constant(1, 0.3));
  const auto rep = lq_reliability(c);
  CHECK(rep.reliability.rows() == 2);
  CHECK(rep.reliability(0, 0) >= rep.reliability(1, 0));
  CHECK(rep.mean_certificate(0, 0) > rep.mean_certificate(1, 0));

  PowerStudyConfig pc;
  pc.N = 5;
  pc.rollouts = 10;
  pc.horizon = 300;
  const auto res = power_frequency_study(synthetic_three_generator_network(), pc);
  CHECK(res.dr.lambda_ok);
  CHECK(res.dr_frequency.rows() == 301);
  CHECK(res.dr_frequency.cols() == 3);
  CHECK(res.dr_frequency(0, 0) == doctest::Approx(0.1));
}

}

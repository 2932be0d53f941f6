#include "wdrc/harness.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "wdrc/error.hpp"
#include "wdrc/parallel.hpp"

namespace wdrc {

Sampler gaussian_sampler(Eigen::VectorXd mean, Eigen::VectorXd stddev) {
  if (mean.size() != stddev.size()) throw InvalidInputError("gaussian_sampler: mean and stddev sizes differ");
  if ((stddev.array() < 0.0).any()) throw InvalidInputError("gaussian_sampler: negative standard deviation");
  return [mean = std::move(mean), stddev = std::move(stddev)](Rng& rng) {
    std::normal_distribution<double> z(0.0, 1.0);
    Eigen::VectorXd w(mean.size());
    for (Eigen::Index k = 0; k < mean.size(); ++k) w(k) = mean(k) + stddev(k) * z(rng);
    return w;
  };
}

Sampler point_mass_sampler(Eigen::VectorXd w) {
  return [w = std::move(w)](Rng&) { return w; };
}

EmpiricalDistribution draw_samples(const Sampler& sampler, int N, std::uint64_t seed) {
  if (N < 1) throw InvalidInputError("draw_samples: N must be >= 1");
  Rng rng(mix_seed(seed));
  std::vector<Eigen::VectorXd> rows;
  for (int i = 0; i < N; ++i) rows.push_back(sampler(rng));
  Eigen::MatrixXd atoms(N, rows.front().size());
  for (int i = 0; i < N; ++i) atoms.row(i) = rows[static_cast<std::size_t>(i)].transpose();
  return EmpiricalDistribution(std::move(atoms));
}

ControlProblem investment_problem(const InvestmentParams& params) {
  if (!(params.zeta > 0.0)) throw ConfigurationError("investment: zeta must be > 0");
  if (!(params.eta >= 1.0)) throw ConfigurationError("investment: eta must be >= 1");
  if (!(params.x_max > 0.0)) throw ConfigurationError("investment: x_max must be > 0");
  if (!(params.w_upper > params.w_lower)) throw ConfigurationError("investment: empty return support");
  ControlProblem p;
  const double eta = params.eta, zeta = params.zeta;
  p.dynamics = [eta](const State& x, const Action& u, const Disturbance& w) {
    State next(1);
    next(0) = eta * (x(0) - u(0) - u(1)) + w(0) * u(0);
    return next;
  };
  p.stage_cost = [zeta](const State&, const Action& u) { return -(u(1) - zeta * u(1) * u(1)); };
  p.actions = std::make_shared<BudgetActionSet>(2, params.action_divisions, 0);
  p.discount = params.discount;
  p.weight = unit_weight();
  p.growth_beta = 1.0;
  p.disturbance_lower = Eigen::VectorXd::Constant(1, params.w_lower);
  p.disturbance_upper = Eigen::VectorXd::Constant(1, params.w_upper);
  p.grid = std::make_shared<RectGrid>(RectGrid::uniform(Eigen::VectorXd::Zero(1),
                                                        Eigen::VectorXd::Constant(1, params.x_max),
                                                        {params.grid_nodes}));
  p.growth_b = sup_stage_cost(p);
  p.validate();
  return p;
}

DrBellman make_bellman(const ControlProblem& problem, const EmpiricalDistribution& samples, double theta,
                       const GroundMetric& metric, const DpOptions& options) {
  const auto l = problem.disturbance_dimension();
  if (samples.dimension() != l) throw InvalidInputError("solve: sample dimension differs from the disturbance box");
  DisturbanceGrid wg = DisturbanceGrid::uniform(problem.disturbance_lower, problem.disturbance_upper,
                                                std::vector<int>(static_cast<std::size_t>(l), options.w_points),
                                                samples, metric);
  return DrBellman(problem, Ambiguity{samples, theta, metric}, std::move(wg), options.bellman);
}

DpSolution solve_dr(const ControlProblem& problem, const EmpiricalDistribution& samples, double theta,
                    const GroundMetric& metric, const DpOptions& options) {
  const DrBellman op = make_bellman(problem, samples, theta, metric, options);
  const GridValueFunction v0 = GridValueFunction::constant(problem.grid, 0.0);
  switch (options.solver) {
    case SolverKind::VI: {
      auto r = value_iteration(op, v0, StopRule{options.delta, std::nullopt, options.max_iter});
      return {std::move(r.value), std::move(r.policy), std::move(r.report)};
    }
    case SolverKind::PI: {
      auto r = policy_iteration(op, greedy_policy(op, v0), options.delta, options.delta, options.max_iter,
                                options.max_iter);
      return {std::move(r.value), std::move(r.policy), std::move(r.report)};
    }
    case SolverKind::MPI: {
      auto r = modified_policy_iteration(op, v0, constant_order(options.mpi_order), options.delta, options.max_iter);
      return {std::move(r.value), std::move(r.policy), std::move(r.report)};
    }
  }
  throw ConfigurationError("solve: unknown solver");
}

DpSolution saa_policy(const ControlProblem& problem, const EmpiricalDistribution& samples, const GroundMetric& metric,
                      const DpOptions& options) {
  return solve_dr(problem, samples, 0.0, metric, options);
}

int required_horizon(double tolerance, double b, double xi_max, double discount, double tau) {
  if (!(tolerance > 0.0)) throw InvalidInputError("required_horizon: tolerance must be > 0");
  const double scale = b * xi_max / (1.0 - tau);
  if (scale <= tolerance) return 1;
  return std::max(1, static_cast<int>(std::ceil(std::log(tolerance / scale) / std::log(discount))));
}

OutOfSampleResult out_of_sample_cost(const StationaryPolicy& policy, const ControlProblem& problem,
                                     const Sampler& truth, const State& x0, const OutOfSampleOptions& options,
                                     std::uint64_t seed) {
  if (options.rollouts < 1 || options.horizon < 1) throw InvalidInputError("out_of_sample_cost: horizon and rollouts must be >= 1");
  const RectGrid& grid = *problem.grid;
  double xi_max = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) xi_max = std::max(xi_max, problem.weight(grid.node(i)));
  int horizon = options.horizon;
  const auto bound_at = [&](int T) {
    return std::pow(problem.discount, T) * problem.growth_b * xi_max / (1.0 - problem.tau());
  };
  if (options.truncation_tolerance > 0.0 && bound_at(horizon) > options.truncation_tolerance) {
    const int need = required_horizon(options.truncation_tolerance, problem.growth_b, xi_max, problem.discount,
                                      problem.tau());
    if (need > options.horizon_cap) {
      std::ostringstream msg;
      msg << "out_of_sample_cost: truncation tolerance needs horizon T = " << need << " above the cap "
          << options.horizon_cap;
      throw ConfigurationError(msg.str());
    }
    horizon = need;
  }

  OutOfSampleResult out;
  out.per_rollout.resize(options.rollouts);
  std::vector<std::size_t> clamped(static_cast<std::size_t>(options.rollouts), 0);
  const std::size_t nodes = grid.size();
  std::vector<Action> node_action;
  std::vector<double> node_cost;
  if (options.grid_chain) {
    const bool tabular = policy.kind() == StationaryPolicy::Kind::Tabular;
    for (std::size_t i = 0; i < nodes; ++i) {
      node_action.push_back(tabular ? policy.at_node(i) : policy(grid.node(i)));
      node_cost.push_back(problem.stage_cost(grid.node(i), node_action.back()));
    }
  }
  parallel_for(static_cast<std::size_t>(options.rollouts), [&](std::size_t r) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(r)}));
    double cost = 0.0, disc = 1.0;
    if (options.grid_chain) {
      // node probabilities are carried exactly; only w is sampled
      std::vector<double> prob(nodes, 0.0), next(nodes, 0.0);
      std::vector<std::size_t> active, touched;
      const Stencil s0 = grid.stencil(grid.clamp(x0));
      for (int c = 0; c < s0.count; ++c) prob[s0.node[static_cast<std::size_t>(c)]] += s0.weight[static_cast<std::size_t>(c)];
      for (std::size_t i = 0; i < nodes; ++i)
        if (prob[i] > 0.0) active.push_back(i);
      for (int t = 0; t < horizon; ++t) {
        const Disturbance w = truth(rng);
        double step = 0.0;
        touched.clear();
        for (std::size_t i : active) {
          step += prob[i] * node_cost[i];
          bool moved = false;
          const Stencil s = grid.stencil(grid.clamp(problem.dynamics(grid.node(i), node_action[i], w), &moved));
          if (moved) ++clamped[r];
          for (int c = 0; c < s.count; ++c) {
            const std::size_t j = s.node[static_cast<std::size_t>(c)];
            const double m = prob[i] * s.weight[static_cast<std::size_t>(c)];
            if (m == 0.0) continue;
            if (next[j] == 0.0) touched.push_back(j);
            next[j] += m;
          }
          prob[i] = 0.0;
        }
        cost += disc * step;
        disc *= problem.discount;
        std::sort(touched.begin(), touched.end());
        active.swap(touched);
        for (std::size_t j : active) {
          prob[j] = next[j];
          next[j] = 0.0;
        }
      }
    } else {
      State x = grid.clamp(x0);
      for (int t = 0; t < horizon; ++t) {
        const Action u = policy(x);
        cost += disc * problem.stage_cost(x, u);
        disc *= problem.discount;
        const Disturbance w = truth(rng);
        bool moved = false;
        x = grid.clamp(problem.dynamics(x, u, w), &moved);
        if (moved) ++clamped[r];
      }
    }
    if (!std::isfinite(cost)) throw NumericalError("out_of_sample_cost: non-finite rollout cost");
    out.per_rollout(static_cast<Eigen::Index>(r)) = cost;
  });
  out.mean = out.per_rollout.mean();
  if (options.rollouts > 1) {
    const double var = (out.per_rollout.array() - out.mean).square().sum() / (options.rollouts - 1);
    out.standard_error = std::sqrt(var / options.rollouts);
  }
  out.truncation_bound = bound_at(horizon);
  for (auto c : clamped) out.clamped += c;
  return out;
}

bool reliable(double estimate, double standard_error, double certificate, double truncation_bound) {
  return estimate + standard_error <= certificate + truncation_bound;
}

namespace {

void init_report(ReliabilityReport& rep, const std::vector<double>& parameter, const std::vector<int>& N, int trials) {
  if (parameter.empty() || N.empty()) throw ConfigurationError("reliability: sweep lists must be nonempty");
  if (trials < 30) throw ConfigurationError("reliability: trials must be >= 30");
  rep.parameter = parameter;
  rep.N = N;
  rep.trials = trials;
  const auto K = static_cast<Eigen::Index>(parameter.size()), M = static_cast<Eigen::Index>(N.size());
  rep.reliability = Eigen::MatrixXd::Zero(K, M);
  rep.standard_error = Eigen::MatrixXd::Zero(K, M);
  rep.mean_cost = Eigen::MatrixXd::Zero(K, M);
  rep.mean_certificate = Eigen::MatrixXd::Zero(K, M);
  rep.excluded = Eigen::MatrixXi::Zero(K, M);
  rep.success.assign(parameter.size() * N.size() * static_cast<std::size_t>(trials), 0);
  rep.cost.assign(rep.success.size(), std::numeric_limits<double>::quiet_NaN());
}

void finish_report(ReliabilityReport& rep, const std::vector<double>& certificate,
                   const std::vector<unsigned char>& failed) {
  for (std::size_t k = 0; k < rep.parameter.size(); ++k)
    for (std::size_t n = 0; n < rep.N.size(); ++n) {
      int ok = 0, used = 0;
      double cost = 0.0, cert = 0.0;
      for (int t = 0; t < rep.trials; ++t) {
        const auto i = rep.index(k, n, static_cast<std::size_t>(t));
        if (failed[i]) continue;
        ++used;
        ok += rep.success[i];
        cost += rep.cost[i];
        cert += certificate[i];
      }
      const auto kk = static_cast<Eigen::Index>(k), nn = static_cast<Eigen::Index>(n);
      rep.excluded(kk, nn) = rep.trials - used;
      if (used > 0) {
        const double p = static_cast<double>(ok) / used;
        rep.reliability(kk, nn) = p;
        rep.standard_error(kk, nn) = std::sqrt(p * (1.0 - p) / used);
        rep.mean_cost(kk, nn) = cost / used;
        rep.mean_certificate(kk, nn) = cert / used;
      }
    }
}

}  // namespace

ReliabilityReport investment_reliability(const InvestmentStudyConfig& config) {
  if (config.x0.empty()) throw ConfigurationError("reliability: x0 set must be nonempty");
  const ControlProblem problem = investment_problem(config.problem);
  const GroundMetric metric(1.0);
  const Sampler truth = gaussian_sampler(Eigen::VectorXd::Constant(1, config.truth_mean),
                                         Eigen::VectorXd::Constant(1, config.truth_std));
  ReliabilityReport rep;
  init_report(rep, config.theta, config.N, config.trials);
  std::vector<double> certificate(rep.success.size(), 0.0);
  std::vector<unsigned char> failed(rep.success.size(), 0);
  const std::size_t jobs = config.N.size() * static_cast<std::size_t>(config.trials);
  parallel_for(jobs, [&](std::size_t job) {
    const std::size_t n = job / static_cast<std::size_t>(config.trials);
    const std::size_t t = job % static_cast<std::size_t>(config.trials);
    const auto N = static_cast<std::uint64_t>(config.N[n]);
    const EmpiricalDistribution samples = draw_samples(truth, config.N[n], derive_seed(config.seed, {1, N, t}));
    for (std::size_t k = 0; k < config.theta.size(); ++k) {
      const auto i = rep.index(k, n, t);
      try {
        const DpSolution sol = solve_dr(problem, samples, config.theta[k], metric, config.dp);
        bool all = true;
        for (std::size_t s = 0; s < config.x0.size(); ++s) {
          const State x0 = State::Constant(1, config.x0[s]);
          const double cert = sol.value.evaluate(x0);
          const OutOfSampleResult oos = out_of_sample_cost(sol.policy, problem, truth, x0, config.evaluation,
                                                           derive_seed(config.seed, {2, N, t, s}));
          all = all && reliable(oos.mean, oos.standard_error, cert, oos.truncation_bound);
          if (s == 0) {
            rep.cost[i] = oos.mean;
            certificate[i] = cert;
          }
        }
        rep.success[i] = all ? 1 : 0;
      } catch (const Error& e) {
        failed[i] = 1;
        log_warning(std::string("reliability trial excluded: ") + e.what());
      }
    }
  });
  finish_report(rep, certificate, failed);
  return rep;
}

ComparisonTable dr_vs_saa_comparison(const InvestmentStudyConfig& config, int N, int training_draws) {
  if (training_draws < 20) throw ConfigurationError("comparison: training_draws must be >= 20");
  if (config.theta.empty()) throw ConfigurationError("comparison: theta list must be nonempty");
  const ControlProblem problem = investment_problem(config.problem);
  const GroundMetric metric(1.0);
  const Sampler truth = gaussian_sampler(Eigen::VectorXd::Constant(1, config.truth_mean),
                                         Eigen::VectorXd::Constant(1, config.truth_std));
  const State x0 = State::Constant(1, config.x0.empty() ? 1.0 : config.x0.front());
  ComparisonTable out;
  out.theta = config.theta;
  out.N = N;
  const auto K = static_cast<Eigen::Index>(config.theta.size());
  out.cost.resize(training_draws, K + 1);
  parallel_for(static_cast<std::size_t>(training_draws), [&](std::size_t d) {
    const auto uN = static_cast<std::uint64_t>(N);
    const EmpiricalDistribution samples = draw_samples(truth, N, derive_seed(config.seed, {3, uN, d}));
    const std::uint64_t test_seed = derive_seed(config.seed, {4, uN, d});
    const auto dd = static_cast<Eigen::Index>(d);
    for (Eigen::Index k = 0; k < K; ++k) {
      const DpSolution sol = solve_dr(problem, samples, config.theta[static_cast<std::size_t>(k)], metric, config.dp);
      out.cost(dd, k) = out_of_sample_cost(sol.policy, problem, truth, x0, config.evaluation, test_seed).mean;
    }
    const DpSolution saa = saa_policy(problem, samples, metric, config.dp);
    out.cost(dd, K) = out_of_sample_cost(saa.policy, problem, truth, x0, config.evaluation, test_seed).mean;
  });
  out.mean = out.cost.colwise().mean().transpose();
  Eigen::Index best = 0;
  out.mean.head(K).minCoeff(&best);
  out.best_theta = static_cast<int>(best);
  return out;
}

ReliabilityReport lq_reliability(const LqReliabilityConfig& config) {
  if (!config.truth) throw ConfigurationError("lq reliability: truth sampler is required");
  ReliabilityReport rep;
  init_report(rep, config.lambda, config.N, config.trials);
  std::vector<double> certificate(rep.success.size(), 0.0);
  std::vector<unsigned char> failed(rep.success.size(), 0);
  const std::size_t jobs = config.N.size() * static_cast<std::size_t>(config.trials);
  const bool quiet = !warnings_enabled();
  parallel_for(jobs, [&](std::size_t job) {
    const std::size_t n = job / static_cast<std::size_t>(config.trials);
    const std::size_t t = job % static_cast<std::size_t>(config.trials);
    const auto N = static_cast<std::uint64_t>(config.N[n]);
    const EmpiricalDistribution samples = draw_samples(config.truth, config.N[n], derive_seed(config.seed, {5, N, t}));
    for (std::size_t k = 0; k < config.lambda.size(); ++k) {
      const auto i = rep.index(k, n, t);
      try {
        LqProblem lq = config.base;
        lq.samples = samples;
        lq.lambda = config.lambda[k];
        const DrRiccatiSolution sol = solve_dr_riccati(lq);
        const double cert = config.x0.dot(sol.P * config.x0) + sol.z;
        const SimulationResult sim =
            closed_loop_simulate(lq, StationaryPolicy::linear(sol.K),
                                 DisturbanceModel::sampled(config.truth, derive_seed(config.seed, {6, N, t})),
                                 config.x0, config.horizon, config.rollouts, false);
        const double se = std::sqrt((sim.cost.array() - sim.mean_cost).square().sum() /
                                    std::max(1, config.rollouts - 1) / config.rollouts);
        rep.cost[i] = sim.mean_cost;
        certificate[i] = cert;
        rep.success[i] = reliable(sim.mean_cost, se, cert) ? 1 : 0;
      } catch (const Error& e) {
        failed[i] = 1;
        if (!quiet) log_warning(std::string("lq reliability trial excluded: ") + e.what());
      }
    }
  });
  finish_report(rep, certificate, failed);
  return rep;
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> rank(v.size());
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[idx[k]] = r;
    i = j + 1;
  }
  return rank;
}

}  // namespace

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidInputError("spearman: need two equal-length series");
  const auto rx = average_ranks(x), ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

double spearman_p_value(double rho, std::size_t n) {
  if (n < 2) return 1.0;
  const double z = rho * std::sqrt(static_cast<double>(n - 1));
  return 0.5 * std::erfc(z / std::sqrt(2.0));
}

double sign_test_p_value(const std::vector<double>& differences) {
  int pos = 0, n = 0;
  for (double d : differences) {
    if (d == 0.0) continue;
    ++n;
    if (d > 0.0) ++pos;
  }
  if (n == 0) return 1.0;
  double p = 0.0;
  for (int k = pos; k <= n; ++k)
    p += std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) - n * std::log(2.0));
  return std::min(1.0, p);
}

double median(std::vector<double> v) {
  if (v.empty()) throw InvalidInputError("median: empty input");
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

PowerNetwork synthetic_three_generator_network(double dt) {
  std::vector<Bus> buses{{1, true, 20.0, 20.0}, {2, true, 30.0, 24.0}, {3, true, 25.0, 16.0}, {4, false, 0, 0},
                         {5, false, 0, 0}};
  std::vector<Line> lines{{1, 4, 10.0, 0.0}, {2, 4, 8.0, 0.0}, {4, 5, 12.0, 0.0}, {3, 5, 9.0, 0.0}, {2, 5, 5.0, 0.0}};
  return PowerNetwork(std::move(buses), std::move(lines), dt);
}

LqProblem swing_lq_problem(const PowerNetwork& network, double discount, double lambda,
                           const EmpiricalDistribution& samples) {
  const Eigen::VectorXd M = network.inertia();
  const SwingModel model = build_swing_state_space(network.reduced_laplacian(), M, network.damping(), network.dt());
  LqProblem lq;
  lq.A = model.A;
  lq.B = model.B;
  lq.Xi = model.B;
  lq.Q = swing_state_cost(M);
  lq.R = Eigen::MatrixXd::Identity(M.size(), M.size());
  lq.discount = discount;
  lq.lambda = lambda;
  lq.samples = samples;
  return lq;
}

PowerStudyResult power_frequency_study(const PowerNetwork& network, const PowerStudyConfig& config) {
  const auto g = static_cast<Eigen::Index>(network.generator_positions().size());
  const Sampler noise = gaussian_sampler(Eigen::VectorXd::Zero(g), Eigen::VectorXd::Constant(g, config.sample_std));
  const EmpiricalDistribution samples = draw_samples(noise, config.N, derive_seed(config.seed, {7})).centered();
  PowerStudyResult out;
  out.lq = swing_lq_problem(network, config.discount, config.lambda, samples);
  out.dr = solve_dr_riccati(out.lq);
  out.lqg = solve_dare(out.lq.A, out.lq.B, out.lq.Q, out.lq.R, out.lq.discount);

  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(2 * g);
  x0(g) = config.initial_frequency;
  const DisturbanceModel adversary = DisturbanceModel::worst_case(out.dr, out.lq, derive_seed(config.seed, {8}));
  const auto mean_frequency = [&](const SimulationResult& sim) {
    Eigen::MatrixXd f = Eigen::MatrixXd::Zero(config.horizon + 1, g);
    for (const auto& traj : sim.trajectories) f += traj.bottomRows(g).transpose();
    return Eigen::MatrixXd(f / static_cast<double>(sim.trajectories.size()));
  };
  const SimulationResult dr = closed_loop_simulate(out.lq, StationaryPolicy::linear(out.dr.K), adversary, x0,
                                                   config.horizon, config.rollouts);
  const SimulationResult lqg = closed_loop_simulate(out.lq, StationaryPolicy::linear(out.lqg.K), adversary, x0,
                                                    config.horizon, config.rollouts);
  out.dr_frequency = mean_frequency(dr);
  out.lqg_frequency = mean_frequency(lqg);
  out.dr_metrics = frequency_metrics(out.dr_frequency, network.dt(), config.threshold, config.initial_frequency);
  out.lqg_metrics = frequency_metrics(out.lqg_frequency, network.dt(), config.threshold, config.initial_frequency);
  return out;
}

}  // namespace wdrc

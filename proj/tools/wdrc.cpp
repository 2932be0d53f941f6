// wdrc command-line front end: solve, evaluate, worst-case, radius, lq and
// the experiment pipelines. Flag values are folded into the configuration as
// overrides so the manifest echoes every effective setting.
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "wdrc/concentration.hpp"
#include "wdrc/config.hpp"
#include "wdrc/csv.hpp"
#include "wdrc/error.hpp"
#include "wdrc/harness.hpp"
#include "wdrc/parallel.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace wdrc;

namespace {

constexpr const char* kVersion = "0.1.0";

struct Run {
  std::string command;
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out = "wdrc_out";
  std::optional<std::uint64_t> seed;
  int threads = 0;
  bool plots = false;
  bool header = false;
  std::vector<std::string> argv;
};

void write_table(const fs::path& path, const std::vector<std::string>& header, const Eigen::MatrixXd& rows) {
  std::ofstream out(path);
  if (!out) throw ConfigurationError("cannot write " + path.string());
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n' << std::setprecision(17);
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    for (Eigen::Index c = 0; c < rows.cols(); ++c) out << (c ? "," : "") << rows(r, c);
    out << '\n';
  }
}

std::vector<std::string> numbered(const std::string& prefix, Eigen::Index n) {
  std::vector<std::string> h;
  for (Eigen::Index i = 0; i < n; ++i) h.push_back(prefix + std::to_string(i));
  return h;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw ConfigurationError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ConfigurationError("cannot write " + path.string());
  out << text;
}

/// "1,2;3,4" or a path to a row-major CSV file.
Eigen::MatrixXd parse_matrix(const std::string& key, const std::string& text) {
  if (text.size() > 4 && text.substr(text.size() - 4) == ".csv") return read_matrix_csv(text);
  std::vector<std::vector<double>> rows;
  std::stringstream rs(text);
  std::string row;
  while (std::getline(rs, row, ';')) {
    std::vector<double> r;
    for (const auto& item : split_csv_line(row)) {
      try {
        r.push_back(std::stod(item));
      } catch (const std::exception&) {
        throw ConfigurationError("config key '" + key + "': bad matrix entry '" + item + "'");
      }
    }
    if (!r.empty()) rows.push_back(std::move(r));
  }
  if (rows.empty()) throw ConfigurationError("config key '" + key + "': empty matrix");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.front().size())
      throw ConfigurationError("config key '" + key + "': ragged matrix rows");
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  return m;
}

Eigen::MatrixXd matrix_key(Config& cfg, const std::string& key, const std::string& fallback = "") {
  const std::string text = cfg.get_string(key, fallback);
  if (text.empty()) throw ConfigurationError("config key '" + key + "' is required");
  return parse_matrix(key, text);
}

InvestmentParams read_investment(Config& cfg) {
  InvestmentParams p;
  p.zeta = cfg.get_double("investment.zeta", p.zeta);
  p.discount = cfg.get_double("investment.discount", p.discount);
  p.eta = cfg.get_double("investment.eta", p.eta);
  p.x_max = cfg.get_double("investment.x_max", p.x_max);
  p.grid_nodes = cfg.get_int("investment.grid_nodes", p.grid_nodes);
  p.action_divisions = cfg.get_int("investment.action_divisions", p.action_divisions);
  p.w_lower = cfg.get_double("investment.w_lower", p.w_lower);
  p.w_upper = cfg.get_double("investment.w_upper", p.w_upper);
  return p;
}

DpOptions read_dp(Config& cfg) {
  DpOptions o;
  const std::string solver = cfg.get_string("dp.solver", "vi");
  if (solver == "vi") o.solver = SolverKind::VI;
  else if (solver == "pi") o.solver = SolverKind::PI;
  else if (solver == "mpi") o.solver = SolverKind::MPI;
  else throw ConfigurationError("config key 'dp.solver': expected vi, pi or mpi, got '" + solver + "'");
  o.delta = cfg.get_double("dp.delta", o.delta);
  o.mpi_order = cfg.get_int("dp.mpi_order", o.mpi_order);
  o.max_iter = cfg.get_int("dp.max_iter", o.max_iter);
  o.w_points = cfg.get_int("dp.w_points", o.w_points);
  o.bellman.refinement_rounds = cfg.get_int("dp.refinement_rounds", o.bellman.refinement_rounds);
  o.bellman.lambda_max = cfg.get_double("dp.lambda_max", o.bellman.lambda_max);
  o.bellman.lambda_grid_points = cfg.get_int("dp.lambda_grid_points", o.bellman.lambda_grid_points);
  return o;
}

OutOfSampleOptions read_evaluation(Config& cfg) {
  OutOfSampleOptions o;
  o.horizon = cfg.get_int("evaluation.horizon", o.horizon);
  o.rollouts = cfg.get_int("evaluation.rollouts", o.rollouts);
  o.truncation_tolerance = cfg.get_double("evaluation.truncation_tolerance", o.truncation_tolerance);
  o.grid_chain = cfg.get_bool("evaluation.grid_chain", o.grid_chain);
  o.horizon_cap = cfg.get_int("evaluation.horizon_cap", o.horizon_cap);
  return o;
}

struct TruthSpec {
  double mean = 1.08;
  double stddev = 0.1;
};

TruthSpec read_truth(Config& cfg) {
  TruthSpec t;
  t.mean = cfg.get_double("truth.mean", t.mean);
  t.stddev = cfg.get_double("truth.std", t.stddev);
  return t;
}

Sampler truth_sampler(const TruthSpec& t) {
  return gaussian_sampler(Eigen::VectorXd::Constant(1, t.mean), Eigen::VectorXd::Constant(1, t.stddev));
}

/// Samples from data.samples_file when set, else N draws from the truth.
EmpiricalDistribution read_samples(Config& cfg, std::uint64_t seed, bool header) {
  const std::string file = cfg.get_string("data.samples_file", "");
  const int N = cfg.get_int("data.N", 10);
  const TruthSpec truth = read_truth(cfg);
  if (!file.empty()) return read_samples_csv(file, header);
  return draw_samples(truth_sampler(truth), N, derive_seed(seed, {0}));
}

json report_json(const SolverReport& r) {
  return {{"iterations", r.iterations},
          {"final_residual", r.final_residual},
          {"bound_k", r.bound_k},
          {"converged", r.converged},
          {"wall_time", r.wall_time.empty() ? 0.0 : r.wall_time.back()},
          {"clamped_transitions", r.clamped}};
}

struct Context {
  Run run;
  Config cfg;
  std::uint64_t seed = 1;
  fs::path out;
};

void write_manifest(const Context& ctx, const json& extra) {
  json m;
  m["command"] = ctx.run.command;
  m["argv"] = ctx.run.argv;
  m["seed"] = ctx.seed;
  m["config_hash"] = hex64(ctx.cfg.hash());
  m["config"] = ctx.cfg.effective();
  m["threads"] = thread_count();
  m["versions"] = {{"wdrc", kVersion},
                   {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                 std::to_string(EIGEN_MINOR_VERSION)},
                   {"cli11", CLI11_VERSION},
                   {"compiler", __VERSION__},
                   {"cplusplus", __cplusplus}};
  m["outputs"] = extra;
  write_json(ctx.out / "manifest.json", m);
  write_text(ctx.out / "config_effective.txt", ctx.cfg.canonical());
}

struct SolvedInvestment {
  ControlProblem problem;
  EmpiricalDistribution samples;
  double theta;
  double order;
  DpOptions dp;
  DpSolution solution;
  State x0;
};

SolvedInvestment solve_investment(Context& ctx) {
  const std::string family = ctx.cfg.get_string("problem.family", "investment");
  if (family != "investment") throw ConfigurationError("config key 'problem.family': unknown family '" + family + "'");
  ControlProblem problem = investment_problem(read_investment(ctx.cfg));
  const DpOptions dp = read_dp(ctx.cfg);
  EmpiricalDistribution samples = read_samples(ctx.cfg, ctx.seed, ctx.run.header);
  const double theta = ctx.cfg.get_double("ambiguity.theta", 0.01);
  const double p = ctx.cfg.get_double("ambiguity.p", 1.0);
  const State x0 = State::Constant(1, ctx.cfg.get_double("problem.x0", 1.0));
  const std::string log = ctx.cfg.get_string("output.solver_log", "solver_log.csv");
  ctx.cfg.reject_unknown();
  DpSolution solution = solve_dr(problem, samples, theta, GroundMetric(p), dp);
  SolvedInvestment s{std::move(problem), std::move(samples), theta, p, dp, std::move(solution), x0};

  const auto& grid = *s.problem.grid;
  Eigen::MatrixXd vt(static_cast<Eigen::Index>(grid.size()), 2), pt(static_cast<Eigen::Index>(grid.size()), 3);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    vt(r, 0) = pt(r, 0) = grid.node(i)(0);
    vt(r, 1) = s.solution.value.at_node(i);
    pt.row(r).tail(2) = s.solution.policy.at_node(i).transpose();
  }
  write_table(ctx.out / "value.csv", {"x", "v"}, vt);
  write_table(ctx.out / "policy.csv", {"x", "u1", "u2"}, pt);
  if (!log.empty()) write_solver_log((ctx.out / log).string(), s.solution.report);
  return s;
}

int cmd_solve(Context& ctx) {
  const auto s = solve_investment(ctx);
  json summary = {{"theta", s.theta},
                  {"N", s.samples.size()},
                  {"x0", s.x0(0)},
                  {"certificate", s.solution.value.evaluate(s.x0)},
                  {"solver", report_json(s.solution.report)}};
  write_json(ctx.out / "summary.json", summary);
  write_manifest(ctx, {"value.csv", "policy.csv", "solver_log.csv", "summary.json"});
  std::cout << summary.dump() << '\n';
  return 0;
}

int cmd_evaluate(Context& ctx) {
  const OutOfSampleOptions eval = read_evaluation(ctx.cfg);
  const TruthSpec truth = read_truth(ctx.cfg);
  const auto s = solve_investment(ctx);
  const OutOfSampleResult r =
      out_of_sample_cost(s.solution.policy, s.problem, truth_sampler(truth), s.x0, eval, derive_seed(ctx.seed, {1}));
  Eigen::MatrixXd rows(r.per_rollout.size(), 2);
  for (Eigen::Index i = 0; i < rows.rows(); ++i) rows.row(i) << static_cast<double>(i), r.per_rollout(i);
  write_table(ctx.out / "evaluation.csv", {"rollout", "cost"}, rows);
  const double cert = s.solution.value.evaluate(s.x0);
  json summary = {{"theta", s.theta},
                  {"N", s.samples.size()},
                  {"certificate", cert},
                  {"mean_cost", r.mean},
                  {"standard_error", r.standard_error},
                  {"truncation_bound", r.truncation_bound},
                  {"reliable", reliable(r.mean, r.standard_error, cert, r.truncation_bound)},
                  {"solver", report_json(s.solution.report)}};
  write_json(ctx.out / "summary.json", summary);
  write_manifest(ctx, {"value.csv", "policy.csv", "evaluation.csv", "summary.json"});
  std::cout << summary.dump() << '\n';
  return 0;
}

int cmd_worst_case(Context& ctx) {
  const auto s = solve_investment(ctx);
  const DrBellman op = make_bellman(s.problem, s.samples, s.theta, GroundMetric(s.order), s.dp);
  const auto wc = op.extract_worst_case_policy(s.solution.policy, s.solution.value);
  std::vector<std::array<double, 6>> rows;
  json nodes = json::array();
  for (std::size_t i = 0; i < wc.size(); ++i) {
    const auto& d = wc[i];
    for (Eigen::Index k = 0; k < d.atoms.rows(); ++k)
      rows.push_back({static_cast<double>(i), s.problem.grid->node(i)(0), d.atoms(k, 0), d.weights(k),
                      static_cast<double>(d.source(k)), d.lambda});
    nodes.push_back({{"node", i},
                     {"atoms", d.atoms.rows()},
                     {"transport_cost", d.transport_cost},
                     {"budget_slack", d.budget_slack},
                     {"split_sample", d.split_sample}});
  }
  Eigen::MatrixXd table(static_cast<Eigen::Index>(rows.size()), 6);
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (int c = 0; c < 6; ++c) table(static_cast<Eigen::Index>(r), c) = rows[r][static_cast<std::size_t>(c)];
  write_table(ctx.out / "worst_case.csv", {"node", "x", "w", "weight", "source_sample", "lambda"}, table);
  json summary = {{"theta", s.theta}, {"nodes", nodes}, {"solver", report_json(s.solution.report)}};
  write_json(ctx.out / "summary.json", summary);
  write_manifest(ctx, {"value.csv", "policy.csv", "worst_case.csv", "summary.json"});
  std::cout << json{{"theta", s.theta}, {"atoms", rows.size()}}.dump() << '\n';
  return 0;
}

int cmd_radius(Context& ctx) {
  ConcentrationParams p;
  const int N = ctx.cfg.get_int("radius.N", 100);
  const double beta = ctx.cfg.get_double("radius.beta", 0.05);
  p.p = ctx.cfg.get_double("radius.p", p.p);
  p.l = ctx.cfg.get_int("radius.l", p.l);
  p.q = ctx.cfg.get_double("radius.q", p.q);
  p.c1 = ctx.cfg.get_double("radius.c1", p.c1);
  p.c2 = ctx.cfg.get_double("radius.c2", p.c2);
  ctx.cfg.reject_unknown();
  const double theta = radius(N, beta, p);
  const BoundValue b = concentration_bound(N, theta, p);
  json summary = {{"N", N}, {"beta", beta}, {"theta", theta}, {"bound_raw", b.raw}, {"bound", b.clipped}};
  write_json(ctx.out / "summary.json", summary);
  write_manifest(ctx, {"summary.json"});
  std::cout << std::setprecision(17) << theta << '\n';
  return 0;
}

int cmd_lq(Context& ctx) {
  LqProblem lq;
  lq.A = matrix_key(ctx.cfg, "lq.A");
  lq.B = matrix_key(ctx.cfg, "lq.B");
  lq.Xi = matrix_key(ctx.cfg, "lq.Xi");
  lq.Q = matrix_key(ctx.cfg, "lq.Q");
  lq.R = matrix_key(ctx.cfg, "lq.R");
  lq.discount = ctx.cfg.get_double("lq.discount", 0.9);
  lq.lambda = ctx.cfg.get_double("lq.lambda", 1.0);
  const std::string samples = ctx.cfg.get_string("lq.samples", "");
  const std::string samples_file = ctx.cfg.get_string("lq.samples_file", "");
  const bool augment = ctx.cfg.get_bool("lq.augment_mean", false);
  ctx.cfg.reject_unknown();
  if (!samples_file.empty()) lq.samples = read_samples_csv(samples_file, ctx.run.header);
  else if (!samples.empty()) lq.samples = EmpiricalDistribution(parse_matrix("lq.samples", samples));
  else throw ConfigurationError("config key 'lq.samples' or 'lq.samples_file' is required");

  json summary;
  Eigen::MatrixXd K, P;
  if (augment) {
    const AugmentedLq aug = augment_nonzero_mean(lq);
    const DrRiccatiSolution sol = solve_dr_riccati(aug.problem);
    K = sol.K;
    P = sol.P;
    summary["x_bar"] = std::vector<double>(aug.x_bar.data(), aug.x_bar.data() + aug.x_bar.size());
    summary["z"] = sol.z;
    summary["residual"] = sol.residual;
    summary["lambda_margin"] = sol.lambda_margin;
  } else {
    const DrRiccatiSolution sol = solve_dr_riccati(lq);
    K = sol.K;
    P = sol.P;
    summary["z"] = sol.z;
    summary["residual"] = sol.residual;
    summary["lambda_margin"] = sol.lambda_margin;
    summary["iterations"] = sol.iterations;
    const DareSolution dare = solve_dare(lq.A, lq.B, lq.Q, lq.R, lq.discount);
    write_table(ctx.out / "K_lqg.csv", numbered("x", dare.K.cols()), dare.K);
    summary["lqg_gain_gap"] = (K - dare.K).norm();
  }
  write_table(ctx.out / "P.csv", numbered("c", P.cols()), P);
  write_table(ctx.out / "K.csv", numbered("x", K.cols()), K);
  summary["lambda"] = lq.lambda;
  write_json(ctx.out / "summary.json", summary);
  write_manifest(ctx, {"P.csv", "K.csv", "summary.json"});
  std::cout << summary.dump() << '\n';
  return 0;
}

std::string reliability_plot() {
  return R"(import csv
import matplotlib.pyplot as plt

rows = list(csv.DictReader(open("reliability.csv")))
fig, (a, b) = plt.subplots(1, 2, figsize=(10, 4))
for n in sorted({int(r["N"]) for r in rows}):
    sel = [r for r in rows if int(r["N"]) == n]
    th = [float(r["theta"]) for r in sel]
    a.plot(th, [float(r["reliability"]) for r in sel], marker="o", label=f"N = {n}")
    b.plot(th, [float(r["mean_cost"]) for r in sel], marker="o", label=f"N = {n}")
a.set_xscale("symlog", linthresh=1e-3)
b.set_xscale("symlog", linthresh=1e-3)
a.set_xlabel("theta")
a.set_ylabel("reliability")
b.set_xlabel("theta")
b.set_ylabel("out-of-sample cost")
a.legend()
fig.tight_layout()
fig.savefig("reliability.png", dpi=150)
)";
}

std::string comparison_plot() {
  return R"(import csv
import matplotlib.pyplot as plt

rows = list(csv.reader(open("comparison.csv")))
head, data = rows[0][1:], [[float(v) for v in r[1:]] for r in rows[1:]]
cols = list(zip(*data))
plt.boxplot(cols, labels=head)
plt.ylabel("out-of-sample cost")
plt.xticks(rotation=45)
plt.tight_layout()
plt.savefig("comparison.png", dpi=150)
)";
}

std::string frequency_plot() {
  return R"(import csv
import matplotlib.pyplot as plt

fig, axes = plt.subplots(1, 2, figsize=(10, 4), sharey=True)
for ax, name in zip(axes, ["frequency_dr.csv", "frequency_lqg.csv"]):
    rows = list(csv.reader(open(name)))
    t = [float(r[0]) for r in rows[1:]]
    for c in range(1, len(rows[0])):
        ax.plot(t, [float(r[c]) for r in rows[1:]], lw=0.8)
    ax.set_title(name[:-4])
    ax.set_xlabel("time [s]")
axes[0].set_ylabel("frequency deviation [pu]")
fig.tight_layout()
fig.savefig("frequency.png", dpi=150)
)";
}

int cmd_invest(Context& ctx) {
  InvestmentStudyConfig c;
  c.problem = read_investment(ctx.cfg);
  c.dp = read_dp(ctx.cfg);
  c.evaluation = read_evaluation(ctx.cfg);
  c.N = ctx.cfg.get_ints("experiment.N", c.N);
  c.theta = ctx.cfg.get_doubles("experiment.theta", c.theta);
  c.trials = ctx.cfg.get_int("experiment.trials", c.trials);
  c.x0 = ctx.cfg.get_doubles("experiment.x0", c.x0);
  const TruthSpec truth = read_truth(ctx.cfg);
  c.truth_mean = truth.mean;
  c.truth_std = truth.stddev;
  c.seed = ctx.seed;
  const int draws = ctx.cfg.get_int("experiment.comparison_draws", 50);
  const int comparison_N = ctx.cfg.get_int("experiment.comparison_N", 10);
  ctx.cfg.reject_unknown();

  json outputs = json::array();
  json summary;
  if (c.trials > 0) {
    const ReliabilityReport rep = investment_reliability(c);
    Eigen::MatrixXd rows(rep.reliability.size(), 7);
    Eigen::Index r = 0;
    for (std::size_t n = 0; n < c.N.size(); ++n)
      for (std::size_t k = 0; k < c.theta.size(); ++k, ++r) {
        const auto kk = static_cast<Eigen::Index>(k), nn = static_cast<Eigen::Index>(n);
        rows.row(r) << c.theta[k], c.N[n], rep.reliability(kk, nn), rep.standard_error(kk, nn), rep.mean_cost(kk, nn),
            rep.mean_certificate(kk, nn), rep.excluded(kk, nn);
      }
    write_table(ctx.out / "reliability.csv",
                {"theta", "N", "reliability", "standard_error", "mean_cost", "mean_certificate", "excluded"}, rows);
    outputs.push_back("reliability.csv");
    if (ctx.run.plots) {
      write_text(ctx.out / "plot_reliability.py", reliability_plot());
      outputs.push_back("plot_reliability.py");
    }
    summary["trials"] = c.trials;
  }
  if (draws > 0) {
    const ComparisonTable t = dr_vs_saa_comparison(c, comparison_N, draws);
    std::vector<std::string> head{"draw"};
    for (double th : t.theta) head.push_back("theta_" + std::to_string(th));
    head.push_back("saa");
    Eigen::MatrixXd rows(t.cost.rows(), t.cost.cols() + 1);
    for (Eigen::Index d = 0; d < rows.rows(); ++d) {
      rows(d, 0) = static_cast<double>(d);
      rows.row(d).tail(t.cost.cols()) = t.cost.row(d);
    }
    write_table(ctx.out / "comparison.csv", head, rows);
    outputs.push_back("comparison.csv");
    std::vector<double> best(t.cost.col(t.best_theta).data(), t.cost.col(t.best_theta).data() + t.cost.rows());
    std::vector<double> saa(t.cost.col(t.cost.cols() - 1).data(), t.cost.col(t.cost.cols() - 1).data() + t.cost.rows());
    const double mb = median(best), ms = median(saa);
    summary["comparison"] = {{"N", comparison_N},
                             {"best_theta", t.theta[static_cast<std::size_t>(t.best_theta)]},
                             {"median_best", mb},
                             {"median_saa", ms},
                             {"relative_improvement", (ms - mb) / std::abs(ms)}};
    if (ctx.run.plots) {
      write_text(ctx.out / "plot_comparison.py", comparison_plot());
      outputs.push_back("plot_comparison.py");
    }
  }
  write_json(ctx.out / "summary.json", summary);
  outputs.push_back("summary.json");
  write_manifest(ctx, outputs);
  std::cout << summary.dump() << '\n';
  return 0;
}

int cmd_power(Context& ctx) {
  const std::string network = ctx.cfg.get_string("power.network", "ieee39");
  const double dt = ctx.cfg.get_double("power.dt", 0.1);
  const std::string buses = ctx.cfg.get_string("power.bus_file", "data/ieee39/buses.csv");
  const std::string lines = ctx.cfg.get_string("power.line_file", "data/ieee39/lines.csv");
  PowerStudyConfig c;
  c.N = ctx.cfg.get_int("power.N", c.N);
  c.lambda = ctx.cfg.get_double("power.lambda", c.lambda);
  c.discount = ctx.cfg.get_double("power.discount", c.discount);
  c.sample_std = ctx.cfg.get_double("power.sample_std", c.sample_std);
  c.initial_frequency = ctx.cfg.get_double("power.initial_frequency", c.initial_frequency);
  c.horizon = ctx.cfg.get_int("power.horizon", c.horizon);
  c.rollouts = ctx.cfg.get_int("power.rollouts", c.rollouts);
  c.threshold = ctx.cfg.get_double("power.threshold", c.threshold);
  c.seed = ctx.seed;
  ctx.cfg.reject_unknown();
  const PowerNetwork net = network == "synthetic" ? synthetic_three_generator_network(dt)
                           : network == "ieee39"  ? PowerNetwork::from_csv(buses, lines, dt)
                                                  : throw ConfigurationError("config key 'power.network': expected "
                                                                             "ieee39 or synthetic, got '" +
                                                                             network + "'");
  const PowerStudyResult r = power_frequency_study(net, c);
  const auto g = r.dr_frequency.cols();
  std::vector<std::string> head{"time"};
  for (int p : net.generator_positions()) head.push_back("bus_" + std::to_string(net.buses()[static_cast<std::size_t>(p)].id));
  const auto with_time = [&](const Eigen::MatrixXd& f) {
    Eigen::MatrixXd m(f.rows(), g + 1);
    for (Eigen::Index t = 0; t < f.rows(); ++t) {
      m(t, 0) = static_cast<double>(t) * dt;
      m.row(t).tail(g) = f.row(t);
    }
    return m;
  };
  write_table(ctx.out / "frequency_dr.csv", head, with_time(r.dr_frequency));
  write_table(ctx.out / "frequency_lqg.csv", head, with_time(r.lqg_frequency));
  Eigen::MatrixXd metrics(g, 3);
  for (Eigen::Index b = 0; b < g; ++b)
    metrics.row(b) << net.buses()[static_cast<std::size_t>(net.generator_positions()[static_cast<std::size_t>(b)])].id,
        r.dr_metrics.per_bus(b), r.lqg_metrics.per_bus(b);
  write_table(ctx.out / "metrics.csv", {"bus", "dr_time", "lqg_time"}, metrics);
  json summary = {{"network", network},
                  {"lambda", c.lambda},
                  {"dr_mean_time", r.dr_metrics.mean},
                  {"lqg_mean_time", r.lqg_metrics.mean},
                  {"dr_settled", r.dr_metrics.settled},
                  {"lqg_settled", r.lqg_metrics.settled},
                  {"riccati_residual", r.dr.residual},
                  {"lambda_margin", r.dr.lambda_margin}};
  json outputs = {"frequency_dr.csv", "frequency_lqg.csv", "metrics.csv", "summary.json"};
  if (ctx.run.plots) {
    write_text(ctx.out / "plot_frequency.py", frequency_plot());
    outputs.push_back("plot_frequency.py");
  }
  write_json(ctx.out / "summary.json", summary);
  write_manifest(ctx, outputs);
  std::cout << summary.dump() << '\n';
  return 0;
}

void print_error(const std::string& kind, int code, const std::string& message) {
  std::cerr << json{{"error", kind}, {"exit_code", code}, {"message", message}}.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  Run run;
  for (int i = 0; i < argc; ++i) run.argv.emplace_back(argv[i]);
  CLI::App app{"Wasserstein distributionally robust stochastic control"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--config", run.config_path, "key-value configuration file")->check(CLI::ExistingFile);
  app.add_option("--set", run.overrides, "override, section.key=value (repeatable)");
  app.add_option("--out", run.out, "output directory");
  app.add_option("--seed", run.seed, "master seed (default: config seed or 1)");
  app.add_option("--threads", run.threads, "worker threads, 0 = logical cores")->check(CLI::NonNegativeNumber);
  app.add_flag("--plots", run.plots, "emit plot scripts");
  app.add_flag("--header", run.header, "sample CSV files carry a header row");

  // flags that map onto config keys
  std::vector<std::pair<std::string, std::string>> flagged;
  const auto keyed = [&](CLI::App* sub, const std::string& flag, const std::string& key, const std::string& help) {
    sub->add_option_function<std::string>(
        flag, [&flagged, key](const std::string& v) { flagged.emplace_back(key, v); }, help);
  };

  auto* solve = app.add_subcommand("solve", "solve the DR control problem on its grid");
  auto* evaluate = app.add_subcommand("evaluate", "solve, then estimate the out-of-sample cost");
  auto* worst = app.add_subcommand("worst-case", "solve, then extract the worst-case distribution policy");
  for (auto* sub : {solve, evaluate, worst}) {
    keyed(sub, "--theta", "ambiguity.theta", "Wasserstein radius");
    keyed(sub, "--N", "data.N", "sample count drawn from the truth");
    keyed(sub, "--samples", "data.samples_file", "sample CSV file");
    keyed(sub, "--solver", "dp.solver", "vi, pi or mpi");
  }
  auto* rad = app.add_subcommand("radius", "radius from the concentration inequality");
  for (const char* k : {"N", "beta", "p", "l", "q", "c1", "c2"})
    keyed(rad, std::string("--") + k, std::string("radius.") + k, k);
  auto* lq = app.add_subcommand("lq", "DR Riccati solution of an LQ problem");
  keyed(lq, "--lambda", "lq.lambda", "penalty parameter");
  auto* experiment = app.add_subcommand("experiment", "experiment pipelines");
  experiment->require_subcommand(1);
  experiment->fallthrough();
  auto* invest = experiment->add_subcommand("invest", "reliability and DR vs SAA on the investment problem");
  keyed(invest, "--N", "experiment.N", "comma-separated sample sizes");
  keyed(invest, "--theta-sweep", "experiment.theta", "comma-separated radii");
  keyed(invest, "--trials", "experiment.trials", "trials per (theta, N)");
  keyed(invest, "--draws", "experiment.comparison_draws", "training draws for the comparison");
  keyed(invest, "--rollouts", "evaluation.rollouts", "rollouts per evaluation");
  keyed(invest, "--horizon", "evaluation.horizon", "rollout horizon");
  auto* power = experiment->add_subcommand("power", "frequency control of a swing-equation network");
  keyed(power, "--network", "power.network", "ieee39 or synthetic");
  keyed(power, "--N", "power.N", "sample count");
  keyed(power, "--lambda", "power.lambda", "penalty parameter");
  keyed(power, "--rollouts", "power.rollouts", "rollouts");
  keyed(power, "--horizon", "power.horizon", "steps");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("configuration", 2, e.what());
    return 2;
  }

  try {
    set_thread_count(run.threads);
    Context ctx;
    ctx.cfg = run.config_path.empty() ? Config() : Config::load(run.config_path);
    for (const auto& o : run.overrides) ctx.cfg.apply_override(o);
    for (const auto& [k, v] : flagged) ctx.cfg.set(k, v);
    ctx.seed = run.seed ? *run.seed : ctx.cfg.get_uint("run.seed", 1);
    ctx.cfg.set("run.seed", std::to_string(ctx.seed));
    ctx.cfg.get_uint("run.seed", 1);
    ctx.out = run.out;
    fs::create_directories(ctx.out);
    {
      std::ofstream probe(ctx.out / ".write_probe");
      if (!probe) throw ConfigurationError("output directory " + ctx.out.string() + " is not writable");
    }
    fs::remove(ctx.out / ".write_probe");

    int code = 0;
    if (solve->parsed()) run.command = "solve", ctx.run = run, code = cmd_solve(ctx);
    else if (evaluate->parsed()) run.command = "evaluate", ctx.run = run, code = cmd_evaluate(ctx);
    else if (worst->parsed()) run.command = "worst-case", ctx.run = run, code = cmd_worst_case(ctx);
    else if (rad->parsed()) run.command = "radius", ctx.run = run, code = cmd_radius(ctx);
    else if (lq->parsed()) run.command = "lq", ctx.run = run, code = cmd_lq(ctx);
    else if (invest->parsed()) run.command = "experiment invest", ctx.run = run, code = cmd_invest(ctx);
    else if (power->parsed()) run.command = "experiment power", ctx.run = run, code = cmd_power(ctx);
    return code;
  } catch (const Error& e) {
    print_error(std::string(to_string(e.kind())), e.exit_code(), e.what());
    return e.exit_code();
  } catch (const fs::filesystem_error& e) {
    print_error("configuration", 2, e.what());
    return 2;
  } catch (const std::exception& e) {
    print_error("numerical", 3, e.what());
    return 3;
  }
}

#include "wdrc/power.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

#include "wdrc/csv.hpp"
#include "wdrc/error.hpp"

namespace wdrc {

PowerNetwork::PowerNetwork(std::vector<Bus> buses, std::vector<Line> lines, double dt)
    : buses_(std::move(buses)), lines_(std::move(lines)), dt_(dt) {
  if (buses_.empty()) throw InvalidInputError("network: no buses");
  if (!(dt_ > 0.0)) throw InvalidInputError("network: sampling time must be > 0");
  std::map<int, int> seen;
  for (std::size_t i = 0; i < buses_.size(); ++i) {
    const auto& b = buses_[i];
    if (!seen.emplace(b.id, static_cast<int>(i)).second)
      throw InvalidInputError("network: duplicate bus id " + std::to_string(b.id));
    if (b.generator && !(b.inertia > 0.0 && b.damping > 0.0))
      throw InvalidInputError("network: generator bus " + std::to_string(b.id) + " needs M > 0 and D > 0");
  }
  for (const auto& l : lines_) {
    if (!seen.count(l.from) || !seen.count(l.to))
      throw InvalidInputError("network: line references unknown bus " + std::to_string(l.from) + "-" +
                              std::to_string(l.to));
    if (l.from == l.to) throw InvalidInputError("network: self loop at bus " + std::to_string(l.from));
  }
  if (generator_positions().empty()) throw InvalidInputError("network: no generator buses");
}

PowerNetwork PowerNetwork::from_csv(const std::filesystem::path& buses, const std::filesystem::path& lines,
                                    double dt) {
  std::vector<Bus> bs;
  {
    std::ifstream in(buses);
    if (!in) throw ConfigurationError("cannot open bus file " + buses.string());
    std::string line;
    bool header = true;
    int row = 0;
    while (std::getline(in, line)) {
      ++row;
      if (line.empty() || line[0] == '#') continue;
      if (header) {
        header = false;
        continue;
      }
      const auto f = split_csv_line(line);
      if (f.size() != 4) throw ConfigurationError("bus file row " + std::to_string(row) + ": expected id,type,M,D");
      Bus b;
      try {
        b.id = std::stoi(f[0]);
        b.generator = f[1] == "gen";
        if (!b.generator && f[1] != "load")
          throw ConfigurationError("bus file row " + std::to_string(row) + ": type must be gen or load");
        b.inertia = std::stod(f[2]);
        b.damping = std::stod(f[3]);
      } catch (const std::logic_error&) {
        throw ConfigurationError("bus file row " + std::to_string(row) + ": malformed number");
      }
      bs.push_back(b);
    }
  }
  std::vector<Line> ls;
  const NumericTable t = read_numeric_csv(lines, true);
  for (const auto& r : t.rows) {
    if (r.size() != 4) throw ConfigurationError("line file: expected from,to,susceptance,conductance");
    ls.push_back({static_cast<int>(r[0]), static_cast<int>(r[1]), r[2], r[3]});
  }
  return PowerNetwork(std::move(bs), std::move(ls), dt);
}

Eigen::MatrixXcd PowerNetwork::admittance() const {
  std::map<int, Eigen::Index> pos;
  for (std::size_t i = 0; i < buses_.size(); ++i) pos[buses_[i].id] = static_cast<Eigen::Index>(i);
  const auto n = static_cast<Eigen::Index>(buses_.size());
  Eigen::MatrixXcd Y = Eigen::MatrixXcd::Zero(n, n);
  for (const auto& l : lines_) {
    const std::complex<double> y(l.conductance, -l.susceptance);
    const auto i = pos[l.from], j = pos[l.to];
    Y(i, i) += y;
    Y(j, j) += y;
    Y(i, j) -= y;
    Y(j, i) -= y;
  }
  return Y;
}

std::vector<int> PowerNetwork::generator_positions() const {
  std::vector<int> out;
  for (std::size_t i = 0; i < buses_.size(); ++i)
    if (buses_[i].generator) out.push_back(static_cast<int>(i));
  return out;
}

Eigen::VectorXd PowerNetwork::inertia() const {
  const auto g = generator_positions();
  Eigen::VectorXd m(static_cast<Eigen::Index>(g.size()));
  for (std::size_t k = 0; k < g.size(); ++k) m(static_cast<Eigen::Index>(k)) = buses_[static_cast<std::size_t>(g[k])].inertia;
  return m;
}

Eigen::VectorXd PowerNetwork::damping() const {
  const auto g = generator_positions();
  Eigen::VectorXd d(static_cast<Eigen::Index>(g.size()));
  for (std::size_t k = 0; k < g.size(); ++k) d(static_cast<Eigen::Index>(k)) = buses_[static_cast<std::size_t>(g[k])].damping;
  return d;
}

Eigen::MatrixXd PowerNetwork::reduced_laplacian() const {
  const Eigen::MatrixXcd Y = admittance();
  if ((Y - Y.transpose()).cwiseAbs().maxCoeff() > 1e-12) log_warning("network: admittance matrix is not symmetric");
  const Eigen::MatrixXcd Yk = kron_reduce(Y, generator_positions());
  return laplacian_from_susceptance(Yk.imag());
}

Eigen::MatrixXcd kron_reduce(const Eigen::MatrixXcd& Y, const std::vector<int>& keep,
                             const std::vector<int>& elimination_order) {
  const auto n = Y.rows();
  if (Y.cols() != n) throw InvalidInputError("kron_reduce: Y must be square");
  std::vector<bool> kept(static_cast<std::size_t>(n), false);
  for (int k : keep) {
    if (k < 0 || k >= n) throw InvalidInputError("kron_reduce: keep index out of range");
    kept[static_cast<std::size_t>(k)] = true;
  }
  std::vector<int> order = elimination_order;
  if (order.empty())
    for (int k = 0; k < n; ++k)
      if (!kept[static_cast<std::size_t>(k)]) order.push_back(k);
  {
    std::vector<int> expect, got = order;
    for (int k = 0; k < n; ++k)
      if (!kept[static_cast<std::size_t>(k)]) expect.push_back(k);
    std::sort(got.begin(), got.end());
    if (got != expect) throw InvalidInputError("kron_reduce: elimination order must list every non-kept bus once");
  }
  Eigen::MatrixXcd W = Y;
  std::vector<bool> alive(static_cast<std::size_t>(n), true);
  for (int k : order) {
    const std::complex<double> pivot = W(k, k);
    if (std::abs(pivot) <= 1e-12) {
      std::ostringstream msg;
      msg << "kron_reduce: zero pivot while eliminating bus index " << k;
      throw NumericalError(msg.str());
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!alive[static_cast<std::size_t>(i)] || i == k) continue;
      const std::complex<double> f = W(i, k) / pivot;
      if (f == std::complex<double>(0.0)) continue;
      for (Eigen::Index j = 0; j < n; ++j)
        if (alive[static_cast<std::size_t>(j)] && j != k) W(i, j) -= f * W(k, j);
    }
    alive[static_cast<std::size_t>(k)] = false;
  }
  std::vector<int> ks;
  for (int k = 0; k < n; ++k)
    if (kept[static_cast<std::size_t>(k)]) ks.push_back(k);
  Eigen::MatrixXcd out(static_cast<Eigen::Index>(ks.size()), static_cast<Eigen::Index>(ks.size()));
  for (std::size_t a = 0; a < ks.size(); ++a)
    for (std::size_t b = 0; b < ks.size(); ++b)
      out(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = W(ks[a], ks[b]);
  return out;
}

Eigen::MatrixXd laplacian_from_susceptance(const Eigen::MatrixXd& B) {
  const auto n = B.rows();
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j) {
        L(i, j) = -B(i, j);
        L(i, i) += B(i, j);
      }
  return L;
}

void zero_order_hold(const Eigen::MatrixXd& Ac, const Eigen::MatrixXd& Bc, double dt, Eigen::MatrixXd& A,
                     Eigen::MatrixXd& B) {
  const auto n = Ac.rows(), m = Bc.cols();
  Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(n + m, n + m);
  aug.topLeftCorner(n, n) = Ac * dt;
  aug.topRightCorner(n, m) = Bc * dt;
  const Eigen::MatrixXd E = aug.exp();
  if (!E.allFinite()) throw NumericalError("zero_order_hold: matrix exponential is not finite");
  A = E.topLeftCorner(n, n);
  B = E.topRightCorner(n, m);
}

SwingModel build_swing_state_space(const Eigen::MatrixXd& L, const Eigen::VectorXd& inertia,
                                   const Eigen::VectorXd& damping, double dt) {
  const auto n = L.rows();
  if (L.cols() != n || inertia.size() != n || damping.size() != n)
    throw InvalidInputError("swing model: dimension mismatch");
  if ((inertia.array() <= 0.0).any()) throw InvalidInputError("swing model: inertia must be > 0");
  if ((damping.array() < 0.0).any()) throw InvalidInputError("swing model: damping must be >= 0");
  if (!(dt > 0.0)) throw InvalidInputError("swing model: sampling time must be > 0");
  const Eigen::VectorXd minv = inertia.cwiseInverse();
  SwingModel s;
  s.Ac = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  s.Ac.topRightCorner(n, n) = Eigen::MatrixXd::Identity(n, n);
  s.Ac.bottomLeftCorner(n, n) = -(minv.asDiagonal() * L);
  s.Ac.bottomRightCorner(n, n) = -(minv.cwiseProduct(damping)).asDiagonal().toDenseMatrix();
  s.Bc = Eigen::MatrixXd::Zero(2 * n, n);
  s.Bc.bottomRows(n) = minv.asDiagonal().toDenseMatrix();
  zero_order_hold(s.Ac, s.Bc, dt, s.A, s.B);
  return s;
}

Eigen::MatrixXd swing_state_cost(const Eigen::VectorXd& inertia) {
  const auto n = inertia.size();
  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  Q.topLeftCorner(n, n) = Eigen::MatrixXd::Identity(n, n) - Eigen::MatrixXd::Constant(n, n, 1.0 / n);
  Q.bottomRightCorner(n, n) = 0.5 * inertia.asDiagonal().toDenseMatrix();
  return Q;
}

double time_to_threshold(const Eigen::VectorXd& trace, double dt, double level) {
  Eigen::Index last = -1;
  for (Eigen::Index k = 0; k < trace.size(); ++k)
    if (!(std::abs(trace(k)) < level)) last = k;
  if (last < 0) return 0.0;
  if (last == trace.size() - 1) return std::numeric_limits<double>::infinity();
  return static_cast<double>(last + 1) * dt;
}

FrequencyMetrics frequency_metrics(const Eigen::MatrixXd& deviation, double dt, double fraction,
                                   double reference) {
  if (!(dt > 0.0) || !(fraction > 0.0)) throw InvalidInputError("frequency_metrics: dt and fraction must be > 0");
  const double level = fraction * std::abs(reference);
  FrequencyMetrics m;
  m.per_bus.resize(deviation.cols());
  for (Eigen::Index i = 0; i < deviation.cols(); ++i) {
    m.per_bus(i) = time_to_threshold(deviation.col(i), dt, level);
    if (!std::isfinite(m.per_bus(i))) m.settled = false;
  }
  const Eigen::VectorXd mean = deviation.cwiseAbs().rowwise().mean();
  m.mean = time_to_threshold(mean, dt, level);
  if (!std::isfinite(m.mean)) m.settled = false;
  return m;
}

}  // namespace wdrc

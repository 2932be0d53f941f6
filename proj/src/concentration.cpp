#include "wdrc/concentration.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "wdrc/error.hpp"

namespace wdrc {

namespace {

enum class Regime { Above, Critical, Below };

Regime regime(const ConcentrationParams& params) {
  const double half = 0.5 * params.l;
  if (std::abs(params.p - half) <= 1e-12 * std::max(1.0, half)) return Regime::Critical;
  return params.p > half ? Regime::Above : Regime::Below;
}

double critical_lhs(double theta) { return theta / std::log(2.0 + 1.0 / theta); }

}  // namespace

void ConcentrationParams::validate() const {
  if (l < 1) throw InvalidInputError("concentration: l must be >= 1");
  if (!(p >= 1.0)) throw InvalidInputError("concentration: p must be >= 1");
  if (!(q > p)) throw InvalidInputError("concentration: q must exceed p");
  if (!(c1 > 0.0) || !(c2 > 0.0)) throw InvalidInputError("concentration: c1 and c2 must be positive");
}

BoundValue concentration_bound(int N, double theta, const ConcentrationParams& params) {
  params.validate();
  if (N < 1) throw InvalidInputError("concentration_bound: N must be >= 1");
  if (!(theta > 0.0)) throw InvalidInputError("concentration_bound: theta must be > 0");
  double b;
  if (theta > 1.0) {
    b = std::exp(-params.c2 * N * std::pow(theta, params.q / params.p));
  } else {
    switch (regime(params)) {
      case Regime::Above:
        b = std::exp(-params.c2 * N * theta * theta);
        break;
      case Regime::Critical: {
        const double t = critical_lhs(theta);
        b = std::exp(-params.c2 * N * t * t);
        break;
      }
      default:
        b = std::exp(-params.c2 * N * std::pow(theta, params.l / params.p));
    }
  }
  BoundValue out;
  out.raw = params.c1 * b;
  out.clipped = std::clamp(out.raw, 0.0, 1.0);
  return out;
}

double solve_critical_radius(double s) {
  if (!(s > 0.0)) throw InvalidInputError("solve_critical_radius: target must be > 0");
  double lo = 0.0, hi = 1.0;
  if (critical_lhs(hi) < s) throw UnsupportedError("solve_critical_radius: target exceeds 1/log 3");
  for (int it = 0; it < 400 && hi - lo > 1e-13 * hi; ++it) {
    const double mid = lo > 0.0 ? std::sqrt(lo * hi) : 0.5 * hi;
    if (critical_lhs(mid) < s)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double radius(int N, double confidence_beta, const ConcentrationParams& params) {
  params.validate();
  if (N < 1) throw InvalidInputError("radius: N must be >= 1");
  if (!(confidence_beta > 0.0 && confidence_beta < 1.0)) throw InvalidInputError("radius: beta must lie in (0,1)");
  constexpr double floor_theta = 1e-12;
  const double L = std::log(params.c1 / confidence_beta);
  if (L <= 0.0) return floor_theta;
  const double r = L / (N * params.c2);
  double theta;
  if (N < L / params.c2) {
    theta = std::pow(r, params.p / params.q);
  } else {
    switch (regime(params)) {
      case Regime::Above:
        theta = std::sqrt(r);
        break;
      case Regime::Below:
        theta = std::pow(r, params.p / params.l);
        break;
      default: {
        const double log3 = std::log(3.0);
        const double threshold = log3 * log3 / params.c2 * L;
        if (N < threshold) {
          std::ostringstream msg;
          msg << "radius: p = l/2 requires N >= (log 3)^2/c2*log(c1/beta) = " << threshold << ", got N = " << N;
          throw UnsupportedError(msg.str());
        }
        theta = solve_critical_radius(std::sqrt(r));
      }
    }
  }
  return std::max(theta, floor_theta);
}

bool radius_round_trip(int N, double confidence_beta, const ConcentrationParams& params) {
  const double theta = radius(N, confidence_beta, params);
  return concentration_bound(N, theta, params).raw <= confidence_beta * (1.0 + 1e-9);
}

}  // namespace wdrc

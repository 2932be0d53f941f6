#pragma once

namespace wdrc {

/// Light-tail constants of the true disturbance distribution.
struct ConcentrationParams {
  int l = 1;        ///< disturbance dimension
  double p = 1.0;   ///< Wasserstein order
  double q = 2.0;   ///< tail exponent, q > p
  double c1 = 2.0;  ///< demo default, not a derived constant
  double c2 = 1.0;  ///< demo default, not a derived constant

  void validate() const;
};

struct BoundValue {
  double raw = 0.0;
  /// raw clipped to [0, 1]
  double clipped = 0.0;
};

/// c1 [b1(N, theta) 1{theta <= 1} + b2(N, theta) 1{theta > 1}].
BoundValue concentration_bound(int N, double theta, const ConcentrationParams& params);

/// Radius at which the bound equals confidence_beta (four-case formula).
/// Throws UnsupportedError in the p = l/2 gap below the (log 3)^2 threshold.
double radius(int N, double confidence_beta, const ConcentrationParams& params);

/// true iff concentration_bound(N, radius(N, beta)) <= beta (1 + 1e-9).
bool radius_round_trip(int N, double confidence_beta, const ConcentrationParams& params);

/// Root of theta / log(2 + 1/theta) = s for s in (0, 1/log 3].
double solve_critical_radius(double s);

}  // namespace wdrc

#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "wdrc/concentration.hpp"
#include "wdrc/error.hpp"

using namespace wdrc;

namespace {

ConcentrationParams params(int l, double p, double q, double c1, double c2) {
  ConcentrationParams c;
  c.l = l;
  c.p = p;
  c.q = q;
  c.c1 = c1;
  c.c2 = c2;
  return c;
}

}  // namespace

TEST_SUITE("concentration") {

TEST_CASE("bound formula") {
  const auto c = params(1, 1.0, 2.0, 1.0, 1.0);
  CHECK(concentration_bound(1, 1.0 + 1e-9, c).raw == doctest::Approx(std::exp(-1.0)).epsilon(1e-8));
  double prev = 2.0;
  for (int N : {1, 10, 100, 1000}) {
    const double b = concentration_bound(N, 0.3, c).raw;
    CHECK(b < prev);
    prev = b;
  }
  // p = l/2, frozen extended-precision value
  CHECK(concentration_bound(50, 0.3, params(2, 1.0, 2.0, 1.5, 0.7)).raw ==
        doctest::Approx(0.48740844048179925517).epsilon(1e-13));
  const auto big = concentration_bound(1, 0.01, params(1, 1.0, 2.0, 5.0, 1.0));
  CHECK(big.raw > 1.0);
  CHECK(big.clipped == 1.0);
  CHECK_THROWS_AS(concentration_bound(10, 0.0, c), InvalidInputError);
  CHECK_THROWS_AS(concentration_bound(10, 0.1, params(1, 2.0, 2.0, 1, 1)), InvalidInputError);
}

TEST_CASE("radius branches") {
  CHECK(radius(2, std::exp(-1.0), params(1, 1.0, 2.0, 1.0, 1.0)) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-14));
  for (double p : {1.0, 1.5})
    CHECK(radius(1, std::exp(-2.0), params(1, p, 3.0, 1.0, 1.0)) == doctest::Approx(std::pow(2.0, p / 3.0)).epsilon(1e-14));
  // p < l/2
  CHECK(radius(100, 0.05, params(4, 1.0, 2.0, 2.0, 1.0)) ==
        doctest::Approx(std::pow(std::log(40.0) / 100.0, 0.25)).epsilon(1e-14));
  CHECK(radius(1, 0.5, params(1, 1.0, 2.0, 0.4, 1.0)) == 1e-12);
  CHECK_THROWS_AS(radius(10, 1.0, params(1, 1.0, 2.0, 2.0, 1.0)), InvalidInputError);
  CHECK_THROWS_AS(radius(10, 0.0, params(1, 1.0, 2.0, 2.0, 1.0)), InvalidInputError);
}

TEST_CASE("critical regime") {
  const double root = solve_critical_radius(0.1);
  CHECK(root == doctest::Approx(0.19602796807806996887).epsilon(1e-11));
  CHECK(std::abs(root / std::log(2.0 + 1.0 / root) - 0.1) <= 1e-10);
  const auto c = params(2, 1.0, 2.0, 2.0, 1.0);
  const double L = std::log(2.0 / 0.05);
  // between L/c2 and (log 3)^2 L / c2 the formula does not apply
  const int gap_N = static_cast<int>(std::floor(L * 1.1));
  REQUIRE(gap_N > L);
  REQUIRE(gap_N < std::pow(std::log(3.0), 2) * L);
  try {
    radius(gap_N, 0.05, c);
    FAIL("expected an unsupported-regime error");
  } catch (const UnsupportedError& e) {
    CHECK(std::string(e.what()).find("(log 3)^2/c2*log(c1/beta)") != std::string::npos);
  }
  const double th = radius(100, 0.05, c);
  CHECK(std::abs(th / std::log(2.0 + 1.0 / th) - std::sqrt(L / 100.0)) <= 1e-10);
}

TEST_CASE("round trips and monotonicity") {
  const std::vector<ConcentrationParams> cases{params(1, 1.0, 2.0, 2.0, 1.0), params(2, 1.0, 2.0, 2.0, 1.0),
                                               params(4, 1.0, 2.0, 2.0, 1.0), params(1, 1.0, 3.0, 1.0, 1.0)};
  for (const auto& c : cases)
    for (int N : {1, 2, 5, 20, 100, 1000})
      for (double beta : {0.01, 0.05, 0.3, 0.5}) {
        bool ok = true;
        try {
          ok = radius_round_trip(N, beta, c);
        } catch (const UnsupportedError&) {
          continue;
        }
        CHECK(ok);
      }
  CHECK(radius_round_trip(1, 0.5, params(1, 1.0, 2.0, 0.4, 1.0)));
  const auto c = params(1, 1.0, 2.0, 2.0, 1.0);
  double prev = 1e300;
  for (int N = 1; N <= 200; ++N) {
    const double th = radius(N, 0.05, c);
    CHECK(th <= prev + 1e-12);
    prev = th;
  }
  CHECK(radius(50, 0.01, c) >= radius(50, 0.1, c));
}

}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "core/bessel.hpp"

using mduet::bessel_j;

namespace {

// Independent oracle: straight power series in long double, 40 terms.
long double series_oracle(int n, long double x) {
  const long double half = 0.5L * x;
  long double term = 1.0L;
  for (int i = 1; i <= n; ++i) term *= half / i;
  long double sum = term;
  const long double q = half * half;
  for (int k = 1; k <= 40; ++k) {
    term *= -q / (static_cast<long double>(k) * (n + k));
    sum += term;
  }
  return sum;
}

}  // namespace

TEST_CASE("special values") {
  CHECK(bessel_j(0, 0.0) == 1.0);
  CHECK(bessel_j(1, 0.0) == 0.0);
  CHECK(bessel_j(5, 0.0) == 0.0);
  // J_0(1), J_1(1) from the series oracle
  CHECK(bessel_j(0, 1.0) == doctest::Approx(0.7651976865579666).epsilon(1e-12));
  CHECK(bessel_j(1, 1.0) == doctest::Approx(0.4400505857449335).epsilon(1e-12));
}

TEST_CASE("matches the power-series oracle to 1e-10 on [0, 5]") {
  for (int n = 0; n <= 8; ++n)
    for (double x = 0.0; x <= 5.0; x += 0.0625) {
      const double expected = double(series_oracle(n, x));
      CHECK(std::abs(bessel_j(n, x) - expected) < 1e-10);
    }
}

TEST_CASE("negative order and argument reflections") {
  for (double x : {0.3, 1.7, 4.2}) {
    CHECK(bessel_j(-1, x) == doctest::Approx(-bessel_j(1, x)));
    CHECK(std::abs(bessel_j(-1, x)) == doctest::Approx(std::abs(bessel_j(1, x))));
    CHECK(bessel_j(-2, x) == doctest::Approx(bessel_j(2, x)));
    CHECK(bessel_j(1, -x) == doctest::Approx(-bessel_j(1, x)));
  }
}

TEST_CASE("three-term recurrence holds to 1e-8") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> xs(0.1, 5.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double x = xs(rng);
    for (int n = 1; n <= 6; ++n) {
      const double lhs = bessel_j(n - 1, x) + bessel_j(n + 1, x);
      const double rhs = (2.0 * n / x) * bessel_j(n, x);
      CHECK(std::abs(lhs - rhs) < 1e-8);
    }
  }
}

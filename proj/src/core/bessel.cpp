#include "bessel.hpp"

#include <cmath>
#include <vector>

namespace mduet {

namespace {

double series_jn(int n, double x) {
  const double half = 0.5 * x;
  double term = 1.0;
  for (int i = 1; i <= n; ++i) term *= half / i;  // (x/2)^n / n!
  double sum = term;
  const double q = half * half;
  for (int k = 1; k <= 80; ++k) {
    term *= -q / (double(k) * double(n + k));
    sum += term;
    if (std::abs(term) <= 1e-18 * std::abs(sum) + 1e-300) break;
  }
  return sum;
}

double miller_jn(int n, double x) {
  int start = n + 20 + int(std::ceil(1.5 * x));
  if (start % 2) ++start;
  double jp = 0.0;          // J_{k+1}
  double jc = 1e-30;        // J_k, arbitrary seed
  double result = 0.0;
  double norm = 0.0;        // J_0 + 2 sum_{k even > 0} J_k
  for (int k = start; k >= 1; --k) {
    const double jm = (2.0 * k / x) * jc - jp;
    jp = jc;
    jc = jm;
    if (k - 1 == n) result = jc;
    if ((k - 1) % 2 == 0) norm += (k - 1 == 0) ? jc : 2.0 * jc;
    if (std::abs(jc) > 1e250) {  // rescale to avoid overflow
      jc *= 1e-250;
      jp *= 1e-250;
      result *= 1e-250;
      norm *= 1e-250;
    }
  }
  return result / norm;
}

}  // namespace

double bessel_j(int n, double x) {
  if (n < 0) {
    const double j = bessel_j(-n, x);
    return ((-n) % 2) ? -j : j;
  }
  if (x < 0.0) {
    const double j = bessel_j(n, -x);
    return (n % 2) ? -j : j;
  }
  if (x == 0.0) return n == 0 ? 1.0 : 0.0;
  if (x <= 2.0) return series_jn(n, x);
  return miller_jn(n, x);
}

}  // namespace mduet

#pragma once

namespace mduet {

// Bessel function of the first kind, J_n(x). Ascending power series for
// |x| <= 2, Miller downward recurrence above. Absolute accuracy is better
// than 1e-12 for x in [0, 5].
double bessel_j(int n, double x);

}  // namespace mduet

#include "physics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "bessel.hpp"

namespace mduet {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

double wrap_to_2pi(double angle) {
  double a = std::fmod(angle, two_pi);
  if (a < 0.0) a += two_pi;
  if (a >= two_pi) a = 0.0;  // fmod rounding at the boundary
  return a;
}

// Mixing half-angle of the symmetric 2x2 system [[wb, c], [c, ws]]:
// excited = (cos x, sin x), ground = (-sin x, cos x).
double mixing_angle(double omega_b, double omega_s, double coupling) {
  return 0.5 * std::atan2(coupling, 0.5 * (omega_b - omega_s));
}

}  // namespace

void SystemParams::validate() const {
  require(std::isfinite(omega_bar_b), "omega_bar_b: must be finite");
  require(std::isfinite(omega_bar_s), "omega_bar_s: must be finite");
  require(coupling >= 0.0 && std::isfinite(coupling),
          "coupling: must be >= 0 and finite");
  require(k_selftrap >= 0.0 && std::isfinite(k_selftrap),
          "k_selftrap: must be >= 0 and finite");
  require(p_exponent > 0.0 && p_exponent < 1.0,
          "p_exponent: must be in (0, 1)");
  require(std::isfinite(surface_coeff_b), "surface_coeff_b: must be finite");
  require(std::isfinite(surface_coeff_s), "surface_coeff_s: must be finite");
  require(tau_b > 0.0, "tau_b: must be positive (or infinite)");
  require(tau_s > 0.0, "tau_s: must be positive (or infinite)");
  require(fill_b >= 0.0 && std::isfinite(fill_b), "fill_b: must be >= 0");
  require(fill_s >= 0.0 && std::isfinite(fill_s), "fill_s: must be >= 0");
  require(std::isfinite(omega_larmor), "omega_larmor: must be finite");
  require(std::isfinite(coupling_nb_slope),
          "coupling_nb_slope: must be finite");
}

double bulk_frequency(const SystemParams& params, double n_b) {
  if (!(n_b >= 0.0))
    throw std::domain_error("bulk_frequency: population must be >= 0");
  if (params.k_selftrap == 0.0) return params.omega_bar_b;
  return params.omega_bar_b *
         (1.0 - params.k_selftrap * std::pow(n_b, params.p_exponent));
}

double surface_frequency(const SystemParams& params, double n_b, double n_s) {
  if (!(n_b >= 0.0) || !(n_s >= 0.0))
    throw std::domain_error("surface_frequency: populations must be >= 0");
  double shift = 0.0;
  if (params.surface_coeff_b != 0.0)
    shift += params.surface_coeff_b * std::pow(n_b, params.p_exponent);
  if (params.surface_coeff_s != 0.0)
    shift += params.surface_coeff_s * std::pow(n_s, params.p_exponent);
  return params.omega_bar_s * (1.0 - shift);
}

DressedPair dressed_frequencies(double omega_b, double omega_s,
                                double coupling) {
  if (!(coupling >= 0.0))
    throw std::invalid_argument("dressed_frequencies: coupling must be >= 0");
  const double mean = 0.5 * (omega_b + omega_s);
  const double radius = std::hypot(0.5 * (omega_b - omega_s), coupling);
  return {mean - radius, mean + radius};
}

double rabi_frequency(double omega_b, double omega_s, double coupling) {
  if (!(coupling >= 0.0))
    throw std::invalid_argument("rabi_frequency: coupling must be >= 0");
  return std::hypot(omega_b - omega_s, 2.0 * coupling);
}

double josephson_amplitude(double coupling, double n_b, double n_s,
                           double omega_b, double omega_s) {
  if (!(coupling >= 0.0))
    throw std::invalid_argument("josephson_amplitude: coupling must be >= 0");
  if (!(n_b >= 0.0) || !(n_s >= 0.0))
    throw std::domain_error("josephson_amplitude: populations must be >= 0");
  if (omega_b == omega_s)
    throw std::domain_error(
        "josephson_amplitude: degenerate levels (Rabi regime); the "
        "oscillation amplitude is not defined by this relation");
  return coupling * std::sqrt(n_b * n_s) / std::abs(omega_b - omega_s);
}

double fm_sideband_amplitude(double delta_omega_b, double omega_j, int order,
                             double carrier_amp) {
  if (!(omega_j > 0.0))
    throw std::domain_error(
        "fm_sideband_amplitude: modulation frequency must be > 0");
  const double index = std::abs(delta_omega_b) / omega_j;
  return carrier_amp * std::abs(bessel_j(order, index));
}

double lz_transfer_fraction(double coupling, double crossing_rate) {
  if (!(coupling >= 0.0))
    throw std::invalid_argument("lz_transfer_fraction: coupling must be >= 0");
  if (crossing_rate < 0.0)
    throw std::domain_error("lz_transfer_fraction: crossing rate must be >= 0");
  if (crossing_rate == 0.0) return 0.0;  // adiabatic limit
  return std::exp(-two_pi * coupling * coupling / crossing_rate);
}

BlochPoint bloch_coordinates(const TwoLevelState& state) {
  const double n_b = state.n_b();
  const double n_s = state.n_s();
  const double n0 = n_b + n_s;
  if (!(n0 > 0.0))
    throw std::domain_error("bloch_coordinates: zero total population");
  BlochPoint point;
  point.n_total = n0;
  point.theta = 2.0 * std::atan2(std::sqrt(n_s), std::sqrt(n_b));
  if (n_b == 0.0 || n_s == 0.0)
    point.phi = 0.0;  // poles: azimuth undefined, fixed by convention
  else
    point.phi = wrap_to_2pi(std::arg(state.psi_b) - std::arg(state.psi_s));
  return point;
}

TwoLevelState state_from_bloch(const BlochPoint& point, double t) {
  if (!(point.n_total >= 0.0))
    throw std::domain_error("state_from_bloch: negative population");
  const double root = std::sqrt(point.n_total);
  TwoLevelState state;
  state.t = t;
  state.psi_b = root * std::cos(0.5 * point.theta);
  state.psi_s = std::polar(root * std::sin(0.5 * point.theta), -point.phi);
  return state;
}

BranchSplit branch_populations(const TwoLevelState& state, double omega_b,
                               double omega_s, double coupling) {
  if (!(coupling >= 0.0))
    throw std::invalid_argument("branch_populations: coupling must be >= 0");
  const double x = mixing_angle(omega_b, omega_s, coupling);
  const double c = std::cos(x);
  const double s = std::sin(x);
  BranchSplit split;
  split.ground = std::norm(-s * state.psi_b + c * state.psi_s);
  split.excited = std::norm(c * state.psi_b + s * state.psi_s);
  return split;
}

TwoLevelState eigenstate(double omega_b, double omega_s, double coupling,
                         int branch, double n_total, double t) {
  if (!(coupling >= 0.0))
    throw std::invalid_argument("eigenstate: coupling must be >= 0");
  if (branch != 0 && branch != 1)
    throw std::invalid_argument("eigenstate: branch must be 0 or 1");
  if (!(n_total >= 0.0))
    throw std::domain_error("eigenstate: negative population");
  const double x = mixing_angle(omega_b, omega_s, coupling);
  const double root = std::sqrt(n_total);
  TwoLevelState state;
  state.t = t;
  if (branch == 0) {
    state.psi_b = -root * std::sin(x);
    state.psi_s = root * std::cos(x);
  } else {
    state.psi_b = root * std::cos(x);
    state.psi_s = root * std::sin(x);
  }
  return state;
}

}  // namespace mduet

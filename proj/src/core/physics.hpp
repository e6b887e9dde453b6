#pragma once

#include <complex>
#include <limits>

namespace mduet {

inline constexpr double two_pi = 6.283185307179586476925286766559;
inline constexpr double inf = std::numeric_limits<double>::infinity();

inline double hz_to_rad(double hz) { return two_pi * hz; }
inline double rad_to_hz(double rad) { return rad / two_pi; }

// Physical constants of one scenario. Frequencies are angular (rad/s),
// magnon numbers are dimensionless (normalized to a reference population).
struct SystemParams {
  double omega_bar_b = 0.0;      // bare bulk frequency at zero population
  double omega_bar_s = 0.0;      // bare surface frequency at zero populations
  double coupling = 0.0;         // inter-level coupling, >= 0
  double k_selftrap = 0.0;       // self-trapping coefficient of the bulk trap
  double p_exponent = 5.0 / 7.0; // self-trapping power law exponent
  double surface_coeff_b = 0.0;  // surface shift per bulk population^p
  double surface_coeff_s = 0.0;  // surface shift per surface population^p
  double tau_b = inf;            // bulk amplitude decay constant, s
  double tau_s = inf;            // surface amplitude decay constant, s
  double fill_b = 1.0;           // signal amplitude per sqrt(magnon), bulk
  double fill_s = 1.0;           // signal amplitude per sqrt(magnon), surface
  double omega_larmor = 0.0;     // lab-frame carrier; 0 = stay in rotating frame
  double coupling_nb_slope = 0.0;// optional linear growth of coupling with N_B

  // Throws std::invalid_argument naming the offending field.
  void validate() const;

  double effective_coupling(double n_b) const {
    const double c = coupling * (1.0 + coupling_nb_slope * n_b);
    return c > 0.0 ? c : 0.0;
  }
};

// Complex amplitudes of the two levels at one instant; populations are the
// squared magnitudes.
struct TwoLevelState {
  double t = 0.0;
  std::complex<double> psi_b{0.0, 0.0};
  std::complex<double> psi_s{0.0, 0.0};

  double n_b() const { return std::norm(psi_b); }
  double n_s() const { return std::norm(psi_s); }
  double n_total() const { return n_b() + n_s(); }
};

struct BlochPoint {
  double n_total = 0.0;
  double theta = 0.0;  // polar angle, [0, pi]
  double phi = 0.0;    // azimuthal angle, [0, 2*pi)
};

struct DressedPair {
  double lower = 0.0;
  double upper = 0.0;
  double gap() const { return upper - lower; }
};

struct BranchSplit {
  double ground = 0.0;
  double excited = 0.0;
};

// Bulk precession frequency at population n_b following the self-trapping
// power law omega_bar_b * (1 - k * n_b^p).
double bulk_frequency(const SystemParams& params, double n_b);

// Surface frequency including the optional population shifts
// omega_bar_s * (1 - c_b * n_b^p - c_s * n_s^p); constant when both are 0.
double surface_frequency(const SystemParams& params, double n_b, double n_s);

// Eigenfrequencies of the coupled two-level system, sorted ascending.
// gap = sqrt((omega_b - omega_s)^2 + 4 coupling^2).
DressedPair dressed_frequencies(double omega_b, double omega_s, double coupling);

// sqrt((omega_b - omega_s)^2 + (2 coupling)^2); equals the dressed gap.
double rabi_frequency(double omega_b, double omega_s, double coupling);

// Amplitude of the AC Josephson population oscillation,
// coupling * sqrt(n_b n_s) / |omega_b - omega_s|. Throws std::domain_error
// at omega_b == omega_s (Rabi regime, use the full simulation instead).
double josephson_amplitude(double coupling, double n_b, double n_s,
                           double omega_b, double omega_s);

// FM sideband amplitude carrier_amp * |J_order(delta_omega_b / omega_j)|.
double fm_sideband_amplitude(double delta_omega_b, double omega_j, int order,
                             double carrier_amp);

// Fraction of population promoted to the excited branch when sweeping
// through the avoided crossing: exp(-2 pi coupling^2 / crossing_rate).
// crossing_rate == 0 returns 0 (adiabatic limit).
double lz_transfer_fraction(double coupling, double crossing_rate);

// Bloch-sphere coordinates of a state: n_b = n0 cos^2(theta/2),
// n_s = n0 sin^2(theta/2), phi = arg(psi_b) - arg(psi_s) wrapped to [0, 2pi).
// Throws std::domain_error for the zero state.
BlochPoint bloch_coordinates(const TwoLevelState& state);

// Inverse of bloch_coordinates with psi_b chosen real and non-negative.
TwoLevelState state_from_bloch(const BlochPoint& point, double t = 0.0);

// Populations of the instantaneous ground/excited eigenbranches.
BranchSplit branch_populations(const TwoLevelState& state, double omega_b,
                               double omega_s, double coupling);

// Amplitudes of a pure eigenbranch state (branch 0 = ground, 1 = excited)
// with total population n_total, phase convention: real amplitudes.
TwoLevelState eigenstate(double omega_b, double omega_s, double coupling,
                         int branch, double n_total, double t = 0.0);

}  // namespace mduet

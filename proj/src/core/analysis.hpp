#pragma once

#include <optional>
#include <string>
#include <vector>

#include "integrator.hpp"
#include "spectral.hpp"

namespace mduet {

struct DerivativePoint {
  double t = 0.0;
  double value = 0.0;  // d omega_b / d amplitude^2, rad/s per amp^2
};

// Fits the bulk ridge frequency as a smooth function of squared amplitude
// (local quadratic regression) and differentiates the fit. The ridge must
// have at least 10 points and a monotone squared-amplitude track.
std::vector<DerivativePoint> selftrap_derivative(const Ridge& bulk_ridge,
                                                 double bandwidth_frac = 0.5);

struct CouplingEstimate {
  double t = 0.0;
  double omega_est = 0.0;  // rad/s
  double a_sb = 0.0, a_b = 0.0, a_s = 0.0;
  double delta_omega = 0.0;  // rad/s
  double deriv = 0.0;        // rad/s per amp^2
  bool valid = false;
};

struct CouplingSeries {
  std::vector<CouplingEstimate> estimates;
  double t_cross = 0.0;
  double extrapolated = 0.0;  // rad/s, linear fit evaluated at t_cross
  bool extrapolation_ok = false;
};

// Pointwise coupling from the sideband and main-trace amplitudes,
// 2 A_sb (omega_b - omega_s)^2 / (A_b^2 A_s |d omega_b / d A_b^2|),
// plus a linear extrapolation to the crossing time over the quarter of the
// valid estimates closest to it (pre-crossing points preferred).
CouplingSeries extract_coupling(const RidgeSet& ridges,
                                const std::vector<DerivativePoint>& deriv,
                                double t_cross);

struct RelaxationSegment {
  double t_start = 0.0;
  double t_end = 0.0;
  double tau = 0.0;  // s; +inf flags a non-decaying segment
  double amplitude0 = 0.0;
  double residual_rms = 0.0;  // on log amplitude
};

struct RelaxationFit {
  std::vector<RelaxationSegment> segments;
  std::optional<double> kink_time;
};

// Continuous one- or two-segment exponential fit of an amplitude trace; the
// kink is reported when the two-slope model improves the residual RMS by at
// least 20%.
RelaxationFit fit_relaxation(const std::vector<double>& t,
                             const std::vector<double>& amp);

struct LzReportData {
  double predicted_fraction = 0.0;
  double observed_fraction = 0.0;
  double crossing_time = 0.0;       // s
  double crossing_rate = 0.0;       // rad/s^2, instantaneous
  double decay_only_rate = 0.0;     // rad/s^2; NaN when not applicable
  double rate_ratio = 0.0;          // crossing_rate / decay_only_rate; NaN
  double min_gap = 0.0;             // rad/s
  double min_gap_time = 0.0;        // s
};

// Landau-Zener prediction vs. simulation at the first undressed crossing.
// The observed fraction is the excited-branch population averaged over one
// Rabi period, starting one Rabi period after the crossing. Throws
// NoCrossingError when the trajectory never crosses.
LzReportData lz_report(const Trajectory& traj);

}  // namespace mduet

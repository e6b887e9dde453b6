#pragma once

#include <utility>
#include <vector>

#include "physics.hpp"

namespace mduet {

// Frequency schedule of a run. In physical mode the instantaneous
// frequencies follow the populations through the self-trapping law (or a
// tabulated override); in programmed mode the detuning omega_b - omega_s is
// forced along a piecewise-linear function of time and the nonlinearity is
// bypassed entirely.
struct Schedule {
  enum class Mode { physical, programmed };

  Mode mode = Mode::physical;

  // programmed mode: (t, detuning rad/s) breakpoints, t strictly increasing,
  // clamped outside the covered range. The two levels are placed
  // symmetrically about `programmed_center`.
  std::vector<std::pair<double, double>> detuning;
  double programmed_center = 0.0;

  // physical mode: optional monotone non-increasing table n_b -> omega_b
  // (rad/s) overriding the power law; linear interpolation, clamped.
  std::vector<std::pair<double, double>> bulk_freq_table;

  void validate() const;

  double detuning_at(double t) const;
  double table_bulk_frequency(double n_b) const;

  // Linear sweep detuning(t) = rate * (t - t_cross) covering [t0, t1].
  static Schedule linear_sweep(double rate, double t_cross, double t0,
                               double t1, double center = 0.0);
};

struct InstantFrequencies {
  double omega_b = 0.0;
  double omega_s = 0.0;
};

InstantFrequencies instantaneous_frequencies(const SystemParams& params,
                                             const Schedule& schedule,
                                             double t, double n_b, double n_s);

}  // namespace mduet

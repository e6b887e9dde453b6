#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "physics.hpp"
#include "schedule.hpp"

namespace mduet {

struct TrajectorySample {
  double t = 0.0;
  std::complex<double> psi_b{0.0, 0.0};
  std::complex<double> psi_s{0.0, 0.0};
  double omega_b = 0.0;     // instantaneous undressed frequencies, rad/s
  double omega_s = 0.0;
  double dressed_lo = 0.0;  // instantaneous eigenfrequencies, rad/s
  double dressed_hi = 0.0;

  double n_b() const { return std::norm(psi_b); }
  double n_s() const { return std::norm(psi_s); }
};

enum class EventKind { undressed_crossing, min_gap };

struct TrajectoryEvent {
  EventKind kind;
  double time;
  double value;  // crossing: |d(omega_b - omega_s)/dt| rad/s^2; gap: rad/s
};

struct StepStats {
  unsigned long long accepted = 0;
  unsigned long long rejected = 0;
  double max_norm_drift = 0.0;  // relative, tracked when decay is disabled
  double error_budget = 0.0;    // sum of per-step local error estimates
};

struct IntegrateOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double sample_rate = 0.0;  // Hz; 0 = 20x the largest frequency present
};

class Trajectory {
 public:
  Trajectory(SystemParams params, Schedule schedule,
             std::vector<TrajectorySample> samples, StepStats stats);

  const std::vector<TrajectorySample>& samples() const { return samples_; }
  const std::vector<TrajectoryEvent>& events() const { return events_; }
  const StepStats& stats() const { return stats_; }
  const SystemParams& params() const { return params_; }
  const Schedule& schedule() const { return schedule_; }
  double sample_rate() const { return sample_rate_; }

  // Detuning omega_b - omega_s linearly interpolated between samples.
  double detuning_at(double t) const;
  TwoLevelState state_at(size_t index) const;

  void write_csv(const std::string& path) const;

 private:
  void locate_events();

  SystemParams params_;
  Schedule schedule_;
  std::vector<TrajectorySample> samples_;
  std::vector<TrajectoryEvent> events_;
  StepStats stats_;
  double sample_rate_ = 0.0;
};

class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, TwoLevelState last)
      : std::runtime_error(what), last_state(last) {}
  TwoLevelState last_state;
};

class NoCrossingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Solves the coupled pair
//   i d/dt psi_b = (omega_b(N_b) - i/tau_b) psi_b + coupling psi_s
//   i d/dt psi_s = (omega_s       - i/tau_s) psi_s + coupling psi_b
// with an adaptive Dormand-Prince 5(4) pair and dense output at a uniform
// sample rate. The common rotating phase is removed internally so step sizes
// follow the slow dynamics (detuning, coupling, decay), not the carrier.
Trajectory integrate(const SystemParams& params, const TwoLevelState& initial,
                     const Schedule& schedule, double t_end,
                     const IntegrateOptions& options = {});

struct CrossingInfo {
  double t_cross = 0.0;
  double rate = 0.0;  // rad/s^2
  bool found = false;
};

// First sign change of omega_b - omega_s; the rate is a centered five-point
// finite-difference slope over a window of one tenth of a Rabi period, so it
// captures the instantaneous (oscillation-resolving) crossing rate.
CrossingInfo detect_crossing(const Trajectory& traj);

struct GapInfo {
  double t_gap = 0.0;
  double gap = 0.0;  // rad/s
};

// Minimum dressed-frequency separation, parabola-refined near the minimum.
// Throws NoCrossingError when the trajectory has no undressed crossing.
GapInfo min_dressed_gap(const Trajectory& traj);

double default_sample_rate(const SystemParams& params,
                           const Schedule& schedule,
                           const TwoLevelState& initial, double t_end);

}  // namespace mduet

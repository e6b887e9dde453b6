#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "magnonduet.h"

namespace cli {

// Thrown for any malformed or invalid scenario; the message names the
// offending key.
class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SpectrogramSettings {
  double window_s = 0.5;
  double hop_s = 0.05;
  int window_kind = MD_WINDOW_HANN;
};

struct AnalysisSettings {
  double min_amp = 0.0;      // 0 = derive from the spectrogram
  double max_hop_hz = 0.0;   // 0 = three spectrogram bins
  double sideband_tol = 0.15;
  double min_overlap_frac = 0.70;
  double deriv_bandwidth_frac = 0.5;
};

struct ScheduleSettings {
  bool programmed = false;
  double center_hz = 0.0;
  // programmed: explicit breakpoints, or a linear sweep through t_cross
  std::vector<std::pair<double, double>> detuning_points_hz;
  std::optional<double> sweep_rate_hz_per_s;
  double sweep_t_cross_s = 0.0;
  // physical: optional table n_b -> bulk frequency (Hz)
  std::vector<std::pair<double, double>> bulk_table_hz;
};

struct Scenario {
  std::string name;
  md_params params{};  // converted to rad/s
  double n_b0 = 0.0;
  double n_s0 = 0.0;
  double phi0_rad = 0.0;
  double t_end_s = 0.0;
  double sample_rate_hz = 0.0;
  double noise_rms = 0.0;
  uint64_t seed = 0;
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double traj_sample_rate_hz = 0.0;  // 0 = automatic
  SpectrogramSettings spectrogram;
  AnalysisSettings analysis;
  ScheduleSettings schedule;
  nlohmann::json raw;  // original document, for run metadata
};

Scenario parse_scenario(const nlohmann::json& doc);
Scenario load_scenario(const std::string& path);

// initial amplitudes: psi_b = sqrt(n_b0), psi_s = sqrt(n_s0) e^{-i phi0}
void initial_state(const Scenario& scenario, double* re_b, double* im_b,
                   double* re_s, double* im_s);

// owned handle built from the schedule block; caller frees
md_schedule* make_schedule(const Scenario& scenario);

}  // namespace cli

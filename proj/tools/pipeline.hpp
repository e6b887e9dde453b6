#pragma once

#include <limits>
#include <string>

#include "scenario.hpp"

namespace cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalidScenario = 1;
inline constexpr int kExitIntegrationFailure = 2;
inline constexpr int kExitIoFailure = 3;
inline constexpr int kExitLzValidation = 4;
inline constexpr int kExitSweepAllFailed = 5;

struct RunResult {
  int exit_code = kExitOk;
  std::string error;

  bool crossing_found = false;
  bool sideband_found = false;
  double predicted = std::numeric_limits<double>::quiet_NaN();
  double observed = std::numeric_limits<double>::quiet_NaN();
  double crossing_time_s = std::numeric_limits<double>::quiet_NaN();
  double crossing_rate = std::numeric_limits<double>::quiet_NaN();
  double decay_only_rate = std::numeric_limits<double>::quiet_NaN();
  double rate_ratio = std::numeric_limits<double>::quiet_NaN();
  double min_gap_hz = std::numeric_limits<double>::quiet_NaN();
  double min_gap_time_s = std::numeric_limits<double>::quiet_NaN();
  double extracted_coupling_hz = std::numeric_limits<double>::quiet_NaN();
};

// Full simulate pipeline: integrate, synthesize, analyse, write all run
// artifacts into out_dir. Never throws; failures land in the result.
RunResult run_simulation(const Scenario& scenario, const std::string& out_dir);

// Spectral + extraction pipeline on an existing signal file.
int run_analyze(const std::string& signal_path, const Scenario& scenario,
                const std::string& out_dir);

}  // namespace cli

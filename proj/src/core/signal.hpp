#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "integrator.hpp"

namespace mduet {

// Uniformly sampled real-valued pick-up signal.
struct SignalSeries {
  double sample_rate = 0.0;  // Hz
  double start_time = 0.0;   // s
  std::vector<double> samples;
};

// s(t) = Re[(fill_b psi_b + fill_s psi_s) exp(-i omega_larmor t)] resampled
// from the trajectory, plus white Gaussian noise of the given RMS from a
// seeded, reproducible generator. Throws when the requested rate is below
// four times the highest instantaneous frequency.
SignalSeries synthesize(const Trajectory& traj, const SystemParams& params,
                        double sample_rate, double noise_rms, uint64_t seed);

void write_signal_csv(const SignalSeries& sig, const std::string& path);
SignalSeries read_signal_csv(const std::string& path);

// Little-endian binary format: 8-byte magic "MDSIG1\0\0", sample rate as a
// 64-bit float, then 64-bit float samples.
void write_signal_binary(const SignalSeries& sig, const std::string& path);
SignalSeries read_signal_binary(const std::string& path);

}  // namespace mduet

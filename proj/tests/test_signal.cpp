#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numeric>

#include "core/signal.hpp"

using namespace mduet;

namespace {

// single rigid crystal precessing at a fixed frequency
Trajectory tone_trajectory(double freq_hz, double n_b, double t_end,
                           double sample_rate = 0.0) {
  SystemParams params;
  params.omega_bar_b = hz_to_rad(freq_hz);
  params.omega_bar_s = hz_to_rad(freq_hz * 0.63);
  params.coupling = 0.0;
  TwoLevelState initial{0.0, {std::sqrt(n_b), 0.0}, {0.0, 0.0}};
  IntegrateOptions options;
  options.rel_tol = 1e-11;
  options.abs_tol = 1e-13;
  options.sample_rate = sample_rate;
  return integrate(params, initial, Schedule{}, t_end, options);
}

}  // namespace

TEST_CASE("single crystal gives a pure sinusoid of amplitude fill*sqrt(n)") {
  const double freq = 100.0;
  const double n_b = 4.0;
  const Trajectory traj = tone_trajectory(freq, n_b, 2.0);
  SystemParams params = traj.params();
  params.fill_b = 0.5;

  const SignalSeries sig = synthesize(traj, params, 2000.0, 0.0, 1);
  CHECK(sig.sample_rate == doctest::Approx(2000.0));

  const double amp = params.fill_b * std::sqrt(n_b);
  double max_dev = 0.0;
  for (size_t k = 0; k < sig.samples.size(); ++k) {
    const double t = double(k) / sig.sample_rate;
    max_dev = std::max(max_dev,
                       std::abs(sig.samples[k] - amp * std::cos(hz_to_rad(freq) * t)));
  }
  CHECK(max_dev < 1e-4 * amp);
}

TEST_CASE("total power of a noiseless tone equals amplitude^2/2") {
  // exactly 200 carrier cycles in the record
  const Trajectory traj = tone_trajectory(100.0, 1.0, 2.0);
  const SignalSeries sig = synthesize(traj, traj.params(), 2000.0, 0.0, 1);

  double power = 0.0;
  for (size_t k = 0; k + 1 < sig.samples.size(); ++k)  // drop the repeated endpoint
    power += sig.samples[k] * sig.samples[k];
  power /= double(sig.samples.size() - 1);
  CHECK(power == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("zero populations synthesize to zeros, plus optional noise") {
  SystemParams params;
  params.omega_bar_b = hz_to_rad(50.0);
  params.omega_bar_s = hz_to_rad(40.0);
  TwoLevelState initial{0.0, {0.0, 0.0}, {0.0, 0.0}};
  const Trajectory traj = integrate(params, initial, Schedule{}, 1.0);

  const SignalSeries quiet = synthesize(traj, params, 1000.0, 0.0, 9);
  for (double v : quiet.samples) CHECK(v == 0.0);

  const SignalSeries noisy = synthesize(traj, params, 1000.0, 0.25, 9);
  double rms = 0.0;
  for (double v : noisy.samples) rms += v * v;
  rms = std::sqrt(rms / double(noisy.samples.size()));
  CHECK(rms == doctest::Approx(0.25).epsilon(0.1));
}

TEST_CASE("two equal-frequency crystals superpose as phasors") {
  SystemParams params;
  params.omega_bar_b = hz_to_rad(80.0);
  params.omega_bar_s = hz_to_rad(80.0);
  params.coupling = 0.0;
  const double phase = 1.1;
  TwoLevelState initial{0.0, {std::sqrt(2.0), 0.0},
                        std::polar(std::sqrt(0.5), -phase)};
  const Trajectory traj = integrate(params, initial, Schedule{}, 1.0);
  const SignalSeries sig = synthesize(traj, params, 2000.0, 0.0, 1);

  const std::complex<double> phasor =
      params.fill_b * initial.psi_b + params.fill_s * initial.psi_s;
  const double expected = std::abs(phasor);
  double peak = 0.0;
  for (double v : sig.samples) peak = std::max(peak, std::abs(v));
  CHECK(peak == doctest::Approx(expected).epsilon(1e-3));
}

TEST_CASE("seeded noise is bit-identical across calls") {
  const Trajectory traj = tone_trajectory(60.0, 1.0, 1.0);
  const SignalSeries a = synthesize(traj, traj.params(), 1500.0, 0.05, 1234);
  const SignalSeries b = synthesize(traj, traj.params(), 1500.0, 0.05, 1234);
  REQUIRE(a.samples.size() == b.samples.size());
  for (size_t k = 0; k < a.samples.size(); ++k)
    CHECK(a.samples[k] == b.samples[k]);

  const SignalSeries c = synthesize(traj, traj.params(), 1500.0, 0.05, 1235);
  size_t differing = 0;
  for (size_t k = 0; k < a.samples.size(); ++k)
    if (a.samples[k] != c.samples[k]) ++differing;
  CHECK(differing > a.samples.size() / 2);
}

TEST_CASE("noise statistics of the seeded generator") {
  SystemParams params;
  params.omega_bar_b = hz_to_rad(1.0);
  params.omega_bar_s = hz_to_rad(1.0);
  TwoLevelState initial{0.0, {0.0, 0.0}, {0.0, 0.0}};
  IntegrateOptions options;
  options.sample_rate = 2000.0;
  const Trajectory traj = integrate(params, initial, Schedule{}, 500.0, options);
  const SignalSeries sig = synthesize(traj, params, 2000.0, 0.1, 77);
  REQUIRE(sig.samples.size() == 1000001);

  const double mean =
      std::accumulate(sig.samples.begin(), sig.samples.end(), 0.0) /
      double(sig.samples.size());
  double var = 0.0;
  for (double v : sig.samples) var += (v - mean) * (v - mean);
  var /= double(sig.samples.size() - 1);
  CHECK(std::sqrt(var) == doctest::Approx(0.1).epsilon(0.01));
  CHECK(std::abs(mean) < 5e-4);
}

TEST_CASE("undersampling is rejected with the required rate in the message") {
  const Trajectory traj = tone_trajectory(100.0, 1.0, 1.0);
  CHECK_THROWS_WITH_AS(synthesize(traj, traj.params(), 350.0, 0.0, 1),
                       doctest::Contains("need at least"),
                       std::invalid_argument);
}

TEST_CASE("lab-frame carrier shifts the spectrum and the rate check") {
  const Trajectory traj = tone_trajectory(10.0, 1.0, 0.5, 4000.0);
  SystemParams params = traj.params();
  params.omega_larmor = hz_to_rad(400.0);
  CHECK_THROWS_AS(synthesize(traj, params, 800.0, 0.0, 1),
                  std::invalid_argument);
  const SignalSeries sig = synthesize(traj, params, 4000.0, 0.0, 1);
  // peak of |s| stays at the fill amplitude
  double peak = 0.0;
  for (double v : sig.samples) peak = std::max(peak, std::abs(v));
  CHECK(peak == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("csv and binary round trips") {
  const Trajectory traj = tone_trajectory(25.0, 1.0, 0.5);
  const SignalSeries sig = synthesize(traj, traj.params(), 500.0, 0.01, 5);

  const auto dir = std::filesystem::temp_directory_path();
  const auto csv = (dir / "md_sig_test.csv").string();
  const auto bin = (dir / "md_sig_test.bin").string();

  write_signal_csv(sig, csv);
  const SignalSeries from_csv = read_signal_csv(csv);
  CHECK(from_csv.sample_rate == doctest::Approx(sig.sample_rate).epsilon(1e-9));
  REQUIRE(from_csv.samples.size() == sig.samples.size());
  for (size_t k = 0; k < sig.samples.size(); k += 37)
    CHECK(from_csv.samples[k] == doctest::Approx(sig.samples[k]).epsilon(1e-14));

  write_signal_binary(sig, bin);
  const SignalSeries from_bin = read_signal_binary(bin);
  CHECK(from_bin.sample_rate == sig.sample_rate);
  REQUIRE(from_bin.samples.size() == sig.samples.size());
  for (size_t k = 0; k < sig.samples.size(); ++k)
    CHECK(from_bin.samples[k] == sig.samples[k]);

  // 16-byte header: magic then the rate as a little-endian double
  std::ifstream raw(bin, std::ios::binary);
  char head[16];
  raw.read(head, 16);
  CHECK(std::string(head, 6) == "MDSIG1");
  CHECK(head[6] == '\0');
  CHECK(head[7] == '\0');
  double rate = 0.0;
  std::memcpy(&rate, head + 8, 8);
  CHECK(rate == sig.sample_rate);

  std::filesystem::remove(csv);
  std::filesystem::remove(bin);
}

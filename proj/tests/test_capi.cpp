// Exercises the shared-library C surface: handles, error codes, exports.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "magnonduet.h"

namespace {

constexpr double kTwoPi = 6.283185307179586;

md_params default_params() {
  md_params params;
  md_params_init(&params);
  return params;
}

}  // namespace

TEST_CASE("version and status names") {
  CHECK(std::string(md_version()).find('.') != std::string::npos);
  CHECK(std::string(md_status_name(MD_OK)) == "ok");
  CHECK(std::string(md_status_name(MD_ERR_DOMAIN)) == "domain error");
}

TEST_CASE("params defaults validate; bad fields are rejected with a message") {
  md_params params = default_params();
  CHECK(md_params_validate(&params) == MD_OK);

  params.coupling = -2.0;
  CHECK(md_params_validate(&params) == MD_ERR_INVALID_ARGUMENT);
  CHECK(std::string(md_last_error()).find("coupling") != std::string::npos);

  CHECK(md_params_validate(nullptr) == MD_ERR_INVALID_ARGUMENT);
}

TEST_CASE("scalar relations through the c surface") {
  md_params params = default_params();
  params.omega_bar_b = kTwoPi * 200.0;
  params.omega_bar_s = kTwoPi * 100.0;
  params.k_selftrap = 0.1;

  double out = 0.0;
  REQUIRE(md_bulk_frequency(&params, 1.0, &out) == MD_OK);
  CHECK(out == doctest::Approx(kTwoPi * 180.0));
  CHECK(md_bulk_frequency(&params, -1.0, &out) == MD_ERR_DOMAIN);

  double lo = 0.0, hi = 0.0;
  REQUIRE(md_dressed_frequencies(2.0, 0.0, std::sqrt(3.0), &lo, &hi) == MD_OK);
  CHECK(lo == doctest::Approx(-1.0));
  CHECK(hi == doctest::Approx(3.0));

  REQUIRE(md_rabi_frequency(3.0, 0.0, 2.0, &out) == MD_OK);
  CHECK(out == doctest::Approx(5.0));

  CHECK(md_josephson_amplitude(1.0, 1.0, 1.0, 2.0, 2.0, &out) == MD_ERR_DOMAIN);
  REQUIRE(md_josephson_amplitude(1.0, 4.0, 4.0, 3.0, 1.0, &out) == MD_OK);
  CHECK(out == doctest::Approx(2.0));

  REQUIRE(md_fm_sideband_amplitude(3.0, 3.0, 1, 1.0, &out) == MD_OK);
  CHECK(out == doctest::Approx(0.44005).epsilon(1e-4));

  REQUIRE(md_lz_transfer_fraction(0.0, 10.0, &out) == MD_OK);
  CHECK(out == doctest::Approx(1.0));

  double n0 = 0, theta = 0, phi = 0;
  REQUIRE(md_bloch_coordinates(1.0, 0.0, 1.0, 0.0, &n0, &theta, &phi) == MD_OK);
  CHECK(n0 == doctest::Approx(2.0));
  CHECK(theta == doctest::Approx(0.5 * 3.141592653589793));
  CHECK(md_bloch_coordinates(0, 0, 0, 0, &n0, &theta, &phi) == MD_ERR_DOMAIN);
}

TEST_CASE("end-to-end pipeline through handles") {
  md_params params = default_params();
  params.omega_bar_b = kTwoPi * 120.0;
  params.omega_bar_s = kTwoPi * 112.0;
  params.coupling = kTwoPi * 0.5;

  md_schedule* schedule = md_schedule_new_physical();
  REQUIRE(schedule);

  md_trajectory* traj = nullptr;
  double re_b = 0, im_b = 0, re_s = 0, im_s = 0;
  REQUIRE(md_eigenstate(params.omega_bar_b, params.omega_bar_s,
                        params.coupling, 1, 1.0, &re_b, &im_b, &re_s,
                        &im_s) == MD_OK);
  REQUIRE(md_integrate(&params, 0.0, re_b, im_b, re_s, im_s, schedule, 4.0,
                       1e-10, 1e-12, 0.0, &traj) == MD_OK);
  REQUIRE(traj);
  const size_t n = md_trajectory_size(traj);
  CHECK(n > 100);

  std::vector<double> n_b(n);
  REQUIRE(md_trajectory_copy(traj, MD_TRAJ_N_B, n_b.data(), n) == MD_OK);
  CHECK(n_b.front() == doctest::Approx(re_b * re_b + im_b * im_b).epsilon(1e-9));
  CHECK(md_trajectory_copy(traj, MD_TRAJ_N_B, n_b.data(), 1) ==
        MD_ERR_INVALID_ARGUMENT);

  double ground = 0, excited = 0;
  REQUIRE(md_branch_populations(traj, 0, &ground, &excited) == MD_OK);
  CHECK(excited == doctest::Approx(1.0).epsilon(1e-9));

  double t_cross = 0, rate = 0;
  int found = -1;
  REQUIRE(md_trajectory_crossing(traj, &t_cross, &rate, &found) == MD_OK);
  CHECK(found == 0);
  double t_gap = 0, gap = 0;
  CHECK(md_trajectory_min_gap(traj, &t_gap, &gap) == MD_ERR_NO_CROSSING);

  md_signal* sig = nullptr;
  REQUIRE(md_synthesize(traj, &params, 2000.0, 0.0, 42, &sig) == MD_OK);
  REQUIRE(sig);
  CHECK(md_signal_sample_rate(sig) == doctest::Approx(2000.0));
  CHECK(md_signal_size(sig) == 8001);

  md_spectrogram* spec = nullptr;
  REQUIRE(md_spectrogram_compute(sig, 1.0, 0.1, MD_WINDOW_HANN, &spec) == MD_OK);
  size_t nt = 0, nf = 0;
  REQUIRE(md_spectrogram_dims(spec, &nt, &nf) == MD_OK);
  CHECK(nt > 10);
  CHECK(md_spectrogram_resolution_hz(spec) == doctest::Approx(1.0));

  md_ridge_set* ridges = nullptr;
  REQUIRE(md_track_ridges(spec, 0.02, 3.0, &ridges) == MD_OK);
  CHECK(md_ridge_set_size(ridges) >= 2);
  int warning = -1;
  REQUIRE(md_classify_sidebands(ridges, 0.15, 0.70, &warning) == MD_OK);
  CHECK(warning == 0);

  bool saw_bulk = false, saw_surface = false;
  for (size_t i = 0; i < md_ridge_set_size(ridges); ++i) {
    const int label = md_ridge_label(ridges, i);
    saw_bulk |= label == MD_RIDGE_MAIN_BULK;
    saw_surface |= label == MD_RIDGE_MAIN_SURFACE;
  }
  CHECK(saw_bulk);
  CHECK(saw_surface);

  const auto dir = std::filesystem::temp_directory_path();
  const auto tpath = (dir / "md_capi_traj.csv").string();
  const auto spath = (dir / "md_capi_sig.csv").string();
  REQUIRE(md_trajectory_write_csv(traj, tpath.c_str()) == MD_OK);
  REQUIRE(md_signal_write_csv(sig, spath.c_str()) == MD_OK);
  CHECK(md_trajectory_write_csv(traj, "/nonexistent-dir/x.csv") == MD_ERR_IO);

  md_signal* reread = nullptr;
  REQUIRE(md_signal_read_csv(spath.c_str(), &reread) == MD_OK);
  CHECK(md_signal_size(reread) == md_signal_size(sig));

  md_signal_free(reread);
  md_ridge_set_free(ridges);
  md_spectrogram_free(spec);
  md_signal_free(sig);
  md_trajectory_free(traj);
  md_schedule_free(schedule);
  std::filesystem::remove(tpath);
  std::filesystem::remove(spath);
}

TEST_CASE("programmed schedule and lz report through the c surface") {
  const double coupling = kTwoPi * 1.0;
  const double alpha = kTwoPi * coupling * coupling / 1.0;
  const double span = std::max(30.0 * coupling, 12.0 * std::sqrt(alpha));
  const double t_total = 2.0 * span / alpha;

  const double times[2] = {0.0, t_total};
  const double detuning[2] = {-span, span};
  md_schedule* sweep = md_schedule_new_programmed(times, detuning, 2, 0.0);
  REQUIRE(sweep);

  md_params params = default_params();
  params.coupling = coupling;

  double re_b = 0, im_b = 0, re_s = 0, im_s = 0;
  REQUIRE(md_eigenstate(-0.5 * span, 0.5 * span, coupling, 0, 1.0, &re_b,
                        &im_b, &re_s, &im_s) == MD_OK);

  md_trajectory* traj = nullptr;
  REQUIRE(md_integrate(&params, 0.0, re_b, im_b, re_s, im_s, sweep, t_total,
                       1e-10, 1e-12, 0.0, &traj) == MD_OK);

  md_lz_report report;
  REQUIRE(md_lz_report_compute(traj, &report) == MD_OK);
  CHECK(report.predicted_fraction == doctest::Approx(std::exp(-1.0)).epsilon(0.02));
  CHECK(std::abs(report.predicted_fraction - report.observed_fraction) < 0.02);
  CHECK(std::isnan(report.decay_only_rate_rad_s2));
  CHECK(report.min_gap_rad == doctest::Approx(2.0 * coupling).epsilon(0.01));

  md_trajectory_free(traj);
  md_schedule_free(sweep);

  // misuse paths
  md_schedule* bad = md_schedule_new_programmed(times, detuning, 1, 0.0);
  CHECK(bad == nullptr);
  CHECK(std::string(md_last_error()).find("two breakpoints") !=
        std::string::npos);
}

TEST_CASE("relaxation fit through the c surface") {
  std::vector<double> t, amp;
  for (int i = 0; i < 60; ++i) {
    t.push_back(0.1 * i);
    amp.push_back(std::exp(-0.1 * i / 5.0));
  }
  md_relax_segment segments[2];
  size_t n_segments = 0;
  double kink = 0.0;
  REQUIRE(md_fit_relaxation(t.data(), amp.data(), t.size(), segments,
                            &n_segments, &kink) == MD_OK);
  CHECK(n_segments == 1);
  CHECK(std::isnan(kink));
  CHECK(segments[0].tau == doctest::Approx(5.0).epsilon(0.01));

  CHECK(md_fit_relaxation(t.data(), amp.data(), 4, segments, &n_segments,
                          &kink) == MD_ERR_INVALID_ARGUMENT);
}

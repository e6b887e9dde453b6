#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "core/analysis.hpp"
#include "core/integrator.hpp"

using namespace mduet;

namespace {

IntegrateOptions tight() {
  IntegrateOptions options;
  options.rel_tol = 1e-12;
  options.abs_tol = 1e-14;
  return options;
}

}  // namespace

TEST_CASE("uncoupled decay matches the closed form to 1e-9 relative") {
  SystemParams params;
  params.omega_bar_b = hz_to_rad(40.0);
  params.omega_bar_s = hz_to_rad(37.0);
  params.coupling = 0.0;
  params.k_selftrap = 0.2;  // frequency shift must not affect the decay law
  params.tau_b = 5.0;
  params.tau_s = 9.0;

  TwoLevelState initial{0.0, {1.0, 0.0}, {0.6, 0.0}};
  const Trajectory traj =
      integrate(params, initial, Schedule{}, 8.0, tight());

  for (const auto& s : traj.samples()) {
    const double nb_expect = initial.n_b() * std::exp(-2.0 * s.t / params.tau_b);
    const double ns_expect = initial.n_s() * std::exp(-2.0 * s.t / params.tau_s);
    CHECK(std::abs(s.n_b() - nb_expect) <= 1e-9 * nb_expect);
    CHECK(std::abs(s.n_s() - ns_expect) <= 1e-9 * ns_expect);
  }
}

TEST_CASE("resonant rabi transfer matches sin^2 to 1e-6") {
  SystemParams params;
  params.omega_bar_b = hz_to_rad(5.0);
  params.omega_bar_s = hz_to_rad(5.0);
  params.coupling = two_pi;  // full transfer at t = pi / (2 coupling) = 0.25 s

  TwoLevelState initial{0.0, {1.0, 0.0}, {0.0, 0.0}};
  IntegrateOptions options = tight();
  options.rel_tol = 1e-11;
  const Trajectory traj = integrate(params, initial, Schedule{}, 2.0, options);

  for (const auto& s : traj.samples()) {
    const double expect = std::sin(params.coupling * s.t);
    CHECK(std::abs(s.n_s() - expect * expect) < 1e-6);
  }
  // full transfer instant
  const double t_full = 0.25;
  size_t idx = size_t(t_full * traj.sample_rate() + 0.5);
  CHECK(traj.samples()[idx].n_s() == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("norm is conserved to 1e-9 over 10 s with decay off") {
  SystemParams params;
  params.omega_bar_b = hz_to_rad(50.0);
  params.omega_bar_s = hz_to_rad(48.0);
  params.coupling = hz_to_rad(2.0);
  params.k_selftrap = 0.3;

  TwoLevelState initial{0.0, {0.8, 0.0}, {0.5, 0.3}};
  const Trajectory traj = integrate(params, initial, Schedule{}, 10.0, tight());

  CHECK(traj.stats().max_norm_drift < 1e-9);
  const double n0 = initial.n_total();
  for (const auto& s : traj.samples())
    CHECK(std::abs((s.n_b() + s.n_s()) / n0 - 1.0) < 1e-9);
}

TEST_CASE("forward-backward evolution returns the initial state to 1e-7") {
  SystemParams params;
  params.omega_bar_b = hz_to_rad(30.0);
  params.omega_bar_s = hz_to_rad(28.0);
  params.coupling = hz_to_rad(0.7);

  TwoLevelState initial{0.0, {0.9, 0.1}, {0.3, -0.2}};
  IntegrateOptions options = tight();
  options.rel_tol = 1e-11;
  const Trajectory fwd = integrate(params, initial, Schedule{}, 2.0, options);
  const TwoLevelState end = fwd.state_at(fwd.samples().size() - 1);

  // with a real symmetric generator, the reversed evolution is
  // conjugate -> evolve forward -> conjugate
  TwoLevelState mirrored{0.0, std::conj(end.psi_b), std::conj(end.psi_s)};
  const Trajectory bwd = integrate(params, mirrored, Schedule{}, 2.0, options);
  const TwoLevelState back = bwd.state_at(bwd.samples().size() - 1);

  CHECK(std::abs(std::conj(back.psi_b) - initial.psi_b) < 1e-7);
  CHECK(std::abs(std::conj(back.psi_s) - initial.psi_s) < 1e-7);
}

TEST_CASE("halving tolerances moves the answer less than the error budget") {
  SystemParams params;
  params.omega_bar_b = hz_to_rad(60.0);
  params.omega_bar_s = hz_to_rad(55.0);
  params.coupling = hz_to_rad(1.5);
  params.k_selftrap = 0.15;
  params.tau_b = 12.0;
  params.tau_s = 20.0;
  TwoLevelState initial{0.0, {1.0, 0.0}, {0.2, 0.2}};

  IntegrateOptions coarse;
  coarse.rel_tol = 1e-8;
  coarse.abs_tol = 1e-10;
  IntegrateOptions fine;
  fine.rel_tol = 0.5e-8;
  fine.abs_tol = 0.5e-10;

  const Trajectory a = integrate(params, initial, Schedule{}, 4.0, coarse);
  const Trajectory b = integrate(params, initial, Schedule{}, 4.0, fine);
  const double nb_a = a.samples().back().n_b();
  const double nb_b = b.samples().back().n_b();
  const double budget =
      2.0 * std::sqrt(initial.n_total()) * a.stats().error_budget;
  CHECK(std::abs(nb_a - nb_b) < budget);
}

TEST_CASE("programmed linear sweep reproduces the landau-zener fraction") {
  const double coupling = two_pi;                       // 1 Hz
  const double alpha = two_pi * coupling * coupling / 0.5;  // exponent 0.5
  const double span = std::max({30.0 * coupling, 12.0 * std::sqrt(alpha),
                                std::cbrt(1000.0 * coupling * alpha)});
  const double t_total = 2.0 * span / alpha;

  SystemParams params;
  params.coupling = coupling;
  const Schedule sweep =
      Schedule::linear_sweep(alpha, 0.5 * t_total, 0.0, t_total);

  const double d0 = sweep.detuning_at(0.0);
  TwoLevelState initial = eigenstate(0.5 * d0, -0.5 * d0, coupling, 0, 1.0);
  IntegrateOptions options;
  options.rel_tol = 1e-10;
  options.abs_tol = 1e-12;
  const Trajectory traj = integrate(params, initial, sweep, t_total, options);

  const auto& last = traj.samples().back();
  const auto split = branch_populations({last.t, last.psi_b, last.psi_s},
                                        last.omega_b, last.omega_s, coupling);
  const double observed = split.excited / (split.ground + split.excited);
  CHECK(observed == doctest::Approx(std::exp(-0.5)).epsilon(0.02));
}

TEST_CASE("crossing detection on a programmed sweep") {
  const double alpha = 300.0;
  const Schedule sweep = Schedule::linear_sweep(alpha, 1.0, 0.0, 2.0);
  SystemParams params;
  params.coupling = hz_to_rad(0.8);
  TwoLevelState initial{0.0, {1.0, 0.0}, {0.0, 0.0}};
  const Trajectory traj = integrate(params, initial, sweep, 2.0);

  const CrossingInfo info = detect_crossing(traj);
  REQUIRE(info.found);
  CHECK(info.t_cross == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(info.rate == doctest::Approx(alpha).epsilon(1e-3));

  const GapInfo gap = min_dressed_gap(traj);
  CHECK(gap.gap == doctest::Approx(2.0 * params.coupling).epsilon(0.01));
  CHECK(gap.t_gap == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("no crossing cases") {
  Schedule flat;
  flat.mode = Schedule::Mode::programmed;
  flat.detuning = {{0.0, 5.0}, {1.0, 5.0}};
  SystemParams params;
  params.coupling = 1.0;
  TwoLevelState initial{0.0, {1.0, 0.0}, {0.5, 0.0}};
  const Trajectory traj = integrate(params, initial, flat, 1.0);

  CHECK_FALSE(detect_crossing(traj).found);
  CHECK_THROWS_AS(min_dressed_gap(traj), NoCrossingError);
}

TEST_CASE("zero coupling leaves a zero gap at the crossing") {
  const Schedule sweep = Schedule::linear_sweep(100.0, 0.5, 0.0, 1.0);
  SystemParams params;
  TwoLevelState initial{0.0, {1.0, 0.0}, {0.0, 0.0}};
  const Trajectory traj = integrate(params, initial, sweep, 1.0);
  const GapInfo gap = min_dressed_gap(traj);
  CHECK(gap.gap < 0.5);  // interpolated minimum of |detuning|
  CHECK(gap.t_gap == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("sample grid is uniform and strictly increasing") {
  SystemParams params;
  params.omega_bar_b = hz_to_rad(10.0);
  params.omega_bar_s = hz_to_rad(9.0);
  params.coupling = hz_to_rad(0.5);
  TwoLevelState initial{0.0, {1.0, 0.0}, {0.0, 0.0}};
  IntegrateOptions options;
  options.sample_rate = 100.0;
  const Trajectory traj = integrate(params, initial, Schedule{}, 1.5, options);

  CHECK(traj.samples().size() == 151);
  for (size_t i = 1; i < traj.samples().size(); ++i)
    CHECK(traj.samples()[i].t > traj.samples()[i - 1].t);
  CHECK(traj.sample_rate() == doctest::Approx(100.0));
}

TEST_CASE("input validation") {
  SystemParams params;
  TwoLevelState initial{0.0, {1.0, 0.0}, {0.0, 0.0}};
  CHECK_THROWS_AS(integrate(params, initial, Schedule{}, 0.0),
                  std::invalid_argument);
  IntegrateOptions options;
  options.rel_tol = 0.5;  // above the allowed ceiling
  CHECK_THROWS_AS(integrate(params, initial, Schedule{}, 1.0, options),
                  std::invalid_argument);

  Schedule bad;
  bad.mode = Schedule::Mode::programmed;
  bad.detuning = {{0.0, 1.0}};
  CHECK_THROWS_AS(integrate(params, initial, bad, 1.0), std::invalid_argument);

  Schedule bad_table;
  bad_table.bulk_freq_table = {{0.0, 1.0}, {1.0, 2.0}};  // increasing
  CHECK_THROWS_AS(integrate(params, initial, bad_table, 1.0),
                  std::invalid_argument);
}

TEST_CASE("tabulated bulk frequency overrides the power law") {
  SystemParams params;
  params.omega_bar_b = hz_to_rad(100.0);  // ignored by the table
  params.omega_bar_s = hz_to_rad(20.0);
  params.coupling = 0.0;
  Schedule schedule;
  schedule.bulk_freq_table = {{0.0, hz_to_rad(50.0)}, {2.0, hz_to_rad(30.0)}};

  TwoLevelState initial{0.0, {1.0, 0.0}, {0.0, 0.0}};
  const Trajectory traj = integrate(params, initial, schedule, 0.5);
  // n_b = 1 -> halfway down the table
  CHECK(traj.samples().front().omega_b == doctest::Approx(hz_to_rad(40.0)));
}

TEST_CASE("trajectory csv export") {
  SystemParams params;
  params.omega_bar_b = hz_to_rad(10.0);
  params.omega_bar_s = hz_to_rad(8.0);
  params.coupling = hz_to_rad(1.0);
  TwoLevelState initial{0.0, {1.0, 0.0}, {0.0, 0.0}};
  IntegrateOptions options;
  options.sample_rate = 50.0;
  const Trajectory traj = integrate(params, initial, Schedule{}, 1.0, options);

  const auto path = std::filesystem::temp_directory_path() / "md_traj_test.csv";
  traj.write_csv(path.string());
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header ==
        "t,re_psi_b,im_psi_b,re_psi_s,im_psi_s,n_b,n_s,omega_b_hz,omega_s_hz,"
        "dressed_lo_hz,dressed_hi_hz");
  size_t rows = 0;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  CHECK(rows == traj.samples().size());
  std::filesystem::remove(path);
}

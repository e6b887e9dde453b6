#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "core/physics.hpp"

using namespace mduet;

namespace {

SystemParams base_params() {
  SystemParams params;
  params.omega_bar_b = hz_to_rad(200.0);
  params.omega_bar_s = hz_to_rad(100.0);
  params.coupling = hz_to_rad(1.0);
  params.k_selftrap = 0.1;
  return params;
}

}  // namespace

TEST_CASE("bulk frequency follows the self-trapping power law") {
  SystemParams params = base_params();
  CHECK(bulk_frequency(params, 0.0) == doctest::Approx(params.omega_bar_b));
  params.k_selftrap = 0.0;
  CHECK(bulk_frequency(params, 3.7) == doctest::Approx(params.omega_bar_b));

  params = base_params();
  // direct high-precision evaluation: 2*pi*200*(1 - 0.1*1^(5/7)) = 2*pi*180
  CHECK(bulk_frequency(params, 1.0) == doctest::Approx(hz_to_rad(180.0)).epsilon(1e-13));
  CHECK_THROWS_AS(bulk_frequency(params, -1e-9), std::domain_error);
}

TEST_CASE("bulk frequency is non-increasing in population") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> ks(0.0, 0.5);
  std::uniform_real_distribution<double> ps(0.1, 0.9);
  std::uniform_real_distribution<double> ns(0.0, 3.0);
  for (int trial = 0; trial < 300; ++trial) {
    SystemParams params = base_params();
    params.k_selftrap = ks(rng);
    params.p_exponent = ps(rng);
    double a = ns(rng), b = ns(rng);
    if (a > b) std::swap(a, b);
    CHECK(bulk_frequency(params, a) >= bulk_frequency(params, b) - 1e-12);
  }
}

TEST_CASE("surface frequency reduces to a constant without coefficients") {
  SystemParams params = base_params();
  CHECK(surface_frequency(params, 2.0, 0.4) == doctest::Approx(params.omega_bar_s));
  CHECK(surface_frequency(params, 0.0, 0.0) == doctest::Approx(params.omega_bar_s));

  params.omega_bar_s = hz_to_rad(100.0);
  params.surface_coeff_b = 0.05;
  // 2*pi*100*(1 - 0.05) = 2*pi*95
  CHECK(surface_frequency(params, 1.0, 0.0) ==
        doctest::Approx(hz_to_rad(95.0)).epsilon(1e-13));
  CHECK_THROWS_AS(surface_frequency(params, -0.1, 0.0), std::domain_error);
}

TEST_CASE("dressed frequencies") {
  const auto resonant = dressed_frequencies(5.0, 5.0, 2.0);
  CHECK(resonant.lower == doctest::Approx(3.0));
  CHECK(resonant.upper == doctest::Approx(7.0));
  CHECK(resonant.gap() == doctest::Approx(4.0));

  const auto uncoupled = dressed_frequencies(3.0, 9.0, 0.0);
  CHECK(uncoupled.lower == doctest::Approx(3.0));
  CHECK(uncoupled.upper == doctest::Approx(9.0));

  const auto closed = dressed_frequencies(2.0, 0.0, std::sqrt(3.0));
  CHECK(closed.lower == doctest::Approx(-1.0));
  CHECK(closed.upper == doctest::Approx(3.0));
}

TEST_CASE("dressed gap is at least 2 coupling, equal only on resonance") {
  std::mt19937 rng(13);
  std::uniform_real_distribution<double> ws(-100.0, 100.0);
  std::uniform_real_distribution<double> cs(0.0, 20.0);
  for (int trial = 0; trial < 500; ++trial) {
    const double wb = ws(rng), wsur = ws(rng), c = cs(rng);
    const double gap = dressed_frequencies(wb, wsur, c).gap();
    CHECK(gap >= 2.0 * c - 1e-9);
    if (wb != wsur && c > 0.0) CHECK(gap > 2.0 * c);
    CHECK(rabi_frequency(wb, wsur, c) == doctest::Approx(gap).epsilon(1e-12));
  }
}

TEST_CASE("rabi frequency limits") {
  CHECK(rabi_frequency(7.0, 7.0, 1.5) == doctest::Approx(3.0));
  CHECK(rabi_frequency(9.0, 4.0, 0.0) == doctest::Approx(5.0));
  CHECK(rabi_frequency(3.0, 0.0, 2.0) == doctest::Approx(5.0));  // 3-4-5
}

TEST_CASE("josephson oscillation amplitude") {
  CHECK(josephson_amplitude(0.0, 1.0, 1.0, 2.0, 1.0) == doctest::Approx(0.0));
  CHECK(josephson_amplitude(1.0, 1.0, 0.0, 2.0, 1.0) == doctest::Approx(0.0));
  CHECK(josephson_amplitude(1.0, 4.0, 4.0, 3.0, 1.0) == doctest::Approx(2.0));
  CHECK_THROWS_AS(josephson_amplitude(1.0, 1.0, 1.0, 2.0, 2.0),
                  std::domain_error);
  CHECK_THROWS_AS(josephson_amplitude(1.0, -1.0, 1.0, 2.0, 1.0),
                  std::domain_error);
}

TEST_CASE("fm sideband amplitudes") {
  CHECK(fm_sideband_amplitude(0.0, 1.0, 0, 2.5) == doctest::Approx(2.5));
  CHECK(fm_sideband_amplitude(0.0, 1.0, 1, 2.5) == doctest::Approx(0.0));
  // modulation index 1: J0 = 0.76519..., J1 = 0.44005...
  CHECK(fm_sideband_amplitude(3.0, 3.0, 0, 1.0) ==
        doctest::Approx(0.7651976865579666).epsilon(1e-10));
  CHECK(fm_sideband_amplitude(3.0, 3.0, 1, 1.0) ==
        doctest::Approx(0.4400505857449335).epsilon(1e-10));
  CHECK(fm_sideband_amplitude(2.0, 1.6, -1, 1.0) ==
        doctest::Approx(fm_sideband_amplitude(2.0, 1.6, 1, 1.0)));
  CHECK_THROWS_AS(fm_sideband_amplitude(1.0, 0.0, 1, 1.0), std::domain_error);
}

TEST_CASE("landau-zener transfer fraction") {
  CHECK(lz_transfer_fraction(0.0, 5.0) == doctest::Approx(1.0));
  CHECK(lz_transfer_fraction(1.0, two_pi / std::log(2.0)) ==
        doctest::Approx(0.5).epsilon(1e-12));
  CHECK(lz_transfer_fraction(3.0, 0.0) == doctest::Approx(0.0));

  // rate reproducing a 65% transfer at coupling 2*pi*1.4 rad/s, recovered by
  // inverting the formula
  const double coupling = hz_to_rad(1.4);
  const double rate = two_pi * coupling * coupling / -std::log(0.65);
  CHECK(rate == doctest::Approx(1128.6).epsilon(1e-3));
  CHECK(lz_transfer_fraction(coupling, rate) == doctest::Approx(0.65).epsilon(1e-12));
}

TEST_CASE("transfer fraction monotonicity") {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> cs(0.1, 5.0);
  std::uniform_real_distribution<double> rs(0.5, 500.0);
  for (int trial = 0; trial < 300; ++trial) {
    const double c = cs(rng), r = rs(rng);
    CHECK(lz_transfer_fraction(c, r * 1.1) > lz_transfer_fraction(c, r));
    CHECK(lz_transfer_fraction(c * 1.1, r) < lz_transfer_fraction(c, r));
  }
}

TEST_CASE("bloch coordinates") {
  TwoLevelState pole{0.0, {2.0, 0.0}, {0.0, 0.0}};
  const BlochPoint top = bloch_coordinates(pole);
  CHECK(top.n_total == doctest::Approx(4.0));
  CHECK(top.theta == doctest::Approx(0.0));
  CHECK(top.phi == doctest::Approx(0.0));

  // equal populations, bulk leads by pi/2
  TwoLevelState equator{0.0, std::polar(1.0, 0.5 * 3.14159265358979323846),
                        {1.0, 0.0}};
  const BlochPoint eq = bloch_coordinates(equator);
  CHECK(eq.theta == doctest::Approx(0.5 * 3.14159265358979323846));
  CHECK(eq.phi == doctest::Approx(0.5 * 3.14159265358979323846));

  CHECK_THROWS_AS(bloch_coordinates(TwoLevelState{}), std::domain_error);
}

TEST_CASE("bloch round trip is the identity off the poles") {
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> thetas(0.05, 3.09);
  std::uniform_real_distribution<double> phis(0.0, two_pi * 0.999);
  std::uniform_real_distribution<double> pops(0.1, 10.0);
  for (int trial = 0; trial < 300; ++trial) {
    BlochPoint point{pops(rng), thetas(rng), phis(rng)};
    const BlochPoint back = bloch_coordinates(state_from_bloch(point));
    CHECK(back.n_total == doctest::Approx(point.n_total).epsilon(1e-12));
    CHECK(back.theta == doctest::Approx(point.theta).epsilon(1e-12));
    CHECK(back.phi == doctest::Approx(point.phi).epsilon(1e-12));

    // n_total preserved exactly by construction
    const TwoLevelState state = state_from_bloch(point);
    CHECK(state.n_total() == doctest::Approx(point.n_total).epsilon(1e-14));
  }
}

TEST_CASE("branch populations split the state along the dressed basis") {
  // far-detuned: bulk is the excited branch when omega_b > omega_s
  TwoLevelState state{0.0, {1.0, 0.0}, {0.0, 0.0}};
  auto split = branch_populations(state, 100.0, 0.0, 1e-6);
  CHECK(split.excited == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(split.ground == doctest::Approx(0.0).epsilon(1e-6));

  split = branch_populations(state, -100.0, 0.0, 1e-6);
  CHECK(split.ground == doctest::Approx(1.0).epsilon(1e-6));

  // eigenstates project onto their own branch only
  for (int branch : {0, 1}) {
    const TwoLevelState eig = eigenstate(3.0, -2.0, 1.7, branch, 2.5);
    const auto s = branch_populations(eig, 3.0, -2.0, 1.7);
    CHECK((branch == 0 ? s.ground : s.excited) == doctest::Approx(2.5));
    CHECK((branch == 0 ? s.excited : s.ground) == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("parameter validation names the offending field") {
  SystemParams params = base_params();
  params.coupling = -1.0;
  CHECK_THROWS_WITH_AS(params.validate(),
                       "coupling: must be >= 0 and finite",
                       std::invalid_argument);
  params = base_params();
  params.p_exponent = 1.0;
  CHECK_THROWS_AS(params.validate(), std::invalid_argument);
  params = base_params();
  params.tau_b = 0.0;
  CHECK_THROWS_AS(params.validate(), std::invalid_argument);
  params = base_params();
  params.tau_b = inf;  // infinite lifetime is allowed
  CHECK_NOTHROW(params.validate());
}

#include "scenario.hpp"

#include <cmath>
#include <limits>
#include <set>

#include "util.hpp"

namespace cli {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& message) {
  throw ScenarioError(message);
}

void check_keys(const json& obj, const std::string& path,
                const std::set<std::string>& allowed) {
  for (const auto& [key, value] : obj.items())
    if (!allowed.count(key))
      fail("unknown key: " + (path.empty() ? key : path + "." + key));
}

double get_number(const json& obj, const std::string& path,
                  const std::string& key, std::optional<double> fallback = {}) {
  if (!obj.contains(key)) {
    if (fallback) return *fallback;
    fail("missing key: " + path + "." + key);
  }
  const auto& v = obj.at(key);
  if (!v.is_number()) fail(path + "." + key + ": must be a number");
  return v.get<double>();
}

// decay constants accept a number or the string "inf"
double get_tau(const json& obj, const std::string& path,
               const std::string& key) {
  if (!obj.contains(key)) return std::numeric_limits<double>::infinity();
  const auto& v = obj.at(key);
  if (v.is_string()) {
    if (v.get<std::string>() == "inf")
      return std::numeric_limits<double>::infinity();
    fail(path + "." + key + ": must be a positive number or \"inf\"");
  }
  if (!v.is_number()) fail(path + "." + key + ": must be a number or \"inf\"");
  return v.get<double>();
}

std::vector<std::pair<double, double>> get_pairs(const json& obj,
                                                 const std::string& path,
                                                 const std::string& key) {
  std::vector<std::pair<double, double>> out;
  const auto& arr = obj.at(key);
  if (!arr.is_array()) fail(path + "." + key + ": must be an array of pairs");
  for (const auto& row : arr) {
    if (!row.is_array() || row.size() != 2 || !row[0].is_number() ||
        !row[1].is_number())
      fail(path + "." + key + ": each entry must be [number, number]");
    out.emplace_back(row[0].get<double>(), row[1].get<double>());
  }
  return out;
}

void require(bool ok, const std::string& message) {
  if (!ok) fail(message);
}

}  // namespace

Scenario parse_scenario(const json& doc) {
  if (!doc.is_object()) fail("scenario: document must be a JSON object");
  check_keys(doc, "",
             {"name", "params", "initial", "t_end_s", "sample_rate_hz",
              "noise_rms", "seed", "spectrogram", "analysis", "schedule",
              "integrator"});

  Scenario s;
  s.raw = doc;
  if (doc.contains("name")) {
    if (!doc.at("name").is_string()) fail("name: must be a string");
    s.name = doc.at("name").get<std::string>();
  }

  require(doc.contains("params"), "missing key: params");
  const json& p = doc.at("params");
  check_keys(p, "params",
             {"omega_bar_b_hz", "omega_bar_s_hz", "coupling_hz", "k_selftrap",
              "p_exponent", "surface_coeff_b", "surface_coeff_s", "tau_b_s",
              "tau_s_s", "fill_b", "fill_s", "omega_larmor_hz",
              "coupling_nb_slope"});
  md_params_init(&s.params);
  s.params.omega_bar_b = k_two_pi * get_number(p, "params", "omega_bar_b_hz");
  s.params.omega_bar_s = k_two_pi * get_number(p, "params", "omega_bar_s_hz");
  s.params.coupling = k_two_pi * get_number(p, "params", "coupling_hz");
  s.params.k_selftrap = get_number(p, "params", "k_selftrap", 0.0);
  s.params.p_exponent = get_number(p, "params", "p_exponent", 5.0 / 7.0);
  s.params.surface_coeff_b = get_number(p, "params", "surface_coeff_b", 0.0);
  s.params.surface_coeff_s = get_number(p, "params", "surface_coeff_s", 0.0);
  s.params.tau_b = get_tau(p, "params", "tau_b_s");
  s.params.tau_s = get_tau(p, "params", "tau_s_s");
  s.params.fill_b = get_number(p, "params", "fill_b", 1.0);
  s.params.fill_s = get_number(p, "params", "fill_s", 1.0);
  s.params.omega_larmor =
      k_two_pi * get_number(p, "params", "omega_larmor_hz", 0.0);
  s.params.coupling_nb_slope = get_number(p, "params", "coupling_nb_slope", 0.0);
  if (md_params_validate(&s.params) != MD_OK)
    fail(std::string("params.") + md_last_error());

  require(doc.contains("initial"), "missing key: initial");
  const json& init = doc.at("initial");
  check_keys(init, "initial", {"n_b0", "n_s0", "phi0_rad"});
  s.n_b0 = get_number(init, "initial", "n_b0");
  s.n_s0 = get_number(init, "initial", "n_s0");
  s.phi0_rad = get_number(init, "initial", "phi0_rad", 0.0);
  require(s.n_b0 >= 0.0, "initial.n_b0: must be >= 0");
  require(s.n_s0 >= 0.0, "initial.n_s0: must be >= 0");

  s.t_end_s = get_number(doc, "", "t_end_s");
  require(s.t_end_s > 0.0, "t_end_s: must be > 0");
  s.sample_rate_hz = get_number(doc, "", "sample_rate_hz");
  require(s.sample_rate_hz > 0.0, "sample_rate_hz: must be > 0");
  s.noise_rms = get_number(doc, "", "noise_rms", 0.0);
  require(s.noise_rms >= 0.0, "noise_rms: must be >= 0");
  if (doc.contains("seed")) {
    const auto& v = doc.at("seed");
    if (!v.is_number_unsigned()) fail("seed: must be a non-negative integer");
    s.seed = v.get<uint64_t>();
  }

  if (doc.contains("spectrogram")) {
    const json& sp = doc.at("spectrogram");
    check_keys(sp, "spectrogram", {"window_s", "hop_s", "window"});
    s.spectrogram.window_s = get_number(sp, "spectrogram", "window_s", 0.5);
    s.spectrogram.hop_s = get_number(sp, "spectrogram", "hop_s", 0.05);
    if (sp.contains("window")) {
      const std::string kind = sp.at("window").is_string()
                                   ? sp.at("window").get<std::string>()
                                   : "";
      if (kind == "hann")
        s.spectrogram.window_kind = MD_WINDOW_HANN;
      else if (kind == "gauss")
        s.spectrogram.window_kind = MD_WINDOW_GAUSS;
      else
        fail("spectrogram.window: must be \"hann\" or \"gauss\"");
    }
    require(s.spectrogram.window_s > 0.0, "spectrogram.window_s: must be > 0");
    require(s.spectrogram.hop_s > 0.0 &&
                s.spectrogram.hop_s <= s.spectrogram.window_s,
            "spectrogram.hop_s: must be in (0, window_s]");
  }

  if (doc.contains("analysis")) {
    const json& an = doc.at("analysis");
    check_keys(an, "analysis",
               {"min_amp", "max_hop_hz", "sideband_tol", "min_overlap_frac",
                "deriv_bandwidth_frac"});
    s.analysis.min_amp = get_number(an, "analysis", "min_amp", 0.0);
    s.analysis.max_hop_hz = get_number(an, "analysis", "max_hop_hz", 0.0);
    s.analysis.sideband_tol = get_number(an, "analysis", "sideband_tol", 0.15);
    s.analysis.min_overlap_frac =
        get_number(an, "analysis", "min_overlap_frac", 0.70);
    s.analysis.deriv_bandwidth_frac =
        get_number(an, "analysis", "deriv_bandwidth_frac", 0.5);
  }

  if (doc.contains("integrator")) {
    const json& integ = doc.at("integrator");
    check_keys(integ, "integrator", {"rel_tol", "abs_tol", "sample_rate_hz"});
    s.rel_tol = get_number(integ, "integrator", "rel_tol", 1e-10);
    s.abs_tol = get_number(integ, "integrator", "abs_tol", 1e-12);
    s.traj_sample_rate_hz =
        get_number(integ, "integrator", "sample_rate_hz", 0.0);
    require(s.rel_tol > 0.0 && s.rel_tol <= 1e-2,
            "integrator.rel_tol: must be in (0, 1e-2]");
    require(s.abs_tol > 0.0 && s.abs_tol <= 1e-2,
            "integrator.abs_tol: must be in (0, 1e-2]");
  }

  if (doc.contains("schedule")) {
    const json& sch = doc.at("schedule");
    check_keys(sch, "schedule",
               {"mode", "center_hz", "detuning_points_hz",
                "sweep_rate_hz_per_s", "sweep_t_cross_s", "bulk_freq_table"});
    std::string mode = "physical";
    if (sch.contains("mode")) {
      if (!sch.at("mode").is_string())
        fail("schedule.mode: must be \"physical\" or \"programmed\"");
      mode = sch.at("mode").get<std::string>();
    }
    if (mode == "programmed") {
      s.schedule.programmed = true;
      s.schedule.center_hz = get_number(sch, "schedule", "center_hz", 0.0);
      const bool has_points = sch.contains("detuning_points_hz");
      const bool has_sweep = sch.contains("sweep_rate_hz_per_s");
      if (has_points == has_sweep)
        fail("schedule: programmed mode needs exactly one of "
             "detuning_points_hz or sweep_rate_hz_per_s");
      if (has_points) {
        s.schedule.detuning_points_hz =
            get_pairs(sch, "schedule", "detuning_points_hz");
        require(s.schedule.detuning_points_hz.size() >= 2,
                "schedule.detuning_points_hz: need at least two points");
      } else {
        s.schedule.sweep_rate_hz_per_s =
            get_number(sch, "schedule", "sweep_rate_hz_per_s");
        s.schedule.sweep_t_cross_s =
            get_number(sch, "schedule", "sweep_t_cross_s");
      }
    } else if (mode == "physical") {
      if (sch.contains("bulk_freq_table"))
        s.schedule.bulk_table_hz = get_pairs(sch, "schedule", "bulk_freq_table");
      if (sch.contains("center_hz") || sch.contains("detuning_points_hz") ||
          sch.contains("sweep_rate_hz_per_s") ||
          sch.contains("sweep_t_cross_s"))
        fail("schedule: programmed-mode keys given in physical mode");
    } else {
      fail("schedule.mode: must be \"physical\" or \"programmed\"");
    }
  }

  // keep run sizes sane before any compute starts
  const double worst_rate =
      std::max(s.sample_rate_hz, s.traj_sample_rate_hz);
  require(s.t_end_s * worst_rate <= 5e7,
          "t_end_s * sample_rate_hz: run too large (over 5e7 samples)");
  return s;
}

Scenario load_scenario(const std::string& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const IoFailure& e) {
    throw ScenarioError(e.what());
  } catch (const json::exception& e) {
    throw ScenarioError("scenario " + path + ": " + e.what());
  }
  return parse_scenario(doc);
}

void initial_state(const Scenario& scenario, double* re_b, double* im_b,
                   double* re_s, double* im_s) {
  *re_b = std::sqrt(scenario.n_b0);
  *im_b = 0.0;
  *re_s = std::sqrt(scenario.n_s0) * std::cos(-scenario.phi0_rad);
  *im_s = std::sqrt(scenario.n_s0) * std::sin(-scenario.phi0_rad);
}

md_schedule* make_schedule(const Scenario& scenario) {
  const auto& sch = scenario.schedule;
  if (!sch.programmed) {
    md_schedule* handle = md_schedule_new_physical();
    if (handle && !sch.bulk_table_hz.empty()) {
      std::vector<double> n, w;
      for (const auto& [nb, hz] : sch.bulk_table_hz) {
        n.push_back(nb);
        w.push_back(k_two_pi * hz);
      }
      if (md_schedule_set_bulk_table(handle, n.data(), w.data(), n.size()) !=
          MD_OK) {
        md_schedule_free(handle);
        throw ScenarioError(std::string("schedule.bulk_freq_table: ") +
                            md_last_error());
      }
    }
    return handle;
  }

  std::vector<double> times, detuning;
  if (sch.sweep_rate_hz_per_s) {
    const double rate = k_two_pi * *sch.sweep_rate_hz_per_s;
    times = {0.0, scenario.t_end_s};
    detuning = {rate * (0.0 - sch.sweep_t_cross_s),
                rate * (scenario.t_end_s - sch.sweep_t_cross_s)};
  } else {
    for (const auto& [t, hz] : sch.detuning_points_hz) {
      times.push_back(t);
      detuning.push_back(k_two_pi * hz);
    }
  }
  md_schedule* handle = md_schedule_new_programmed(
      times.data(), detuning.data(), times.size(), k_two_pi * sch.center_hz);
  if (!handle)
    throw ScenarioError(std::string("schedule: ") + md_last_error());
  return handle;
}

}  // namespace cli

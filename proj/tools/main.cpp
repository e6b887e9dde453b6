// magnonduet command line: scenario-driven simulation and analysis runs.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "magnonduet.h"
#include "pipeline.hpp"
#include "scenario.hpp"
#include "util.hpp"

namespace {

using cli::format_double;
using cli::k_two_pi;
using nlohmann::json;

int max_threads_cap() {
  int cap = int(std::max(1u, std::thread::hardware_concurrency()));
  if (const char* env = std::getenv("MAGNON_DUET_THREADS")) {
    const int parsed = std::atoi(env);
    if (parsed >= 1) cap = std::min(cap, parsed);
  }
  return cap;
}

int cmd_simulate(const std::string& scenario_path, const std::string& out_dir) {
  cli::Scenario scenario;
  try {
    scenario = cli::load_scenario(scenario_path);
  } catch (const cli::ScenarioError& e) {
    std::fprintf(stderr, "invalid scenario: %s\n", e.what());
    return cli::kExitInvalidScenario;
  }
  const cli::RunResult result = cli::run_simulation(scenario, out_dir);
  if (result.exit_code != cli::kExitOk) {
    std::fprintf(stderr, "error: %s\n", result.error.c_str());
    return result.exit_code;
  }
  std::printf("wrote %s\n", out_dir.c_str());
  if (result.crossing_found)
    std::printf("crossing at t = %.4g s, predicted transfer %.3f, "
                "observed %.3f\n",
                result.crossing_time_s, result.predicted, result.observed);
  return cli::kExitOk;
}

// ---------------------------------------------------------------- lz-validate

struct LzPoint {
  double coupling_hz;
  double rate_hz_per_s;
  double predicted = 0.0;
  double observed = 0.0;
  double abs_err = 0.0;
  bool ok = false;
};

int cmd_lz_validate(const std::string& grid_path, const std::string& out_dir) {
  json doc;
  double rel_tol = 1e-10, abs_tol = 1e-12, span_scale = 1.0, max_err = 0.02;
  std::vector<double> couplings, rates;
  try {
    doc = json::parse(cli::read_file(grid_path));
    for (const auto& [key, value] : doc.items()) {
      if (key != "coupling_hz" && key != "sweep_rate_hz_per_s" &&
          key != "rel_tol" && key != "abs_tol" && key != "span_scale" &&
          key != "max_abs_err")
        throw cli::ScenarioError("unknown key: " + key);
    }
    couplings = doc.at("coupling_hz").get<std::vector<double>>();
    rates = doc.at("sweep_rate_hz_per_s").get<std::vector<double>>();
    rel_tol = doc.value("rel_tol", 1e-10);
    abs_tol = doc.value("abs_tol", 1e-12);
    span_scale = doc.value("span_scale", 1.0);
    max_err = doc.value("max_abs_err", 0.02);
    if (couplings.empty() || rates.empty())
      throw cli::ScenarioError("coupling_hz and sweep_rate_hz_per_s must be "
                               "non-empty arrays");
    for (double c : couplings)
      if (!(c >= 0.0)) throw cli::ScenarioError("coupling_hz: must be >= 0");
    for (double r : rates)
      if (!(r > 0.0))
        throw cli::ScenarioError("sweep_rate_hz_per_s: must be > 0");
  } catch (const std::exception& e) {
    std::fprintf(stderr, "invalid grid: %s\n", e.what());
    return cli::kExitInvalidScenario;
  }

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    std::fprintf(stderr, "cannot create %s\n", out_dir.c_str());
    return cli::kExitIoFailure;
  }

  std::vector<LzPoint> points;
  for (double c : couplings)
    for (double r : rates) points.push_back({c, r});

  for (auto& point : points) {
    const double coupling = k_two_pi * point.coupling_hz;
    const double alpha = k_two_pi * point.rate_hz_per_s;
    double predicted = 0.0;
    if (md_lz_transfer_fraction(coupling, alpha, &predicted) != MD_OK) {
      std::fprintf(stderr, "error: %s\n", md_last_error());
      return cli::kExitInvalidScenario;
    }
    point.predicted = predicted;

    // sweep wide enough that the asymptotic transfer has settled
    const double span =
        span_scale * std::max({30.0 * coupling, 12.0 * std::sqrt(alpha),
                               std::cbrt(1000.0 * std::max(coupling, 1e-6) *
                                         alpha)});
    const double t_total = 2.0 * span / alpha;
    const double times[2] = {0.0, t_total};
    const double detuning[2] = {-span, span};
    md_schedule* sweep = md_schedule_new_programmed(times, detuning, 2, 0.0);
    if (!sweep) {
      std::fprintf(stderr, "error: %s\n", md_last_error());
      return cli::kExitInvalidScenario;
    }

    md_params params;
    md_params_init(&params);
    params.coupling = coupling;

    double re_b, im_b, re_s, im_s;
    md_eigenstate(-0.5 * span, 0.5 * span, coupling, 0, 1.0, &re_b, &im_b,
                  &re_s, &im_s);

    md_trajectory* traj = nullptr;
    const md_status status =
        md_integrate(&params, 0.0, re_b, im_b, re_s, im_s, sweep, t_total,
                     rel_tol, abs_tol, 0.0, &traj);
    md_schedule_free(sweep);
    if (status != MD_OK) {
      std::fprintf(stderr, "error: %s\n", md_last_error());
      return status == MD_ERR_INTEGRATION ? cli::kExitIntegrationFailure
                                          : cli::kExitInvalidScenario;
    }
    double ground = 0.0, excited = 0.0;
    md_branch_populations(traj, md_trajectory_size(traj) - 1, &ground,
                          &excited);
    md_trajectory_free(traj);
    point.observed = excited / (ground + excited);
    point.abs_err = std::abs(point.observed - point.predicted);
    point.ok = point.abs_err <= max_err;
  }

  std::string csv = "omega_hz,rate_hz_per_s,predicted,observed,abs_err\n";
  double worst = 0.0;
  for (const auto& point : points) {
    csv += format_double(point.coupling_hz);
    csv += ',';
    csv += format_double(point.rate_hz_per_s);
    csv += ',';
    csv += format_double(point.predicted);
    csv += ',';
    csv += format_double(point.observed);
    csv += ',';
    csv += format_double(point.abs_err);
    csv += '\n';
    worst = std::max(worst, point.abs_err);
  }
  try {
    cli::write_file((std::filesystem::path(out_dir) / "lz_grid.csv").string(),
                    csv);
  } catch (const cli::IoFailure& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return cli::kExitIoFailure;
  }

  const bool all_ok =
      std::all_of(points.begin(), points.end(),
                  [](const LzPoint& p) { return p.ok; });
  std::printf("%zu points, max |err| = %.4f (limit %.3g)\n", points.size(),
              worst, max_err);
  return all_ok ? cli::kExitOk : cli::kExitLzValidation;
}

// ---------------------------------------------------------------------- sweep

struct SweepAxis {
  std::string path;
  std::string leaf;
  std::vector<json> values;
};

void apply_path(json& root, const std::string& dotted, const json& value) {
  json* node = &root;
  size_t start = 0;
  std::vector<std::string> parts;
  while (true) {
    const size_t dot = dotted.find('.', start);
    parts.push_back(dotted.substr(start, dot - start));
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  for (size_t i = 0; i + 1 < parts.size(); ++i) {
    if (!node->contains(parts[i]))
      throw cli::ScenarioError("axes.path not found in scenario: " + dotted);
    node = &(*node)[parts[i]];
  }
  if (!node->contains(parts.back()))
    throw cli::ScenarioError("axes.path not found in scenario: " + dotted);
  (*node)[parts.back()] = value;
}

std::string value_slug(const json& value) {
  std::string s = value.dump();
  std::erase_if(s, [](char c) { return c == '"' || c == ' '; });
  for (char& c : s)
    if (c == '/' || c == '\\') c = '_';
  return s;
}

int cmd_sweep(const std::string& spec_path, const std::string& out_dir,
              int workers_flag) {
  json base_scenario;
  std::vector<SweepAxis> axes;
  int workers = workers_flag;
  try {
    const json doc = json::parse(cli::read_file(spec_path));
    for (const auto& [key, value] : doc.items())
      if (key != "scenario" && key != "scenario_file" && key != "axes" &&
          key != "workers")
        throw cli::ScenarioError("unknown key: " + key);
    if (doc.contains("scenario") == doc.contains("scenario_file"))
      throw cli::ScenarioError(
          "sweep needs exactly one of scenario or scenario_file");
    if (doc.contains("scenario"))
      base_scenario = doc.at("scenario");
    else {
      const auto file = doc.at("scenario_file").get<std::string>();
      const auto resolved =
          std::filesystem::path(spec_path).parent_path() / file;
      base_scenario = json::parse(cli::read_file(resolved.string()));
    }
    if (!doc.contains("axes") || !doc.at("axes").is_array() ||
        doc.at("axes").empty())
      throw cli::ScenarioError("axes: must be a non-empty array");
    if (doc.at("axes").size() > 3)
      throw cli::ScenarioError("axes: at most 3 axes supported");
    for (const auto& axis : doc.at("axes")) {
      SweepAxis a;
      a.path = axis.at("path").get<std::string>();
      a.leaf = a.path.substr(a.path.find_last_of('.') + 1);
      for (const auto& v : axis.at("values")) a.values.push_back(v);
      if (a.values.empty())
        throw cli::ScenarioError("axes.values: must be non-empty");
      axes.push_back(a);
    }
    if (workers <= 0) workers = doc.value("workers", 1);
    // validate the base scenario and every axis path before any run
    cli::parse_scenario(base_scenario);
    for (const auto& a : axes) {
      json probe = base_scenario;
      apply_path(probe, a.path, a.values.front());
      cli::parse_scenario(probe);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "invalid sweep spec: %s\n", e.what());
    return cli::kExitInvalidScenario;
  }

  size_t total = 1;
  for (const auto& a : axes) total *= a.values.size();
  workers = std::clamp(workers, 1, max_threads_cap());
  std::printf("sweep: %zu points, %d workers\n", total, workers);

  struct Point {
    std::string dir_name;
    json scenario_doc;
    cli::RunResult result;
    std::vector<std::string> axis_values;
  };
  std::vector<Point> points(total);
  for (size_t index = 0; index < total; ++index) {
    size_t rem = index;
    json doc = base_scenario;
    std::string name;
    Point& point = points[index];
    for (const auto& a : axes) {
      const json& value = a.values[rem % a.values.size()];
      rem /= a.values.size();
      apply_path(doc, a.path, value);
      if (!name.empty()) name += "__";
      name += a.leaf + "=" + value_slug(value);
      point.axis_values.push_back(value.dump());
    }
    point.dir_name = name;
    point.scenario_doc = std::move(doc);
  }

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    std::fprintf(stderr, "cannot create %s\n", out_dir.c_str());
    return cli::kExitIoFailure;
  }

  std::atomic<size_t> next{0};
  const auto worker = [&] {
    while (true) {
      const size_t index = next.fetch_add(1);
      if (index >= points.size()) return;
      Point& point = points[index];
      try {
        const cli::Scenario scenario = cli::parse_scenario(point.scenario_doc);
        point.result = cli::run_simulation(
            scenario,
            (std::filesystem::path(out_dir) / point.dir_name).string());
      } catch (const std::exception& e) {
        point.result.exit_code = cli::kExitInvalidScenario;
        point.result.error = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& thread : pool) thread.join();

  std::string csv =
      "point,";
  for (const auto& a : axes) csv += a.leaf + ",";
  csv += "status,predicted_fraction,observed_fraction,crossing_time_s,"
         "crossing_rate_rad_s2,coupling_fit_hz,decay_only_rate_rad_s2\n";
  size_t succeeded = 0;
  for (const auto& point : points) {
    csv += point.dir_name + ",";
    for (const auto& v : point.axis_values) csv += v + ",";
    if (point.result.exit_code == cli::kExitOk) {
      ++succeeded;
      csv += "ok,";
    } else {
      csv += "error:" + std::to_string(point.result.exit_code) + ",";
    }
    const cli::Scenario scenario = cli::parse_scenario(point.scenario_doc);
    csv += format_double(point.result.predicted) + "," +
           format_double(point.result.observed) + "," +
           format_double(point.result.crossing_time_s) + "," +
           format_double(point.result.crossing_rate) + "," +
           format_double(scenario.params.coupling / k_two_pi) + "," +
           format_double(point.result.decay_only_rate) + "\n";
  }
  try {
    cli::write_file((std::filesystem::path(out_dir) / "summary.csv").string(),
                    csv);
  } catch (const cli::IoFailure& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return cli::kExitIoFailure;
  }
  std::printf("%zu/%zu points succeeded\n", succeeded, points.size());
  return succeeded > 0 ? cli::kExitOk : cli::kExitSweepAllFailed;
}

int cmd_analyze(const std::string& signal_path, const std::string& scenario_path,
                const std::string& out_dir) {
  cli::Scenario scenario;
  try {
    scenario = cli::load_scenario(scenario_path);
  } catch (const cli::ScenarioError& e) {
    std::fprintf(stderr, "invalid scenario: %s\n", e.what());
    return cli::kExitInvalidScenario;
  }
  return cli::run_analyze(signal_path, scenario, out_dir);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"magnonduet: coupled nonlinear two-level oscillator toolkit"};
  app.require_subcommand(1);

  std::string scenario_path, grid_path, sweep_path, signal_path, out_dir;
  int workers = 0;

  auto* simulate = app.add_subcommand(
      "simulate", "run a scenario and write all artifacts");
  simulate->add_option("scenario", scenario_path, "scenario JSON file")
      ->required();
  simulate->add_option("--out", out_dir, "output directory")->required();

  auto* lz = app.add_subcommand(
      "lz-validate", "check programmed sweeps against the transfer formula");
  lz->add_option("grid", grid_path, "grid JSON file")->required();
  lz->add_option("--out", out_dir, "output directory")->required();

  auto* sweep = app.add_subcommand("sweep", "run a parameter grid");
  sweep->add_option("spec", sweep_path, "sweep spec JSON file")->required();
  sweep->add_option("--out", out_dir, "output directory")->required();
  sweep->add_option("--workers", workers, "concurrent workers");

  auto* analyze = app.add_subcommand(
      "analyze", "spectral analysis of an existing signal CSV");
  analyze->add_option("signal", signal_path, "signal CSV file")->required();
  analyze->add_option("--scenario", scenario_path, "scenario JSON file")
      ->required();
  analyze->add_option("--out", out_dir, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  if (simulate->parsed()) return cmd_simulate(scenario_path, out_dir);
  if (lz->parsed()) return cmd_lz_validate(grid_path, out_dir);
  if (sweep->parsed()) return cmd_sweep(sweep_path, out_dir, workers);
  if (analyze->parsed())
    return cmd_analyze(signal_path, scenario_path, out_dir);
  return 0;
}

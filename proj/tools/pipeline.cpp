#include "pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <memory>
#include <vector>

#include <json.hpp>

#include "svgplot.hpp"
#include "util.hpp"

namespace cli {

namespace {

using nlohmann::json;

constexpr double nan_v = std::numeric_limits<double>::quiet_NaN();

struct ScheduleDeleter {
  void operator()(md_schedule* p) const { md_schedule_free(p); }
};
struct TrajectoryDeleter {
  void operator()(md_trajectory* p) const { md_trajectory_free(p); }
};
struct SignalDeleter {
  void operator()(md_signal* p) const { md_signal_free(p); }
};
struct SpectrogramDeleter {
  void operator()(md_spectrogram* p) const { md_spectrogram_free(p); }
};
struct RidgeSetDeleter {
  void operator()(md_ridge_set* p) const { md_ridge_set_free(p); }
};

using SchedulePtr = std::unique_ptr<md_schedule, ScheduleDeleter>;
using TrajectoryPtr = std::unique_ptr<md_trajectory, TrajectoryDeleter>;
using SignalPtr = std::unique_ptr<md_signal, SignalDeleter>;
using SpectrogramPtr = std::unique_ptr<md_spectrogram, SpectrogramDeleter>;
using RidgeSetPtr = std::unique_ptr<md_ridge_set, RidgeSetDeleter>;

class PipelineFailure : public std::runtime_error {
 public:
  PipelineFailure(int code, const std::string& what)
      : std::runtime_error(what), exit_code(code) {}
  int exit_code;
};

void check(md_status status, const std::string& stage) {
  if (status == MD_OK) return;
  const std::string message = stage + ": " + md_last_error();
  switch (status) {
    case MD_ERR_INTEGRATION:
      throw PipelineFailure(kExitIntegrationFailure, message);
    case MD_ERR_IO:
      throw PipelineFailure(kExitIoFailure, message);
    case MD_ERR_NO_CROSSING:
      throw PipelineFailure(kExitIntegrationFailure, message);
    default:
      throw PipelineFailure(kExitInvalidScenario, message);
  }
}

json number_or_null(double value) {
  if (std::isnan(value)) return nullptr;
  return value;
}

struct RidgeData {
  std::vector<double> t, freq, amp;
  int label = MD_RIDGE_UNKNOWN;
  double integrated = 0.0;
};

std::vector<RidgeData> fetch_ridges(const md_ridge_set* set) {
  std::vector<RidgeData> out(md_ridge_set_size(set));
  for (size_t i = 0; i < out.size(); ++i) {
    const size_t n = md_ridge_size(set, i);
    out[i].t.resize(n);
    out[i].freq.resize(n);
    out[i].amp.resize(n);
    md_ridge_copy(set, i, out[i].t.data(), out[i].freq.data(),
                  out[i].amp.data(), n);
    out[i].label = md_ridge_label(set, i);
    for (double a : out[i].amp) out[i].integrated += a;
  }
  return out;
}

const RidgeData* find_label(const std::vector<RidgeData>& ridges, int label) {
  const RidgeData* best = nullptr;
  for (const auto& r : ridges)
    if (r.label == label && (!best || r.integrated > best->integrated))
      best = &r;
  return best;
}

double interp(const std::vector<double>& xs, const std::vector<double>& ys,
              double x) {
  if (xs.empty()) return nan_v;
  if (x <= xs.front()) return ys.front();
  if (x >= xs.back()) return ys.back();
  size_t hi = 1;
  while (xs[hi] < x) ++hi;
  const double w = (x - xs[hi - 1]) / (xs[hi] - xs[hi - 1]);
  return ys[hi - 1] + w * (ys[hi] - ys[hi - 1]);
}

// first index of the decaying tail on which the 5-point-smoothed squared
// amplitude is monotone (counter-trend steps below 2% of the tail range are
// tolerated, matching the derivative's own acceptance)
size_t monotone_suffix_start(const std::vector<double>& amp) {
  const size_t n = amp.size();
  if (n < 3) return 0;
  std::vector<double> xs(n);
  for (size_t i = 0; i < n; ++i) {
    const size_t lo = i >= 2 ? i - 2 : 0;
    const size_t hi = std::min(i + 2, n - 1);
    double sum = 0.0;
    for (size_t j = lo; j <= hi; ++j) sum += amp[j] * amp[j];
    xs[i] = sum / double(hi - lo + 1);
  }
  const size_t peak =
      size_t(std::max_element(xs.begin(), xs.end()) - xs.begin());
  if (peak + 3 >= n) return 0;  // no decaying tail; leave as is
  const double slack = 0.02 * (xs[peak] - xs.back());
  size_t start = peak;
  for (size_t i = n - 1; i > peak; --i)
    if (xs[i] - xs[i - 1] > slack) {
      start = i;
      break;
    }
  return start;
}

// crossing-time estimate from the ridge geometry alone (used when no
// trajectory is available): minimum separation of the two main traces
double ridge_crossing_estimate(const RidgeData& bulk, const RidgeData& surf) {
  double best_t = nan_v;
  double best_sep = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < bulk.t.size(); ++i) {
    const double t = bulk.t[i];
    if (t < surf.t.front() || t > surf.t.back()) continue;
    const double sep = std::abs(bulk.freq[i] - interp(surf.t, surf.freq, t));
    if (sep < best_sep) {
      best_sep = sep;
      best_t = t;
    }
  }
  return best_t;
}

struct AnalysisOutputs {
  bool sideband_found = false;
  double extracted_coupling_hz = nan_v;
  double t_cross_used = nan_v;
  std::vector<double> est_t, est_omega_hz;
  std::vector<int> est_valid;
  std::vector<RidgeData> ridges;
};

// spectral products: spectrogram.csv, ridges.csv, coupling.csv + extraction
AnalysisOutputs spectral_analysis(const md_signal* signal,
                                  const Scenario& scenario,
                                  const std::filesystem::path& out_dir,
                                  double t_cross_hint,
                                  std::vector<PlotSeries>* ridge_overlays,
                                  SpectrogramPtr* spec_out) {
  {
    md_spectrogram* raw = nullptr;
    check(md_spectrogram_compute(signal, scenario.spectrogram.window_s,
                                 scenario.spectrogram.hop_s,
                                 scenario.spectrogram.window_kind, &raw),
          "spectrogram");
    spec_out->reset(raw);
  }
  const SpectrogramPtr& spec = *spec_out;
  check(md_spectrogram_write_csv(spec.get(),
                                 (out_dir / "spectrogram.csv").c_str()),
        "spectrogram.csv");

  size_t nt = 0, nf = 0;
  md_spectrogram_dims(spec.get(), &nt, &nf);

  double min_amp = scenario.analysis.min_amp;
  if (min_amp <= 0.0) {
    std::vector<double> mags(nt * nf);
    md_spectrogram_copy_magnitudes(spec.get(), mags.data(), mags.size());
    std::vector<double> probe = mags;
    const size_t mid = probe.size() / 2;
    std::nth_element(probe.begin(), probe.begin() + mid, probe.end());
    const double median = probe[mid];
    const double peak = *std::max_element(mags.begin(), mags.end());
    min_amp = std::max(8.0 * median, 0.004 * peak);
    if (!(min_amp > 0.0)) min_amp = 1e-12;
  }
  double max_hop = scenario.analysis.max_hop_hz;
  if (max_hop <= 0.0) max_hop = 3.0 * md_spectrogram_bin_spacing_hz(spec.get());

  RidgeSetPtr ridges;
  {
    md_ridge_set* raw = nullptr;
    check(md_track_ridges(spec.get(), min_amp, max_hop, &raw), "track_ridges");
    ridges.reset(raw);
  }
  int warning = 0;
  check(md_classify_sidebands(ridges.get(), scenario.analysis.sideband_tol,
                              scenario.analysis.min_overlap_frac, &warning),
        "classify_sidebands");
  check(md_ridge_set_write_csv(ridges.get(), (out_dir / "ridges.csv").c_str()),
        "ridges.csv");

  AnalysisOutputs out;
  out.ridges = fetch_ridges(ridges.get());
  const auto& data = out.ridges;
  if (ridge_overlays) {
    for (const auto& r : data) {
      const char* color = r.label == MD_RIDGE_MAIN_BULK      ? "#ff5050"
                          : r.label == MD_RIDGE_MAIN_SURFACE ? "#70c0ff"
                          : r.label == MD_RIDGE_UNKNOWN      ? "#ffffff"
                                                             : "#ffd040";
      ridge_overlays->push_back({"", color, r.t, r.freq});
    }
  }

  const RidgeData* bulk = find_label(data, MD_RIDGE_MAIN_BULK);
  const RidgeData* surf = find_label(data, MD_RIDGE_MAIN_SURFACE);
  const RidgeData* side = find_label(data, MD_RIDGE_SIDEBAND_UPPER);
  if (!side) side = find_label(data, MD_RIDGE_SIDEBAND_LOWER);
  out.sideband_found = side != nullptr;

  if (!bulk || !surf || !side) return out;

  double t_cross = t_cross_hint;
  if (std::isnan(t_cross)) t_cross = ridge_crossing_estimate(*bulk, *surf);
  if (std::isnan(t_cross)) return out;
  out.t_cross_used = t_cross;

  // the bulk trace carries strong population-oscillation wiggle near the
  // avoided crossing; differentiate only its monotone tail
  const size_t start = monotone_suffix_start(bulk->amp);
  const size_t n_bulk = bulk->t.size() - start;
  if (n_bulk < 10) return out;
  std::vector<double> dt(n_bulk), dv(n_bulk);
  size_t n_deriv = 0;
  if (md_selftrap_derivative(bulk->t.data() + start, bulk->freq.data() + start,
                             bulk->amp.data() + start, n_bulk,
                             scenario.analysis.deriv_bandwidth_frac, dt.data(),
                             dv.data(), &n_deriv) != MD_OK)
    return out;  // non-monotone track: extraction is not defined here

  const size_t cap = side->t.size();
  if (cap == 0) return out;
  out.est_t.resize(cap);
  out.est_omega_hz.resize(cap);
  out.est_valid.resize(cap);
  std::vector<double> omega_rad(cap);
  size_t count = 0;
  double extrapolated = 0.0;
  int ok = 0;
  if (md_extract_coupling(ridges.get(), dt.data(), dv.data(), n_deriv, t_cross,
                          out.est_t.data(), omega_rad.data(),
                          out.est_valid.data(), cap, &count, &extrapolated,
                          &ok) != MD_OK)
    return out;
  out.est_t.resize(count);
  out.est_omega_hz.resize(count);
  out.est_valid.resize(count);
  for (size_t i = 0; i < count; ++i)
    out.est_omega_hz[i] = omega_rad[i] / k_two_pi;
  if (ok) out.extracted_coupling_hz = extrapolated / k_two_pi;
  return out;
}

void write_coupling_csv(const std::filesystem::path& path,
                        const AnalysisOutputs& analysis) {
  std::string csv = "t,omega_hz\n";
  for (size_t i = 0; i < analysis.est_t.size(); ++i) {
    if (!analysis.est_valid[i]) continue;
    csv += format_double(analysis.est_t[i]);
    csv += ',';
    csv += format_double(analysis.est_omega_hz[i]);
    csv += '\n';
  }
  write_file(path.string(), csv);
}

}  // namespace

RunResult run_simulation(const Scenario& scenario, const std::string& out) {
  RunResult result;
  const std::filesystem::path out_dir(out);
  try {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec)
      throw PipelineFailure(kExitIoFailure,
                            "cannot create " + out_dir.string());

    SchedulePtr schedule(make_schedule(scenario));
    if (!schedule)
      throw PipelineFailure(kExitInvalidScenario, md_last_error());

    double re_b, im_b, re_s, im_s;
    initial_state(scenario, &re_b, &im_b, &re_s, &im_s);

    TrajectoryPtr traj;
    {
      md_trajectory* raw = nullptr;
      check(md_integrate(&scenario.params, 0.0, re_b, im_b, re_s, im_s,
                         schedule.get(), scenario.t_end_s, scenario.rel_tol,
                         scenario.abs_tol, scenario.traj_sample_rate_hz, &raw),
            "integrate");
      traj.reset(raw);
    }
    check(md_trajectory_write_csv(traj.get(),
                                  (out_dir / "trajectory.csv").c_str()),
          "trajectory.csv");

    SignalPtr signal;
    {
      md_signal* raw = nullptr;
      check(md_synthesize(traj.get(), &scenario.params,
                          scenario.sample_rate_hz, scenario.noise_rms,
                          scenario.seed, &raw),
            "synthesize");
      signal.reset(raw);
    }
    check(md_signal_write_csv(signal.get(), (out_dir / "signal.csv").c_str()),
          "signal.csv");
    check(md_signal_write_binary(signal.get(),
                                 (out_dir / "signal.bin").c_str()),
          "signal.bin");

    double t_cross = 0.0, rate = 0.0;
    int found = 0;
    check(md_trajectory_crossing(traj.get(), &t_cross, &rate, &found),
          "crossing");
    result.crossing_found = found != 0;

    md_lz_report report{};
    if (found && md_lz_report_compute(traj.get(), &report) == MD_OK) {
      result.predicted = report.predicted_fraction;
      result.observed = report.observed_fraction;
      result.crossing_time_s = report.crossing_time_s;
      result.crossing_rate = report.crossing_rate_rad_s2;
      result.decay_only_rate = report.decay_only_rate_rad_s2;
      result.rate_ratio = report.rate_ratio;
      result.min_gap_hz = report.min_gap_rad / k_two_pi;
      result.min_gap_time_s = report.min_gap_time_s;
    } else if (found) {
      result.crossing_time_s = t_cross;
      result.crossing_rate = rate;
    }

    std::vector<PlotSeries> overlays;
    SpectrogramPtr spec;
    const AnalysisOutputs analysis = spectral_analysis(
        signal.get(), scenario, out_dir,
        result.crossing_found ? result.crossing_time_s : nan_v, &overlays,
        &spec);
    result.sideband_found = analysis.sideband_found;
    result.extracted_coupling_hz = analysis.extracted_coupling_hz;
    write_coupling_csv(out_dir / "coupling.csv", analysis);

    // report.json
    json report_doc;
    report_doc["predicted_fraction"] = number_or_null(result.predicted);
    report_doc["observed_fraction"] = number_or_null(result.observed);
    report_doc["crossing_time_s"] = number_or_null(result.crossing_time_s);
    report_doc["crossing_rate_rad_s2"] = number_or_null(result.crossing_rate);
    report_doc["coupling_fit_hz"] = scenario.params.coupling / k_two_pi;
    report_doc["decay_only_rate_rad_s2"] =
        number_or_null(result.decay_only_rate);
    report_doc["rate_ratio"] = number_or_null(result.rate_ratio);
    report_doc["crossing_found"] = result.crossing_found;
    report_doc["min_gap_hz"] = number_or_null(result.min_gap_hz);
    report_doc["min_gap_time_s"] = number_or_null(result.min_gap_time_s);
    report_doc["sideband_found"] = result.sideband_found;
    report_doc["extracted_coupling_hz"] =
        number_or_null(result.extracted_coupling_hz);
    write_file((out_dir / "report.json").string(), report_doc.dump(2) + "\n");

    // run metadata
    json meta;
    meta["name"] = scenario.name;
    meta["version"] = md_version();
    meta["seed"] = scenario.seed;
    meta["scenario"] = scenario.raw;
    meta["outputs"] = {"trajectory.csv", "signal.csv",  "signal.bin",
                       "spectrogram.csv", "ridges.csv", "coupling.csv",
                       "report.json",     "populations.svg",
                       "frequencies.svg", "spectrogram.svg"};
    write_file((out_dir / "metadata.json").string(), meta.dump(2) + "\n");

    // plots
    const size_t n = md_trajectory_size(traj.get());
    std::vector<double> ts(n), nb(n), ns(n), wb(n), ws(n), lo(n), hi(n);
    md_trajectory_copy(traj.get(), MD_TRAJ_T, ts.data(), n);
    md_trajectory_copy(traj.get(), MD_TRAJ_N_B, nb.data(), n);
    md_trajectory_copy(traj.get(), MD_TRAJ_N_S, ns.data(), n);
    md_trajectory_copy(traj.get(), MD_TRAJ_OMEGA_B_RAD, wb.data(), n);
    md_trajectory_copy(traj.get(), MD_TRAJ_OMEGA_S_RAD, ws.data(), n);
    md_trajectory_copy(traj.get(), MD_TRAJ_DRESSED_LO_RAD, lo.data(), n);
    md_trajectory_copy(traj.get(), MD_TRAJ_DRESSED_HI_RAD, hi.data(), n);
    for (size_t i = 0; i < n; ++i) {
      wb[i] /= k_two_pi;
      ws[i] /= k_two_pi;
      lo[i] /= k_two_pi;
      hi[i] /= k_two_pi;
    }
    write_line_chart((out_dir / "populations.svg").string(),
                     "Level populations", "t (s)", "population",
                     {{"bulk", "#d62728", ts, nb},
                      {"surface", "#1f77b4", ts, ns}});
    write_line_chart((out_dir / "frequencies.svg").string(),
                     "Undressed and dressed frequencies", "t (s)", "f (Hz)",
                     {{"bulk", "#d62728", ts, wb},
                      {"surface", "#1f77b4", ts, ws},
                      {"dressed lower", "#999999", ts, lo},
                      {"dressed upper", "#444444", ts, hi}});

    size_t nt = 0, nf = 0;
    md_spectrogram_dims(spec.get(), &nt, &nf);
    std::vector<double> times(nt), freqs(nf), mags(nt * nf);
    md_spectrogram_copy_times(spec.get(), times.data(), nt);
    md_spectrogram_copy_freqs(spec.get(), freqs.data(), nf);
    md_spectrogram_copy_magnitudes(spec.get(), mags.data(), mags.size());
    write_heatmap((out_dir / "spectrogram.svg").string(),
                  "Windowed Fourier magnitude", "t (s)", "f (Hz)", times,
                  freqs, mags, overlays);
  } catch (const PipelineFailure& e) {
    result.exit_code = e.exit_code;
    result.error = e.what();
  } catch (const IoFailure& e) {
    result.exit_code = kExitIoFailure;
    result.error = e.what();
  } catch (const std::exception& e) {
    result.exit_code = kExitInvalidScenario;
    result.error = e.what();
  }
  return result;
}

int run_analyze(const std::string& signal_path, const Scenario& scenario,
                const std::string& out) {
  const std::filesystem::path out_dir(out);
  try {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec)
      throw PipelineFailure(kExitIoFailure, "cannot create " + out_dir.string());

    SignalPtr signal;
    {
      md_signal* raw = nullptr;
      check(md_signal_read_csv(signal_path.c_str(), &raw), "signal");
      signal.reset(raw);
    }

    std::vector<PlotSeries> overlays;
    SpectrogramPtr spec;
    const AnalysisOutputs analysis = spectral_analysis(
        signal.get(), scenario, out_dir, nan_v, &overlays, &spec);
    write_coupling_csv(out_dir / "coupling.csv", analysis);

    // relaxation fits of the main traces
    json relax = json::object();
    for (const auto& [key, label] :
         {std::pair{"bulk", MD_RIDGE_MAIN_BULK},
          std::pair{"surface", MD_RIDGE_MAIN_SURFACE}}) {
      const RidgeData* trace = find_label(analysis.ridges, label);
      if (!trace || trace->t.size() < 8) continue;
      md_relax_segment segments[2];
      size_t n_segments = 0;
      double kink = nan_v;
      if (md_fit_relaxation(trace->t.data(), trace->amp.data(),
                            trace->t.size(), segments, &n_segments,
                            &kink) != MD_OK)
        continue;
      json fit;
      fit["kink_time_s"] = number_or_null(kink);
      fit["segments"] = json::array();
      for (size_t i = 0; i < n_segments; ++i) {
        json seg;
        seg["t_start"] = segments[i].t_start;
        seg["t_end"] = segments[i].t_end;
        seg["tau_s"] =
            std::isinf(segments[i].tau) ? json(nullptr) : json(segments[i].tau);
        seg["amplitude0"] = segments[i].amplitude0;
        seg["residual_rms"] = segments[i].residual_rms;
        fit["segments"].push_back(seg);
      }
      relax[key] = fit;
    }

    json doc;
    doc["signal"] = signal_path;
    doc["sideband_found"] = analysis.sideband_found;
    doc["extracted_coupling_hz"] =
        number_or_null(analysis.extracted_coupling_hz);
    doc["crossing_time_estimate_s"] = number_or_null(analysis.t_cross_used);
    doc["relaxation"] = relax;
    write_file((out_dir / "analysis.json").string(), doc.dump(2) + "\n");

    size_t nt = 0, nf = 0;
    md_spectrogram_dims(spec.get(), &nt, &nf);
    std::vector<double> times(nt), freqs(nf), mags(nt * nf);
    md_spectrogram_copy_times(spec.get(), times.data(), nt);
    md_spectrogram_copy_freqs(spec.get(), freqs.data(), nf);
    md_spectrogram_copy_magnitudes(spec.get(), mags.data(), mags.size());
    write_heatmap((out_dir / "spectrogram.svg").string(),
                  "Windowed Fourier magnitude", "t (s)", "f (Hz)", times,
                  freqs, mags, overlays);
    return kExitOk;
  } catch (const PipelineFailure& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.exit_code;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIoFailure;
  }
}

}  // namespace cli

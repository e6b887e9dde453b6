// C API of the shared library: thin handle/error-code layer over the core.

#include "magnonduet.h"

#include <cstring>
#include <exception>
#include <string>

#include "core/analysis.hpp"
#include "core/integrator.hpp"
#include "core/io.hpp"
#include "core/physics.hpp"
#include "core/schedule.hpp"
#include "core/signal.hpp"
#include "core/spectral.hpp"

using namespace mduet;

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& message) { g_last_error = message; }

template <typename Fn>
md_status guarded(Fn&& fn) {
  try {
    fn();
    return MD_OK;
  } catch (const IntegrationError& e) {
    set_error(e.what());
    return MD_ERR_INTEGRATION;
  } catch (const NoCrossingError& e) {
    set_error(e.what());
    return MD_ERR_NO_CROSSING;
  } catch (const IoError& e) {
    set_error(e.what());
    return MD_ERR_IO;
  } catch (const std::domain_error& e) {
    set_error(e.what());
    return MD_ERR_DOMAIN;
  } catch (const std::invalid_argument& e) {
    set_error(e.what());
    return MD_ERR_INVALID_ARGUMENT;
  } catch (const std::exception& e) {
    set_error(e.what());
    return MD_ERR_INTERNAL;
  } catch (...) {
    set_error("unknown error");
    return MD_ERR_INTERNAL;
  }
}

md_status require_arg(bool ok, const char* message) {
  if (ok) return MD_OK;
  set_error(message);
  return MD_ERR_INVALID_ARGUMENT;
}

SystemParams to_core(const md_params& p) {
  SystemParams out;
  out.omega_bar_b = p.omega_bar_b;
  out.omega_bar_s = p.omega_bar_s;
  out.coupling = p.coupling;
  out.k_selftrap = p.k_selftrap;
  out.p_exponent = p.p_exponent;
  out.surface_coeff_b = p.surface_coeff_b;
  out.surface_coeff_s = p.surface_coeff_s;
  out.tau_b = p.tau_b;
  out.tau_s = p.tau_s;
  out.fill_b = p.fill_b;
  out.fill_s = p.fill_s;
  out.omega_larmor = p.omega_larmor;
  out.coupling_nb_slope = p.coupling_nb_slope;
  return out;
}

}  // namespace

struct md_schedule {
  Schedule impl;
};
struct md_trajectory {
  Trajectory impl;
};
struct md_signal {
  SignalSeries impl;
};
struct md_spectrogram {
  Spectrogram impl;
};
struct md_ridge_set {
  RidgeSet impl;
};

extern "C" {

const char* md_status_name(md_status status) {
  switch (status) {
    case MD_OK: return "ok";
    case MD_ERR_INVALID_ARGUMENT: return "invalid argument";
    case MD_ERR_DOMAIN: return "domain error";
    case MD_ERR_INTEGRATION: return "integration failure";
    case MD_ERR_NO_CROSSING: return "no crossing";
    case MD_ERR_IO: return "i/o failure";
    default: return "internal error";
  }
}

const char* md_last_error(void) { return g_last_error.c_str(); }

const char* md_version(void) { return "0.1.0"; }

void md_params_init(md_params* params) {
  if (!params) return;
  const SystemParams defaults;
  params->omega_bar_b = defaults.omega_bar_b;
  params->omega_bar_s = defaults.omega_bar_s;
  params->coupling = defaults.coupling;
  params->k_selftrap = defaults.k_selftrap;
  params->p_exponent = defaults.p_exponent;
  params->surface_coeff_b = defaults.surface_coeff_b;
  params->surface_coeff_s = defaults.surface_coeff_s;
  params->tau_b = defaults.tau_b;
  params->tau_s = defaults.tau_s;
  params->fill_b = defaults.fill_b;
  params->fill_s = defaults.fill_s;
  params->omega_larmor = defaults.omega_larmor;
  params->coupling_nb_slope = defaults.coupling_nb_slope;
}

md_status md_params_validate(const md_params* params) {
  if (auto st = require_arg(params, "params is null")) return st;
  return guarded([&] { to_core(*params).validate(); });
}

md_status md_bulk_frequency(const md_params* params, double n_b,
                            double* out_rad) {
  if (auto st = require_arg(params && out_rad, "null argument")) return st;
  return guarded([&] { *out_rad = bulk_frequency(to_core(*params), n_b); });
}

md_status md_surface_frequency(const md_params* params, double n_b, double n_s,
                               double* out_rad) {
  if (auto st = require_arg(params && out_rad, "null argument")) return st;
  return guarded(
      [&] { *out_rad = surface_frequency(to_core(*params), n_b, n_s); });
}

md_status md_dressed_frequencies(double omega_b, double omega_s,
                                 double coupling, double* lower,
                                 double* upper) {
  if (auto st = require_arg(lower && upper, "null argument")) return st;
  return guarded([&] {
    const DressedPair pair = dressed_frequencies(omega_b, omega_s, coupling);
    *lower = pair.lower;
    *upper = pair.upper;
  });
}

md_status md_rabi_frequency(double omega_b, double omega_s, double coupling,
                            double* out_rad) {
  if (auto st = require_arg(out_rad, "null argument")) return st;
  return guarded(
      [&] { *out_rad = rabi_frequency(omega_b, omega_s, coupling); });
}

md_status md_josephson_amplitude(double coupling, double n_b, double n_s,
                                 double omega_b, double omega_s, double* out) {
  if (auto st = require_arg(out, "null argument")) return st;
  return guarded([&] {
    *out = josephson_amplitude(coupling, n_b, n_s, omega_b, omega_s);
  });
}

md_status md_fm_sideband_amplitude(double delta_omega_b, double omega_j,
                                   int order, double carrier_amp,
                                   double* out) {
  if (auto st = require_arg(out, "null argument")) return st;
  return guarded([&] {
    *out = fm_sideband_amplitude(delta_omega_b, omega_j, order, carrier_amp);
  });
}

md_status md_lz_transfer_fraction(double coupling, double crossing_rate,
                                  double* out) {
  if (auto st = require_arg(out, "null argument")) return st;
  return guarded(
      [&] { *out = lz_transfer_fraction(coupling, crossing_rate); });
}

md_status md_bloch_coordinates(double re_b, double im_b, double re_s,
                               double im_s, double* n_total, double* theta,
                               double* phi) {
  if (auto st = require_arg(n_total && theta && phi, "null argument"))
    return st;
  return guarded([&] {
    const BlochPoint point =
        bloch_coordinates({0.0, {re_b, im_b}, {re_s, im_s}});
    *n_total = point.n_total;
    *theta = point.theta;
    *phi = point.phi;
  });
}

md_status md_eigenstate(double omega_b, double omega_s, double coupling,
                        int branch, double n_total, double* re_b, double* im_b,
                        double* re_s, double* im_s) {
  if (auto st = require_arg(re_b && im_b && re_s && im_s, "null argument"))
    return st;
  return guarded([&] {
    const TwoLevelState state =
        eigenstate(omega_b, omega_s, coupling, branch, n_total);
    *re_b = state.psi_b.real();
    *im_b = state.psi_b.imag();
    *re_s = state.psi_s.real();
    *im_s = state.psi_s.imag();
  });
}

md_schedule* md_schedule_new_physical(void) {
  return new (std::nothrow) md_schedule{};
}

md_schedule* md_schedule_new_programmed(const double* times,
                                        const double* detuning_rad,
                                        size_t count, double center_rad) {
  if (!times || !detuning_rad || count < 2) {
    set_error("programmed schedule needs at least two breakpoints");
    return nullptr;
  }
  auto* handle = new (std::nothrow) md_schedule{};
  if (!handle) return nullptr;
  handle->impl.mode = Schedule::Mode::programmed;
  handle->impl.programmed_center = center_rad;
  handle->impl.detuning.reserve(count);
  for (size_t i = 0; i < count; ++i)
    handle->impl.detuning.emplace_back(times[i], detuning_rad[i]);
  if (guarded([&] { handle->impl.validate(); }) != MD_OK) {
    delete handle;
    return nullptr;
  }
  return handle;
}

md_status md_schedule_set_bulk_table(md_schedule* schedule, const double* n_b,
                                     const double* omega_rad, size_t count) {
  if (auto st = require_arg(schedule && n_b && omega_rad, "null argument"))
    return st;
  return guarded([&] {
    Schedule trial = schedule->impl;
    trial.bulk_freq_table.clear();
    trial.bulk_freq_table.reserve(count);
    for (size_t i = 0; i < count; ++i)
      trial.bulk_freq_table.emplace_back(n_b[i], omega_rad[i]);
    trial.validate();
    schedule->impl = std::move(trial);
  });
}

void md_schedule_free(md_schedule* schedule) { delete schedule; }

md_status md_integrate(const md_params* params, double t0, double re_b,
                       double im_b, double re_s, double im_s,
                       const md_schedule* schedule, double t_end,
                       double rel_tol, double abs_tol, double sample_rate_hz,
                       md_trajectory** out) {
  if (auto st = require_arg(params && schedule && out, "null argument"))
    return st;
  return guarded([&] {
    IntegrateOptions options;
    options.rel_tol = rel_tol;
    options.abs_tol = abs_tol;
    options.sample_rate = sample_rate_hz;
    TwoLevelState initial{t0, {re_b, im_b}, {re_s, im_s}};
    *out = new md_trajectory{integrate(to_core(*params), initial,
                                       schedule->impl, t_end, options)};
  });
}

size_t md_trajectory_size(const md_trajectory* traj) {
  return traj ? traj->impl.samples().size() : 0;
}

double md_trajectory_sample_rate(const md_trajectory* traj) {
  return traj ? traj->impl.sample_rate() : 0.0;
}

md_status md_trajectory_copy(const md_trajectory* traj, md_traj_field field,
                             double* buf, size_t buflen) {
  if (auto st = require_arg(traj && buf, "null argument")) return st;
  const auto& samples = traj->impl.samples();
  if (auto st = require_arg(buflen >= samples.size(), "buffer too small"))
    return st;
  for (size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    switch (field) {
      case MD_TRAJ_T: buf[i] = s.t; break;
      case MD_TRAJ_RE_PSI_B: buf[i] = s.psi_b.real(); break;
      case MD_TRAJ_IM_PSI_B: buf[i] = s.psi_b.imag(); break;
      case MD_TRAJ_RE_PSI_S: buf[i] = s.psi_s.real(); break;
      case MD_TRAJ_IM_PSI_S: buf[i] = s.psi_s.imag(); break;
      case MD_TRAJ_N_B: buf[i] = s.n_b(); break;
      case MD_TRAJ_N_S: buf[i] = s.n_s(); break;
      case MD_TRAJ_OMEGA_B_RAD: buf[i] = s.omega_b; break;
      case MD_TRAJ_OMEGA_S_RAD: buf[i] = s.omega_s; break;
      case MD_TRAJ_DRESSED_LO_RAD: buf[i] = s.dressed_lo; break;
      case MD_TRAJ_DRESSED_HI_RAD: buf[i] = s.dressed_hi; break;
      default:
        set_error("unknown trajectory field");
        return MD_ERR_INVALID_ARGUMENT;
    }
  }
  return MD_OK;
}

md_status md_trajectory_write_csv(const md_trajectory* traj,
                                  const char* path) {
  if (auto st = require_arg(traj && path, "null argument")) return st;
  return guarded([&] { traj->impl.write_csv(path); });
}

md_status md_trajectory_crossing(const md_trajectory* traj, double* t_cross,
                                 double* rate_rad_s2, int* found) {
  if (auto st = require_arg(traj && t_cross && rate_rad_s2 && found,
                            "null argument"))
    return st;
  return guarded([&] {
    const CrossingInfo info = detect_crossing(traj->impl);
    *t_cross = info.t_cross;
    *rate_rad_s2 = info.rate;
    *found = info.found ? 1 : 0;
  });
}

md_status md_trajectory_min_gap(const md_trajectory* traj, double* t_gap,
                                double* gap_rad) {
  if (auto st = require_arg(traj && t_gap && gap_rad, "null argument"))
    return st;
  return guarded([&] {
    const GapInfo info = min_dressed_gap(traj->impl);
    *t_gap = info.t_gap;
    *gap_rad = info.gap;
  });
}

md_status md_branch_populations(const md_trajectory* traj, size_t index,
                                double* ground, double* excited) {
  if (auto st = require_arg(traj && ground && excited, "null argument"))
    return st;
  const auto& samples = traj->impl.samples();
  if (auto st = require_arg(index < samples.size(), "sample index out of range"))
    return st;
  return guarded([&] {
    const auto& s = samples[index];
    const auto split = branch_populations(
        {s.t, s.psi_b, s.psi_s}, s.omega_b, s.omega_s,
        traj->impl.params().effective_coupling(s.n_b()));
    *ground = split.ground;
    *excited = split.excited;
  });
}

void md_trajectory_free(md_trajectory* traj) { delete traj; }

md_status md_synthesize(const md_trajectory* traj, const md_params* params,
                        double sample_rate_hz, double noise_rms, uint64_t seed,
                        md_signal** out) {
  if (auto st = require_arg(traj && params && out, "null argument")) return st;
  return guarded([&] {
    *out = new md_signal{synthesize(traj->impl, to_core(*params),
                                    sample_rate_hz, noise_rms, seed)};
  });
}

md_status md_signal_from_samples(double sample_rate_hz, double start_time,
                                 const double* samples, size_t count,
                                 md_signal** out) {
  if (auto st = require_arg(samples && out, "null argument")) return st;
  if (auto st = require_arg(sample_rate_hz > 0.0, "sample rate must be > 0"))
    return st;
  *out = new md_signal{
      {sample_rate_hz, start_time, std::vector<double>(samples, samples + count)}};
  return MD_OK;
}

md_status md_signal_read_csv(const char* path, md_signal** out) {
  if (auto st = require_arg(path && out, "null argument")) return st;
  return guarded([&] { *out = new md_signal{read_signal_csv(path)}; });
}

size_t md_signal_size(const md_signal* sig) {
  return sig ? sig->impl.samples.size() : 0;
}

double md_signal_sample_rate(const md_signal* sig) {
  return sig ? sig->impl.sample_rate : 0.0;
}

double md_signal_start_time(const md_signal* sig) {
  return sig ? sig->impl.start_time : 0.0;
}

md_status md_signal_copy(const md_signal* sig, double* buf, size_t buflen) {
  if (auto st = require_arg(sig && buf, "null argument")) return st;
  if (auto st = require_arg(buflen >= sig->impl.samples.size(),
                            "buffer too small"))
    return st;
  std::memcpy(buf, sig->impl.samples.data(),
              sig->impl.samples.size() * sizeof(double));
  return MD_OK;
}

md_status md_signal_write_csv(const md_signal* sig, const char* path) {
  if (auto st = require_arg(sig && path, "null argument")) return st;
  return guarded([&] { write_signal_csv(sig->impl, path); });
}

md_status md_signal_write_binary(const md_signal* sig, const char* path) {
  if (auto st = require_arg(sig && path, "null argument")) return st;
  return guarded([&] { write_signal_binary(sig->impl, path); });
}

void md_signal_free(md_signal* sig) { delete sig; }

md_status md_spectrogram_compute(const md_signal* sig, double window_s,
                                 double hop_s, int window_kind,
                                 md_spectrogram** out) {
  if (auto st = require_arg(sig && out, "null argument")) return st;
  if (auto st = require_arg(
          window_kind == MD_WINDOW_HANN || window_kind == MD_WINDOW_GAUSS,
          "unknown window kind"))
    return st;
  return guarded([&] {
    *out = new md_spectrogram{spectrogram(
        sig->impl, window_s, hop_s,
        window_kind == MD_WINDOW_HANN ? WindowKind::hann : WindowKind::gauss)};
  });
}

md_status md_spectrogram_dims(const md_spectrogram* spec, size_t* nt,
                              size_t* nf) {
  if (auto st = require_arg(spec && nt && nf, "null argument")) return st;
  *nt = spec->impl.nt();
  *nf = spec->impl.nf();
  return MD_OK;
}

double md_spectrogram_resolution_hz(const md_spectrogram* spec) {
  return spec ? spec->impl.freq_resolution_hz : 0.0;
}

double md_spectrogram_bin_spacing_hz(const md_spectrogram* spec) {
  return spec ? spec->impl.bin_spacing_hz : 0.0;
}

namespace {
md_status copy_vector(const std::vector<double>& src, double* buf,
                      size_t buflen) {
  if (auto st = require_arg(buf, "null argument")) return st;
  if (auto st = require_arg(buflen >= src.size(), "buffer too small"))
    return st;
  std::memcpy(buf, src.data(), src.size() * sizeof(double));
  return MD_OK;
}
}  // namespace

md_status md_spectrogram_copy_times(const md_spectrogram* spec, double* buf,
                                    size_t buflen) {
  if (auto st = require_arg(spec, "null argument")) return st;
  return copy_vector(spec->impl.time_bins, buf, buflen);
}

md_status md_spectrogram_copy_freqs(const md_spectrogram* spec, double* buf,
                                    size_t buflen) {
  if (auto st = require_arg(spec, "null argument")) return st;
  return copy_vector(spec->impl.freq_bins, buf, buflen);
}

md_status md_spectrogram_copy_magnitudes(const md_spectrogram* spec,
                                         double* buf, size_t buflen) {
  if (auto st = require_arg(spec, "null argument")) return st;
  return copy_vector(spec->impl.magnitudes, buf, buflen);
}

md_status md_spectrogram_write_csv(const md_spectrogram* spec,
                                   const char* path) {
  if (auto st = require_arg(spec && path, "null argument")) return st;
  return guarded([&] { spec->impl.write_csv(path); });
}

void md_spectrogram_free(md_spectrogram* spec) { delete spec; }

md_status md_track_ridges(const md_spectrogram* spec, double min_amp,
                          double max_hop_hz, md_ridge_set** out) {
  if (auto st = require_arg(spec && out, "null argument")) return st;
  return guarded([&] {
    *out = new md_ridge_set{track_ridges(spec->impl, min_amp, max_hop_hz)};
  });
}

md_status md_classify_sidebands(md_ridge_set* ridges, double rel_tol,
                                double min_overlap_frac, int* warning) {
  if (auto st = require_arg(ridges, "null argument")) return st;
  return guarded([&] {
    ridges->impl = classify_sidebands(ridges->impl, rel_tol, min_overlap_frac);
    if (warning) *warning = ridges->impl.classification_warning ? 1 : 0;
  });
}

size_t md_ridge_set_size(const md_ridge_set* ridges) {
  return ridges ? ridges->impl.ridges.size() : 0;
}

size_t md_ridge_size(const md_ridge_set* ridges, size_t ridge) {
  if (!ridges || ridge >= ridges->impl.ridges.size()) return 0;
  return ridges->impl.ridges[ridge].points.size();
}

int md_ridge_label(const md_ridge_set* ridges, size_t ridge) {
  if (!ridges || ridge >= ridges->impl.ridges.size()) return MD_RIDGE_UNKNOWN;
  switch (ridges->impl.ridges[ridge].label) {
    case RidgeLabel::main_bulk: return MD_RIDGE_MAIN_BULK;
    case RidgeLabel::main_surface: return MD_RIDGE_MAIN_SURFACE;
    case RidgeLabel::sideband_upper: return MD_RIDGE_SIDEBAND_UPPER;
    case RidgeLabel::sideband_lower: return MD_RIDGE_SIDEBAND_LOWER;
    default: return MD_RIDGE_UNKNOWN;
  }
}

md_status md_ridge_copy(const md_ridge_set* ridges, size_t ridge, double* t,
                        double* freq_hz, double* amp, size_t buflen) {
  if (auto st = require_arg(ridges && t && freq_hz && amp, "null argument"))
    return st;
  if (auto st = require_arg(ridge < ridges->impl.ridges.size(),
                            "ridge index out of range"))
    return st;
  const auto& points = ridges->impl.ridges[ridge].points;
  if (auto st = require_arg(buflen >= points.size(), "buffer too small"))
    return st;
  for (size_t i = 0; i < points.size(); ++i) {
    t[i] = points[i].t;
    freq_hz[i] = points[i].freq_hz;
    amp[i] = points[i].amp;
  }
  return MD_OK;
}

md_status md_ridge_set_write_csv(const md_ridge_set* ridges,
                                 const char* path) {
  if (auto st = require_arg(ridges && path, "null argument")) return st;
  return guarded([&] { ridges->impl.write_csv(path); });
}

void md_ridge_set_free(md_ridge_set* ridges) { delete ridges; }

md_status md_selftrap_derivative(const double* t, const double* freq_hz,
                                 const double* amp, size_t n,
                                 double bandwidth_frac, double* t_out,
                                 double* deriv_out, size_t* count) {
  if (auto st = require_arg(t && freq_hz && amp && t_out && deriv_out && count,
                            "null argument"))
    return st;
  return guarded([&] {
    Ridge ridge;
    ridge.points.resize(n);
    for (size_t i = 0; i < n; ++i) ridge.points[i] = {t[i], freq_hz[i], amp[i]};
    const auto points = selftrap_derivative(ridge, bandwidth_frac);
    for (size_t i = 0; i < points.size(); ++i) {
      t_out[i] = points[i].t;
      deriv_out[i] = points[i].value;
    }
    *count = points.size();
  });
}

md_status md_extract_coupling(const md_ridge_set* ridges,
                              const double* t_deriv, const double* deriv,
                              size_t n_deriv, double t_cross, double* t_out,
                              double* omega_out, int* valid_out, size_t buflen,
                              size_t* count, double* extrapolated_rad,
                              int* extrapolation_ok) {
  if (auto st = require_arg(ridges && t_deriv && deriv && t_out && omega_out &&
                                valid_out && count && extrapolated_rad &&
                                extrapolation_ok,
                            "null argument"))
    return st;
  return guarded([&] {
    std::vector<DerivativePoint> dp(n_deriv);
    for (size_t i = 0; i < n_deriv; ++i) dp[i] = {t_deriv[i], deriv[i]};
    const CouplingSeries series =
        extract_coupling(ridges->impl, dp, t_cross);
    if (buflen < series.estimates.size())
      throw std::invalid_argument("buffer too small");
    for (size_t i = 0; i < series.estimates.size(); ++i) {
      t_out[i] = series.estimates[i].t;
      omega_out[i] = series.estimates[i].omega_est;
      valid_out[i] = series.estimates[i].valid ? 1 : 0;
    }
    *count = series.estimates.size();
    *extrapolated_rad = series.extrapolated;
    *extrapolation_ok = series.extrapolation_ok ? 1 : 0;
  });
}

md_status md_fit_relaxation(const double* t, const double* amp, size_t count,
                            md_relax_segment segments[2], size_t* n_segments,
                            double* kink_time) {
  if (auto st = require_arg(t && amp && segments && n_segments && kink_time,
                            "null argument"))
    return st;
  return guarded([&] {
    const RelaxationFit fit =
        fit_relaxation(std::vector<double>(t, t + count),
                       std::vector<double>(amp, amp + count));
    *n_segments = fit.segments.size();
    for (size_t i = 0; i < fit.segments.size() && i < 2; ++i) {
      const auto& s = fit.segments[i];
      segments[i] = {s.t_start, s.t_end, s.tau, s.amplitude0, s.residual_rms};
    }
    *kink_time = fit.kink_time ? *fit.kink_time
                               : std::numeric_limits<double>::quiet_NaN();
  });
}

md_status md_lz_report_compute(const md_trajectory* traj, md_lz_report* out) {
  if (auto st = require_arg(traj && out, "null argument")) return st;
  return guarded([&] {
    const LzReportData data = lz_report(traj->impl);
    out->predicted_fraction = data.predicted_fraction;
    out->observed_fraction = data.observed_fraction;
    out->crossing_time_s = data.crossing_time;
    out->crossing_rate_rad_s2 = data.crossing_rate;
    out->decay_only_rate_rad_s2 = data.decay_only_rate;
    out->rate_ratio = data.rate_ratio;
    out->min_gap_rad = data.min_gap;
    out->min_gap_time_s = data.min_gap_time;
  });
}

}  // extern "C"

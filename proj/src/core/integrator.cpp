#include "integrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "io.hpp"

namespace mduet {

namespace {

using cplx = std::complex<double>;
constexpr cplx iunit{0.0, 1.0};

// Integration state in the co-rotating frame: psi_b = u exp(-i ph),
// psi_s = v exp(-i ph) with ph the accumulated common phase. Removing the
// common rotation leaves only the slow dynamics to resolve.
struct Vec {
  cplx u{0.0, 0.0};
  cplx v{0.0, 0.0};
  double ph = 0.0;
};

Vec axpy(const Vec& y, double h, const Vec& d) {
  return {y.u + h * d.u, y.v + h * d.v, y.ph + h * d.ph};
}

struct Rhs {
  const SystemParams& params;
  const Schedule& schedule;
  double inv_tau_b;
  double inv_tau_s;

  Vec operator()(double t, const Vec& y) const {
    const double n_b = std::norm(y.u);
    const double n_s = std::norm(y.v);
    const auto freqs =
        instantaneous_frequencies(params, schedule, t, n_b, n_s);
    const double half_det = 0.5 * (freqs.omega_b - freqs.omega_s);
    const double coupling = params.effective_coupling(n_b);
    Vec d;
    d.u = -iunit * (half_det * y.u + coupling * y.v) - inv_tau_b * y.u;
    d.v = -iunit * (-half_det * y.v + coupling * y.u) - inv_tau_s * y.v;
    d.ph = 0.5 * (freqs.omega_b + freqs.omega_s);
    return d;
  }
};

// Dormand-Prince 5(4) coefficients.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                 a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                 a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432.0,
                 d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0,
                 d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0,
                 d7 = 69997945.0 / 29380423.0;

struct DenseSegment {
  double t0 = 0.0, h = 0.0;
  Vec r1, r2, r3, r4, r5;

  Vec eval(double t) const {
    const double th = (t - t0) / h;
    const double th1 = 1.0 - th;
    Vec out;
    out.u = r1.u + th * (r2.u + th1 * (r3.u + th * (r4.u + th1 * r5.u)));
    out.v = r1.v + th * (r2.v + th1 * (r3.v + th * (r4.v + th1 * r5.v)));
    out.ph =
        r1.ph + th * (r2.ph + th1 * (r3.ph + th * (r4.ph + th1 * r5.ph)));
    return out;
  }
};

double component(const Vec& y, int i) {
  switch (i) {
    case 0: return y.u.real();
    case 1: return y.u.imag();
    case 2: return y.v.real();
    case 3: return y.v.imag();
    default: return y.ph;
  }
}

double error_norm(const Vec& y0, const Vec& y1, const Vec& err, double atol,
                  double rtol, double* amp_scale) {
  double sum = 0.0;
  double sc_amp = 0.0;
  for (int i = 0; i < 5; ++i) {
    const double sc =
        atol + rtol * std::max(std::abs(component(y0, i)),
                               std::abs(component(y1, i)));
    const double q = component(err, i) / sc;
    sum += q * q;
    if (i < 4) sc_amp += sc * sc;
  }
  *amp_scale = std::sqrt(sc_amp / 4.0);
  return std::sqrt(sum / 5.0);
}

double rms5(const Vec& y, double atol, double rtol, const Vec& ref) {
  double sum = 0.0;
  for (int i = 0; i < 5; ++i) {
    const double sc = atol + rtol * std::abs(component(ref, i));
    const double q = component(y, i) / sc;
    sum += q * q;
  }
  return std::sqrt(sum / 5.0);
}

double initial_step(const Rhs& rhs, double t0, const Vec& y0, const Vec& f0,
                    double t_end, double atol, double rtol) {
  const double d0 = rms5(y0, atol, rtol, y0);
  const double dy1 = rms5(f0, atol, rtol, y0);
  double h0 = (d0 < 1e-10 || dy1 < 1e-10) ? 1e-6 : 0.01 * d0 / dy1;
  h0 = std::min(h0, t_end - t0);
  const Vec y1 = axpy(y0, h0, f0);
  const Vec f1 = rhs(t0 + h0, y1);
  const Vec df = {f1.u - f0.u, f1.v - f0.v, f1.ph - f0.ph};
  const double d2 = rms5(df, atol, rtol, y0) / h0;
  double h1;
  if (std::max(dy1, d2) <= 1e-15)
    h1 = std::max(1e-6, h0 * 1e-3);
  else
    h1 = std::pow(0.01 / std::max(dy1, d2), 0.2);
  return std::min({100.0 * h0, h1, t_end - t0});
}

TwoLevelState to_state(double t, const Vec& y) {
  const cplx rot = std::exp(-iunit * y.ph);
  return {t, y.u * rot, y.v * rot};
}

}  // namespace

double default_sample_rate(const SystemParams& params,
                           const Schedule& schedule,
                           const TwoLevelState& initial, double t_end) {
  double max_rad = params.effective_coupling(initial.n_total());
  if (schedule.mode == Schedule::Mode::programmed) {
    double det = 0.0;
    for (const auto& [t, d] : schedule.detuning) det = std::max(det, std::abs(d));
    max_rad += std::abs(schedule.programmed_center) + 0.5 * det;
  } else {
    const double n = initial.n_total();
    for (double w : {params.omega_bar_b, params.omega_bar_s,
                     bulk_frequency(params, n), surface_frequency(params, n, n)})
      max_rad = std::max(max_rad, std::abs(w) + params.effective_coupling(n));
    if (!schedule.bulk_freq_table.empty())
      for (const auto& [nb, w] : schedule.bulk_freq_table)
        max_rad = std::max(max_rad, std::abs(w));
  }
  const double span = std::max(t_end - initial.t, 1e-9);
  return 20.0 * std::max(rad_to_hz(max_rad), 2.0 / span);
}

Trajectory integrate(const SystemParams& params, const TwoLevelState& initial,
                     const Schedule& schedule, double t_end,
                     const IntegrateOptions& options) {
  params.validate();
  schedule.validate();
  if (!(t_end > initial.t))
    throw std::invalid_argument("integrate: t_end must exceed the start time");
  for (double tol : {options.rel_tol, options.abs_tol})
    if (!(tol > 0.0 && tol <= 1e-2))
      throw std::invalid_argument("integrate: tolerances must be in (0, 1e-2]");

  const double fs = options.sample_rate > 0.0
                        ? options.sample_rate
                        : default_sample_rate(params, schedule, initial, t_end);
  const double span = t_end - initial.t;
  const double n_samples_d = std::floor(span * fs * (1.0 + 1e-12)) + 1.0;
  if (n_samples_d > 2e8)
    throw std::invalid_argument("integrate: sample grid too large");
  const size_t n_samples = size_t(n_samples_d);

  Rhs rhs{params, schedule, std::isinf(params.tau_b) ? 0.0 : 1.0 / params.tau_b,
          std::isinf(params.tau_s) ? 0.0 : 1.0 / params.tau_s};
  const bool track_norm = std::isinf(params.tau_b) && std::isinf(params.tau_s);

  Vec y{initial.psi_b, initial.psi_s, 0.0};
  double t = initial.t;
  const double n0 = initial.n_total();

  StepStats stats;
  std::vector<TrajectorySample> samples;
  samples.reserve(n_samples);

  const auto emit = [&](double ts, const Vec& ys) {
    const TwoLevelState st = to_state(ts, ys);
    const double n_b = st.n_b();
    const double n_s = st.n_s();
    const auto freqs = instantaneous_frequencies(params, schedule, ts, n_b, n_s);
    const auto dressed = dressed_frequencies(freqs.omega_b, freqs.omega_s,
                                             params.effective_coupling(n_b));
    samples.push_back({ts, st.psi_b, st.psi_s, freqs.omega_b, freqs.omega_s,
                       dressed.lower, dressed.upper});
  };

  size_t next_sample = 0;
  emit(t, y);
  ++next_sample;

  Vec k1 = rhs(t, y);
  double h = initial_step(rhs, t, y, k1, t_end, options.abs_tol, options.rel_tol);
  bool just_rejected = false;
  const double hmin_floor = 16.0 * std::numeric_limits<double>::epsilon();
  const double t_done = t_end - 1e-12 * std::max(1.0, std::abs(t_end));

  while (t < t_done) {
    if (t + 1.01 * h >= t_end) h = t_end - t;
    if (h < hmin_floor * std::max(std::abs(t), 1.0))
      throw IntegrationError("integrate: step size underflow at t=" +
                                 format_double(t),
                             to_state(t, y));
    if (stats.accepted + stats.rejected > 50'000'000ULL)
      throw IntegrationError("integrate: step budget exceeded", to_state(t, y));

    const Vec k2 = rhs(t + c2 * h, axpy(y, h * a21, k1));
    const Vec k3 = rhs(t + c3 * h, axpy(axpy(y, h * a31, k1), h * a32, k2));
    const Vec k4 = rhs(t + c4 * h,
                       axpy(axpy(axpy(y, h * a41, k1), h * a42, k2), h * a43, k3));
    const Vec k5 =
        rhs(t + c5 * h, axpy(axpy(axpy(axpy(y, h * a51, k1), h * a52, k2),
                                  h * a53, k3),
                             h * a54, k4));
    const Vec k6 = rhs(
        t + h, axpy(axpy(axpy(axpy(axpy(y, h * a61, k1), h * a62, k2), h * a63, k3),
                         h * a64, k4),
                    h * a65, k5));
    const Vec y1 =
        axpy(axpy(axpy(axpy(axpy(y, h * a71, k1), h * a73, k3), h * a74, k4),
                  h * a75, k5),
             h * a76, k6);
    const Vec k7 = rhs(t + h, y1);

    Vec err;
    err.u = h * (e1 * k1.u + e3 * k3.u + e4 * k4.u + e5 * k5.u + e6 * k6.u +
                 e7 * k7.u);
    err.v = h * (e1 * k1.v + e3 * k3.v + e4 * k4.v + e5 * k5.v + e6 * k6.v +
                 e7 * k7.v);
    err.ph = h * (e1 * k1.ph + e3 * k3.ph + e4 * k4.ph + e5 * k5.ph +
                  e6 * k6.ph + e7 * k7.ph);

    double amp_scale = 0.0;
    const double err_norm =
        error_norm(y, y1, err, options.abs_tol, options.rel_tol, &amp_scale);

    if (err_norm <= 1.0) {
      DenseSegment seg;
      seg.t0 = t;
      seg.h = h;
      seg.r1 = y;
      seg.r2 = {y1.u - y.u, y1.v - y.v, y1.ph - y.ph};
      seg.r3 = {h * k1.u - seg.r2.u, h * k1.v - seg.r2.v, h * k1.ph - seg.r2.ph};
      seg.r4 = {seg.r2.u - h * k7.u - seg.r3.u, seg.r2.v - h * k7.v - seg.r3.v,
                seg.r2.ph - h * k7.ph - seg.r3.ph};
      seg.r5 = {h * (d1 * k1.u + d3 * k3.u + d4 * k4.u + d5 * k5.u +
                     d6 * k6.u + d7 * k7.u),
                h * (d1 * k1.v + d3 * k3.v + d4 * k4.v + d5 * k5.v +
                     d6 * k6.v + d7 * k7.v),
                h * (d1 * k1.ph + d3 * k3.ph + d4 * k4.ph + d5 * k5.ph +
                     d6 * k6.ph + d7 * k7.ph)};

      const double t_new = t + h;
      while (next_sample < n_samples) {
        const double ts = initial.t + double(next_sample) / fs;
        if (ts > t_new + 1e-12 * std::max(1.0, std::abs(t_new))) break;
        emit(std::min(ts, t_new), seg.eval(std::min(ts, t_new)));
        ++next_sample;
      }

      t = t_new;
      y = y1;
      k1 = k7;  // first-same-as-last
      ++stats.accepted;
      stats.error_budget += err_norm * amp_scale;
      if (track_norm && n0 > 0.0) {
        const double drift =
            std::abs((std::norm(y.u) + std::norm(y.v)) / n0 - 1.0);
        stats.max_norm_drift = std::max(stats.max_norm_drift, drift);
      }
      double fac = 0.9 * std::pow(std::max(err_norm, 1e-10), -0.2);
      fac = std::clamp(fac, 0.2, just_rejected ? 1.0 : 5.0);
      h *= fac;
      just_rejected = false;
    } else {
      ++stats.rejected;
      h *= std::clamp(0.9 * std::pow(err_norm, -0.2), 0.2, 1.0);
      just_rejected = true;
    }
  }

  // grid points beyond the last accepted step (rounding at t_end)
  while (next_sample < n_samples) {
    emit(initial.t + double(next_sample) / fs, y);
    ++next_sample;
  }

  return Trajectory(params, schedule, std::move(samples), stats);
}

Trajectory::Trajectory(SystemParams params, Schedule schedule,
                       std::vector<TrajectorySample> samples, StepStats stats)
    : params_(params),
      schedule_(std::move(schedule)),
      samples_(std::move(samples)),
      stats_(stats) {
  if (samples_.size() >= 2)
    sample_rate_ =
        double(samples_.size() - 1) / (samples_.back().t - samples_.front().t);
  locate_events();
}

double Trajectory::detuning_at(double t) const {
  const auto& s = samples_;
  if (t <= s.front().t) return s.front().omega_b - s.front().omega_s;
  if (t >= s.back().t) return s.back().omega_b - s.back().omega_s;
  const double pos = (t - s.front().t) * sample_rate_;
  size_t i = std::min(size_t(pos), s.size() - 2);
  // guard against rounding just past the cell
  while (i + 1 < s.size() - 1 && s[i + 1].t < t) ++i;
  while (i > 0 && s[i].t > t) --i;
  const double w = (t - s[i].t) / (s[i + 1].t - s[i].t);
  const double d0 = s[i].omega_b - s[i].omega_s;
  const double d1 = s[i + 1].omega_b - s[i + 1].omega_s;
  return d0 + w * (d1 - d0);
}

TwoLevelState Trajectory::state_at(size_t index) const {
  const auto& s = samples_.at(index);
  return {s.t, s.psi_b, s.psi_s};
}

void Trajectory::locate_events() {
  const auto& s = samples_;
  if (s.size() < 2) return;
  const double dt = 1.0 / sample_rate_;

  for (size_t i = 1; i < s.size(); ++i) {
    const double d0 = s[i - 1].omega_b - s[i - 1].omega_s;
    const double d1 = s[i].omega_b - s[i].omega_s;
    const bool crossed = (d0 == 0.0 && d1 != 0.0) || (d0 < 0.0) != (d1 < 0.0);
    if (!crossed || d0 == d1) continue;
    const double frac = d0 / (d0 - d1);
    const double t_cross = s[i - 1].t + frac * (s[i].t - s[i - 1].t);

    // Stencil window: one tenth of the Rabi period at the crossing.
    const double n_b =
        std::norm(s[i - 1].psi_b) + frac * (std::norm(s[i].psi_b) -
                                            std::norm(s[i - 1].psi_b));
    const double coupling = params_.effective_coupling(n_b);
    double window = coupling > 0.0 ? (two_pi / (2.0 * coupling)) / 10.0
                                   : 8.0 * dt;
    window = std::max(window, 4.0 * dt);
    double hc = window / 4.0;
    double center = t_cross;
    center = std::clamp(center, s.front().t + 2.0 * hc, s.back().t - 2.0 * hc);
    if (center - 2.0 * hc < s.front().t) {  // trajectory shorter than window
      hc = (s.back().t - s.front().t) / 4.0;
      center = s.front().t + 2.0 * hc;
    }
    const double rate =
        (detuning_at(center - 2.0 * hc) - 8.0 * detuning_at(center - hc) +
         8.0 * detuning_at(center + hc) - detuning_at(center + 2.0 * hc)) /
        (12.0 * hc);
    events_.push_back(
        {EventKind::undressed_crossing, t_cross, std::abs(rate)});
  }

  if (events_.empty()) return;

  size_t min_i = 0;
  double min_gap = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < s.size(); ++i) {
    const double g = s[i].dressed_hi - s[i].dressed_lo;
    if (g < min_gap) {
      min_gap = g;
      min_i = i;
    }
  }
  double t_gap = s[min_i].t;
  double gap = min_gap;
  if (min_i > 0 && min_i + 1 < s.size()) {
    // refine on gap^2, exactly parabolic for a linear detuning sweep
    const auto g2 = [&](size_t i) {
      const double g = s[i].dressed_hi - s[i].dressed_lo;
      return g * g;
    };
    const double a = g2(min_i - 1), b = g2(min_i), c = g2(min_i + 1);
    const double denom = a - 2.0 * b + c;
    if (denom > 0.0) {
      const double shift = 0.5 * (a - c) / denom;
      if (std::abs(shift) <= 1.0) {
        t_gap = s[min_i].t + shift * dt;
        const double refined = b - 0.125 * (a - c) * (a - c) / denom;
        if (refined >= 0.0) gap = std::sqrt(refined);
      }
    }
  }
  events_.push_back({EventKind::min_gap, t_gap, gap});
}

void Trajectory::write_csv(const std::string& path) const {
  std::string out;
  out.reserve(samples_.size() * 140 + 128);
  out += "t,re_psi_b,im_psi_b,re_psi_s,im_psi_s,n_b,n_s,omega_b_hz,"
         "omega_s_hz,dressed_lo_hz,dressed_hi_hz\n";
  for (const auto& s : samples_) {
    out += format_double(s.t);
    out += ',';
    out += format_double(s.psi_b.real());
    out += ',';
    out += format_double(s.psi_b.imag());
    out += ',';
    out += format_double(s.psi_s.real());
    out += ',';
    out += format_double(s.psi_s.imag());
    out += ',';
    out += format_double(s.n_b());
    out += ',';
    out += format_double(s.n_s());
    out += ',';
    out += format_double(rad_to_hz(s.omega_b));
    out += ',';
    out += format_double(rad_to_hz(s.omega_s));
    out += ',';
    out += format_double(rad_to_hz(s.dressed_lo));
    out += ',';
    out += format_double(rad_to_hz(s.dressed_hi));
    out += '\n';
  }
  write_text_file(path, out);
}

CrossingInfo detect_crossing(const Trajectory& traj) {
  for (const auto& e : traj.events())
    if (e.kind == EventKind::undressed_crossing)
      return {e.time, e.value, true};
  return {0.0, 0.0, false};
}

GapInfo min_dressed_gap(const Trajectory& traj) {
  for (const auto& e : traj.events())
    if (e.kind == EventKind::min_gap) return {e.time, e.value};
  throw NoCrossingError("min_dressed_gap: no undressed crossing in window");
}

}  // namespace mduet

#include "analysis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

namespace mduet {

namespace {

constexpr double nan_v = std::numeric_limits<double>::quiet_NaN();

// Solve the 3x3 symmetric normal equations A x = b by Gaussian elimination.
std::array<double, 3> solve3(std::array<std::array<double, 3>, 3> a,
                             std::array<double, 3> b) {
  for (int col = 0; col < 3; ++col) {
    int piv = col;
    for (int r = col + 1; r < 3; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    std::swap(a[col], a[piv]);
    std::swap(b[col], b[piv]);
    if (a[col][col] == 0.0) return {nan_v, nan_v, nan_v};
    for (int r = col + 1; r < 3; ++r) {
      const double f = a[r][col] / a[col][col];
      for (int c = col; c < 3; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  std::array<double, 3> x{};
  for (int r = 2; r >= 0; --r) {
    double s = b[r];
    for (int c = r + 1; c < 3; ++c) s -= a[r][c] * x[c];
    x[r] = s / a[r][r];
  }
  return x;
}

struct LineFit {
  double intercept = 0.0, slope = 0.0, rms = 0.0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y,
                 size_t begin, size_t end) {
  const double n = double(end - begin);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = begin; i < end; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  LineFit fit;
  const double denom = n * sxx - sx * sx;
  fit.slope = denom != 0.0 ? (n * sxy - sx * sy) / denom : 0.0;
  fit.intercept = (sy - fit.slope * sx) / n;
  double ss = 0;
  for (size_t i = begin; i < end; ++i) {
    const double r = y[i] - fit.intercept - fit.slope * x[i];
    ss += r * r;
  }
  fit.rms = std::sqrt(ss / n);
  return fit;
}

double slope_to_tau(double slope) {
  return slope < -1e-12 ? -1.0 / slope : inf;
}

}  // namespace

std::vector<DerivativePoint> selftrap_derivative(const Ridge& bulk_ridge,
                                                 double bandwidth_frac) {
  const auto& pts = bulk_ridge.points;
  if (pts.size() < 10)
    throw std::invalid_argument(
        "selftrap_derivative: need at least 10 ridge points");
  if (!(bandwidth_frac > 0.0 && bandwidth_frac <= 1.0))
    throw std::invalid_argument(
        "selftrap_derivative: bandwidth must be in (0, 1]");

  const size_t n = pts.size();
  std::vector<double> x(n), y(n);
  for (size_t i = 0; i < n; ++i) {
    x[i] = pts[i].amp * pts[i].amp;
    y[i] = hz_to_rad(pts[i].freq_hz);
  }

  // monotonicity check on a lightly smoothed track; ridge amplitudes carry
  // residual population-oscillation wiggle that must not trip the check
  std::vector<double> xs(n);
  for (size_t i = 0; i < n; ++i) {
    const size_t lo = i >= 2 ? i - 2 : 0;
    const size_t hi = std::min(i + 2, n - 1);
    xs[i] = std::accumulate(x.begin() + long(lo), x.begin() + long(hi) + 1, 0.0) /
            double(hi - lo + 1);
  }
  const double range = std::abs(xs.back() - xs.front());
  if (range <= 0.0)
    throw std::invalid_argument("selftrap_derivative: flat amplitude track");
  const double trend = xs.back() > xs.front() ? 1.0 : -1.0;
  for (size_t i = 1; i < n; ++i)
    if (trend * (xs[i] - xs[i - 1]) < -0.02 * range)
      throw std::invalid_argument(
          "selftrap_derivative: squared amplitude is not monotone");

  const double xmin = *std::min_element(x.begin(), x.end());
  const double xmax = *std::max_element(x.begin(), x.end());
  const double bw = bandwidth_frac * (xmax - xmin);

  std::vector<DerivativePoint> out(n);
  for (size_t i = 0; i < n; ++i) {
    std::array<std::array<double, 3>, 3> a{};
    std::array<double, 3> b{};
    for (size_t j = 0; j < n; ++j) {
      const double u = (x[j] - x[i]) / bw;
      if (std::abs(u) >= 1.0) continue;
      const double tri = 1.0 - std::abs(u) * std::abs(u) * std::abs(u);
      const double w = tri * tri * tri;  // tricube
      const double dx = x[j] - x[i];
      const double basis[3] = {1.0, dx, dx * dx};
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) a[r][c] += w * basis[r] * basis[c];
        b[r] += w * basis[r] * y[j];
      }
    }
    const auto coef = solve3(a, b);
    out[i] = {pts[i].t, coef[1]};
  }
  return out;
}

CouplingSeries extract_coupling(const RidgeSet& ridges,
                                const std::vector<DerivativePoint>& deriv,
                                double t_cross) {
  const Ridge* bulk = ridges.find(RidgeLabel::main_bulk);
  const Ridge* surf = ridges.find(RidgeLabel::main_surface);
  const Ridge* side = ridges.find(RidgeLabel::sideband_upper);
  if (!side) side = ridges.find(RidgeLabel::sideband_lower);
  if (!bulk || !surf || !side)
    throw std::invalid_argument(
        "extract_coupling: need labeled bulk, surface and sideband traces");
  if (deriv.size() < 2)
    throw std::invalid_argument(
        "extract_coupling: derivative track too short");

  const auto deriv_at = [&](double t) -> double {
    if (t < deriv.front().t || t > deriv.back().t) return nan_v;
    size_t hi = 1;
    while (deriv[hi].t < t) ++hi;
    const auto& a = deriv[hi - 1];
    const auto& b = deriv[hi];
    const double w = (t - a.t) / (b.t - a.t);
    return a.value + w * (b.value - a.value);
  };

  double deriv_scale = 0.0;
  for (const auto& d : deriv) deriv_scale = std::max(deriv_scale, std::abs(d.value));

  CouplingSeries series;
  series.t_cross = t_cross;
  for (const auto& p : side->points) {
    if (!bulk->overlaps(p.t) || !surf->overlaps(p.t)) continue;
    CouplingEstimate est;
    est.t = p.t;
    est.a_sb = p.amp;
    est.a_b = bulk->amp_at(p.t);
    est.a_s = surf->amp_at(p.t);
    est.delta_omega = hz_to_rad(bulk->freq_at(p.t) - surf->freq_at(p.t));
    est.deriv = deriv_at(p.t);
    const bool deriv_ok =
        std::isfinite(est.deriv) && std::abs(est.deriv) > 0.02 * deriv_scale;
    if (deriv_ok && est.a_b > 0.0 && est.a_s > 0.0) {
      // A_sb = A_b J_1(m) with m = 2 coupling sqrt(N_b N_s) |dw/dN| / w_J^2
      // (the population beat of the coupled pair has half-swing
      // 2 coupling sqrt(N_b N_s)/w_J); inverting the linearized J_1 gives a
      // unit coefficient here
      est.omega_est = est.a_sb * est.delta_omega * est.delta_omega /
                      (est.a_b * est.a_b * est.a_s * std::abs(est.deriv));
      est.valid = true;
    }
    series.estimates.push_back(est);
  }

  // linear extrapolation to the crossing over the quarter of valid points
  // nearest to it; points before the crossing are preferred since the
  // estimator degrades as the traces approach
  std::vector<const CouplingEstimate*> valid;
  for (const auto& e : series.estimates)
    if (e.valid) valid.push_back(&e);
  if (valid.size() >= 2) {
    std::vector<const CouplingEstimate*> pre, post;
    for (const auto* e : valid)
      (e->t < t_cross ? pre : post).push_back(e);
    std::vector<const CouplingEstimate*> window;
    if (pre.size() >= 5) {
      const size_t take = std::max<size_t>(2, (pre.size() + 3) / 4);
      window.assign(pre.end() - long(take), pre.end());
    } else if (post.size() >= 2) {
      const size_t take = std::max<size_t>(2, (post.size() + 3) / 4);
      window.assign(post.begin(), post.begin() + long(take));
    } else {
      window = valid;
    }
    std::vector<double> tx, oy;
    for (const auto* e : window) {
      tx.push_back(e->t);
      oy.push_back(e->omega_est);
    }
    const LineFit fit = fit_line(tx, oy, 0, tx.size());
    series.extrapolated = std::max(0.0, fit.intercept + fit.slope * t_cross);
    series.extrapolation_ok = true;
  }
  return series;
}

RelaxationFit fit_relaxation(const std::vector<double>& t,
                             const std::vector<double>& amp) {
  if (t.size() != amp.size())
    throw std::invalid_argument("fit_relaxation: size mismatch");
  if (t.size() < 8)
    throw std::invalid_argument("fit_relaxation: need at least 8 points");
  std::vector<double> y(amp.size());
  for (size_t i = 0; i < amp.size(); ++i) {
    if (!(amp[i] > 0.0))
      throw std::invalid_argument("fit_relaxation: amplitudes must be > 0");
    y[i] = std::log(amp[i]);
  }
  const size_t n = t.size();

  const LineFit single = fit_line(t, y, 0, n);

  // continuous hinge model y = a + b (t - tk) + c max(t - tk, 0)
  double best_rms = std::numeric_limits<double>::infinity();
  double best_tk = 0.0, best_a = 0.0, best_b = 0.0, best_c = 0.0;
  for (size_t k = 3; k + 3 < n; ++k) {
    const double tk = t[k];
    std::array<std::array<double, 3>, 3> m{};
    std::array<double, 3> rhs{};
    for (size_t i = 0; i < n; ++i) {
      const double dt = t[i] - tk;
      const double basis[3] = {1.0, dt, dt > 0.0 ? dt : 0.0};
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) m[r][c] += basis[r] * basis[c];
        rhs[r] += basis[r] * y[i];
      }
    }
    const auto coef = solve3(m, rhs);
    if (!std::isfinite(coef[0])) continue;
    double ss = 0.0;
    for (size_t i = 0; i < n; ++i) {
      const double dt = t[i] - tk;
      const double fit = coef[0] + coef[1] * dt + coef[2] * (dt > 0.0 ? dt : 0.0);
      ss += (y[i] - fit) * (y[i] - fit);
    }
    const double rms = std::sqrt(ss / double(n));
    if (rms < best_rms) {
      best_rms = rms;
      best_tk = tk;
      best_a = coef[0];
      best_b = coef[1];
      best_c = coef[2];
    }
  }

  RelaxationFit fit;
  // the absolute floor keeps numerically-exact fits (residuals at rounding
  // level) from reporting spurious kinks
  const bool kink = std::isfinite(best_rms) && single.rms > 1e-10 &&
                    (single.rms - best_rms) >= 0.20 * single.rms;
  if (kink) {
    fit.kink_time = best_tk;
    const double slope1 = best_b, slope2 = best_b + best_c;
    fit.segments.push_back({t.front(), best_tk, slope_to_tau(slope1),
                            std::exp(best_a + slope1 * (t.front() - best_tk)),
                            best_rms});
    fit.segments.push_back({best_tk, t.back(), slope_to_tau(slope2),
                            std::exp(best_a), best_rms});
  } else {
    fit.segments.push_back(
        {t.front(), t.back(), slope_to_tau(single.slope),
         std::exp(single.intercept + single.slope * t.front()), single.rms});
  }
  return fit;
}

LzReportData lz_report(const Trajectory& traj) {
  const CrossingInfo crossing = detect_crossing(traj);
  if (!crossing.found)
    throw NoCrossingError("lz_report: trajectory has no undressed crossing");
  const auto& params = traj.params();
  const auto& samples = traj.samples();

  // coupling at the crossing
  const auto sample_near = [&](double t) -> const TrajectorySample& {
    const double pos = (t - samples.front().t) * traj.sample_rate();
    const size_t i =
        std::min(size_t(std::max(pos, 0.0)), samples.size() - 1);
    return samples[i];
  };
  const TrajectorySample& at_cross = sample_near(crossing.t_cross);
  const double coupling = params.effective_coupling(at_cross.n_b());

  LzReportData report;
  report.crossing_time = crossing.t_cross;
  report.crossing_rate = crossing.rate;
  report.predicted_fraction = lz_transfer_fraction(coupling, crossing.rate);

  const double rabi_period =
      coupling > 0.0 ? two_pi / (2.0 * coupling)
                     : 10.0 / traj.sample_rate();
  const double w_start = crossing.t_cross + rabi_period;
  const double w_end = w_start + rabi_period;
  if (w_start + 0.25 * rabi_period > samples.back().t)
    throw NoCrossingError(
        "lz_report: trajectory ends too soon after the crossing to average "
        "the transferred population");

  double frac_sum = 0.0;
  size_t count = 0;
  for (const auto& s : samples) {
    if (s.t < w_start || s.t > w_end) continue;
    const auto split = branch_populations({s.t, s.psi_b, s.psi_s}, s.omega_b,
                                          s.omega_s,
                                          params.effective_coupling(s.n_b()));
    const double total = split.ground + split.excited;
    if (total > 0.0) {
      frac_sum += split.excited / total;
      ++count;
    }
  }
  report.observed_fraction = count > 0 ? frac_sum / double(count) : nan_v;

  // hypothetical crossing rate if only the secular decay moved the levels
  if (traj.schedule().mode == Schedule::Mode::physical &&
      !std::isinf(params.tau_b)) {
    const double n_b = at_cross.n_b();
    double dwb_dn;
    if (!traj.schedule().bulk_freq_table.empty()) {
      const double dn = std::max(1e-6, 1e-3 * n_b);
      dwb_dn = (traj.schedule().table_bulk_frequency(n_b + dn) -
                traj.schedule().table_bulk_frequency(std::max(n_b - dn, 0.0))) /
               (dn + std::min(dn, n_b));
    } else {
      dwb_dn = n_b > 0.0 ? -params.omega_bar_b * params.k_selftrap *
                               params.p_exponent *
                               std::pow(n_b, params.p_exponent - 1.0)
                         : 0.0;
    }
    double dws_dn = 0.0;
    if (params.surface_coeff_b != 0.0 && n_b > 0.0)
      dws_dn = -params.omega_bar_s * params.surface_coeff_b *
               params.p_exponent * std::pow(n_b, params.p_exponent - 1.0);
    const double dn_dt = 2.0 * n_b / params.tau_b;
    report.decay_only_rate = std::abs((dwb_dn - dws_dn) * dn_dt);
    report.rate_ratio = report.decay_only_rate > 0.0
                            ? report.crossing_rate / report.decay_only_rate
                            : nan_v;
  } else {
    report.decay_only_rate = nan_v;
    report.rate_ratio = nan_v;
  }

  const GapInfo gap = min_dressed_gap(traj);
  report.min_gap = gap.gap;
  report.min_gap_time = gap.t_gap;
  return report;
}

}  // namespace mduet

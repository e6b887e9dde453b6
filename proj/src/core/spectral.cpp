#include "spectral.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>

#include "io.hpp"

namespace mduet {

namespace {

using cplx = std::complex<double>;

size_t next_pow2(size_t n) {
  size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

void fft_inplace(std::vector<cplx>& a) {
  const size_t n = a.size();
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    const double ang = -two_pi / double(len);
    const cplx wlen = std::polar(1.0, ang);
    for (size_t i = 0; i < n; i += len) {
      cplx w{1.0, 0.0};
      for (size_t k = 0; k < len / 2; ++k) {
        const cplx u = a[i + k];
        const cplx t = w * a[i + k + len / 2];
        a[i + k] = u + t;
        a[i + k + len / 2] = u - t;
        w *= wlen;
      }
    }
  }
}

struct PeakFit {
  double offset = 0.0;  // bins, relative to the center bin
  double amp = 0.0;
};

// Three-point parabolic interpolation on log magnitude.
PeakFit refine_peak(double m_lo, double m_mid, double m_hi) {
  PeakFit fit{0.0, m_mid};
  if (m_lo <= 0.0 || m_hi <= 0.0 || m_mid <= 0.0) return fit;
  const double a = std::log(m_lo);
  const double b = std::log(m_mid);
  const double c = std::log(m_hi);
  const double denom = a - 2.0 * b + c;
  if (denom >= 0.0) return fit;
  const double d = 0.5 * (a - c) / denom;
  fit.offset = std::clamp(d, -0.5, 0.5);
  fit.amp = std::exp(b - 0.25 * (a - c) * fit.offset);
  return fit;
}

}  // namespace

Spectrogram spectrogram(const SignalSeries& sig, double window_len, double hop,
                        WindowKind window) {
  if (!(window_len > 0.0) || !(hop > 0.0))
    throw std::invalid_argument("spectrogram: window and hop must be > 0");
  if (hop > window_len)
    throw std::invalid_argument("spectrogram: hop must not exceed the window");
  const double fs = sig.sample_rate;
  const size_t len = size_t(std::lround(window_len * fs));
  if (len < 16)
    throw std::invalid_argument(
        "spectrogram: window too short, need window_len * sample_rate >= 16");
  if (sig.samples.size() < len)
    throw std::invalid_argument(
        "spectrogram: series shorter than one window");
  const size_t hop_n = std::max<size_t>(1, size_t(std::lround(hop * fs)));

  std::vector<double> win(len);
  if (window == WindowKind::hann) {
    for (size_t i = 0; i < len; ++i)
      win[i] = 0.5 * (1.0 - std::cos(two_pi * double(i) / double(len)));
  } else {
    const double sigma = double(len) / 6.0;
    const double mid = 0.5 * double(len - 1);
    for (size_t i = 0; i < len; ++i) {
      const double z = (double(i) - mid) / sigma;
      win[i] = std::exp(-0.5 * z * z);
    }
  }
  const double gain = std::accumulate(win.begin(), win.end(), 0.0);

  const size_t nfft = 2 * next_pow2(len);  // 2x padding for peak interpolation
  const size_t nf = nfft / 2 + 1;
  const size_t nframes = (sig.samples.size() - len) / hop_n + 1;

  Spectrogram spec;
  spec.freq_resolution_hz = 1.0 / window_len;
  spec.bin_spacing_hz = fs / double(nfft);
  spec.time_bins.resize(nframes);
  spec.freq_bins.resize(nf);
  for (size_t k = 0; k < nf; ++k) spec.freq_bins[k] = double(k) * fs / double(nfft);
  spec.magnitudes.assign(nframes * nf, 0.0);

  std::vector<cplx> buf(nfft);
  for (size_t f = 0; f < nframes; ++f) {
    const size_t off = f * hop_n;
    spec.time_bins[f] =
        sig.start_time + (double(off) + 0.5 * double(len - 1)) / fs;
    for (size_t i = 0; i < len; ++i)
      buf[i] = win[i] * sig.samples[off + i];
    std::fill(buf.begin() + long(len), buf.end(), cplx{0.0, 0.0});
    fft_inplace(buf);
    double* row = spec.magnitudes.data() + f * nf;
    for (size_t k = 0; k < nf; ++k) row[k] = 2.0 * std::abs(buf[k]) / gain;
  }
  return spec;
}

void Spectrogram::write_csv(const std::string& path) const {
  std::string out;
  out.reserve(magnitudes.size() * 9 + freq_bins.size() * 9 + 64);
  out += "t";
  for (double f : freq_bins) {
    out += ',';
    out += format_double(f);
  }
  out += '\n';
  for (size_t it = 0; it < nt(); ++it) {
    out += format_double(time_bins[it]);
    const double* row = magnitudes.data() + it * nf();
    for (size_t jf = 0; jf < nf(); ++jf) {
      out += ',';
      out += format_double(row[jf]);
    }
    out += '\n';
  }
  write_text_file(path, out);
}

const char* ridge_label_name(RidgeLabel label) {
  switch (label) {
    case RidgeLabel::main_bulk: return "main_bulk";
    case RidgeLabel::main_surface: return "main_surface";
    case RidgeLabel::sideband_upper: return "sideband_upper";
    case RidgeLabel::sideband_lower: return "sideband_lower";
    default: return "unknown";
  }
}

double Ridge::integrated_amp() const {
  double sum = 0.0;
  for (const auto& p : points) sum += p.amp;
  return sum;
}

double Ridge::frequency_variation() const {
  if (points.size() < 3) return 0.0;
  // median-of-3 filter knocks down single-bin jitter before differencing
  std::vector<double> f(points.size());
  f.front() = points.front().freq_hz;
  f.back() = points.back().freq_hz;
  for (size_t i = 1; i + 1 < points.size(); ++i) {
    double a = points[i - 1].freq_hz, b = points[i].freq_hz,
           c = points[i + 1].freq_hz;
    f[i] = std::max(std::min(a, b), std::min(std::max(a, b), c));
  }
  double tv = 0.0;
  for (size_t i = 1; i < f.size(); ++i) tv += std::abs(f[i] - f[i - 1]);
  const double dur = points.back().t - points.front().t;
  return dur > 0.0 ? tv / dur : 0.0;
}

namespace {

double interp_track(const std::vector<RidgePoint>& pts, double t, bool freq) {
  if (t <= pts.front().t) return freq ? pts.front().freq_hz : pts.front().amp;
  if (t >= pts.back().t) return freq ? pts.back().freq_hz : pts.back().amp;
  size_t hi = 1;
  while (pts[hi].t < t) ++hi;
  const auto& a = pts[hi - 1];
  const auto& b = pts[hi];
  const double w = (t - a.t) / (b.t - a.t);
  return freq ? a.freq_hz + w * (b.freq_hz - a.freq_hz)
              : a.amp + w * (b.amp - a.amp);
}

}  // namespace

double Ridge::freq_at(double t) const { return interp_track(points, t, true); }
double Ridge::amp_at(double t) const { return interp_track(points, t, false); }

const Ridge* RidgeSet::find(RidgeLabel label) const {
  const Ridge* best = nullptr;
  for (const auto& r : ridges)
    if (r.label == label && (!best || r.integrated_amp() > best->integrated_amp()))
      best = &r;
  return best;
}

void RidgeSet::write_csv(const std::string& path) const {
  std::string out = "t,freq_hz,amp,label\n";
  for (const auto& r : ridges)
    for (const auto& p : r.points) {
      out += format_double(p.t);
      out += ',';
      out += format_double(p.freq_hz);
      out += ',';
      out += format_double(p.amp);
      out += ',';
      out += ridge_label_name(r.label);
      out += '\n';
    }
  write_text_file(path, out);
}

RidgeSet track_ridges(const Spectrogram& spec, double min_amp,
                      double max_hop_hz) {
  if (!(min_amp > 0.0))
    throw std::invalid_argument("track_ridges: min_amp must be > 0");
  if (!(max_hop_hz > 0.0))
    throw std::invalid_argument("track_ridges: max_hop must be > 0");

  struct Live {
    size_t ridge;
    double last_freq;
  };
  RidgeSet set;
  std::vector<Live> live;

  struct Peak {
    double freq, amp;
  };
  for (size_t it = 0; it < spec.nt(); ++it) {
    const double* row = spec.magnitudes.data() + it * spec.nf();
    std::vector<Peak> peaks;
    for (size_t k = 1; k + 1 < spec.nf(); ++k) {
      if (row[k] < min_amp) continue;
      if (!(row[k] > row[k - 1] && row[k] >= row[k + 1])) continue;
      const PeakFit fit = refine_peak(row[k - 1], row[k], row[k + 1]);
      peaks.push_back({(double(k) + fit.offset) * spec.bin_spacing_hz, fit.amp});
    }

    // pair live ridges and peaks, nearest first
    struct Cand {
      double dist;
      size_t live_idx, peak_idx;
    };
    std::vector<Cand> cands;
    for (size_t li = 0; li < live.size(); ++li)
      for (size_t pi = 0; pi < peaks.size(); ++pi) {
        const double d = std::abs(peaks[pi].freq - live[li].last_freq);
        if (d <= max_hop_hz) cands.push_back({d, li, pi});
      }
    std::sort(cands.begin(), cands.end(),
              [](const Cand& a, const Cand& b) { return a.dist < b.dist; });

    std::vector<char> live_used(live.size(), 0), peak_used(peaks.size(), 0);
    std::vector<Live> next_live;
    for (const auto& c : cands) {
      if (live_used[c.live_idx] || peak_used[c.peak_idx]) continue;
      live_used[c.live_idx] = peak_used[c.peak_idx] = 1;
      const auto& pk = peaks[c.peak_idx];
      set.ridges[live[c.live_idx].ridge].points.push_back(
          {spec.time_bins[it], pk.freq, pk.amp});
      next_live.push_back({live[c.live_idx].ridge, pk.freq});
    }
    for (size_t pi = 0; pi < peaks.size(); ++pi) {
      if (peak_used[pi]) continue;
      set.ridges.push_back(
          {{{spec.time_bins[it], peaks[pi].freq, peaks[pi].amp}},
           RidgeLabel::unknown});
      next_live.push_back({set.ridges.size() - 1, peaks[pi].freq});
    }
    live = std::move(next_live);
  }

  // drop single-point specks
  std::erase_if(set.ridges,
                [](const Ridge& r) { return r.points.size() < 2; });
  std::sort(set.ridges.begin(), set.ridges.end(),
            [](const Ridge& a, const Ridge& b) {
              return a.points.front().t < b.points.front().t;
            });
  return set;
}

RidgeSet classify_sidebands(const RidgeSet& input, double rel_tol,
                            double min_overlap_frac) {
  RidgeSet set = input;
  set.classification_warning = false;
  for (auto& r : set.ridges) r.label = RidgeLabel::unknown;
  if (set.ridges.size() < 2) {
    set.classification_warning = true;
    return set;
  }

  std::vector<size_t> order(set.ridges.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return set.ridges[a].integrated_amp() > set.ridges[b].integrated_amp();
  });

  size_t first = order[0], second = order[1];
  // the flexible-trap trace is the one whose frequency actually moves
  const bool first_is_bulk = set.ridges[first].frequency_variation() >=
                             set.ridges[second].frequency_variation();
  const size_t bulk_i = first_is_bulk ? first : second;
  const size_t surf_i = first_is_bulk ? second : first;
  set.ridges[bulk_i].label = RidgeLabel::main_bulk;
  set.ridges[surf_i].label = RidgeLabel::main_surface;
  const Ridge& bulk = set.ridges[bulk_i];
  const Ridge& surf = set.ridges[surf_i];

  for (size_t i = 0; i < set.ridges.size(); ++i) {
    if (i == bulk_i || i == surf_i) continue;
    Ridge& r = set.ridges[i];
    size_t overlap = 0, matched = 0;
    double offset_sum = 0.0;
    for (const auto& p : r.points) {
      if (!bulk.overlaps(p.t) || !surf.overlaps(p.t)) continue;
      ++overlap;
      const double f_bulk = bulk.freq_at(p.t);
      const double sep = std::abs(f_bulk - surf.freq_at(p.t));
      if (sep <= 0.0) continue;
      const double offset = p.freq_hz - f_bulk;
      if (std::abs(std::abs(offset) - sep) <= rel_tol * sep) {
        ++matched;
        offset_sum += offset;
      }
    }
    if (overlap >= 3 && double(matched) >= min_overlap_frac * double(overlap))
      r.label = offset_sum >= 0.0 ? RidgeLabel::sideband_upper
                                  : RidgeLabel::sideband_lower;
  }
  return set;
}

}  // namespace mduet

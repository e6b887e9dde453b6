#pragma once

#include <string>
#include <vector>

#include "signal.hpp"

namespace mduet {

enum class WindowKind { hann, gauss };

// Amplitude-calibrated magnitude STFT: a pure tone of amplitude A yields a
// tracked ridge magnitude of A. Frames are zero-padded for sub-bin peak
// interpolation; the true frequency resolution stays ~1/window_len.
struct Spectrogram {
  std::vector<double> time_bins;  // s, frame centers
  std::vector<double> freq_bins;  // Hz
  std::vector<double> magnitudes; // row-major, time_bins.size() x freq_bins.size()
  double freq_resolution_hz = 0.0;  // ~1/window_len
  double bin_spacing_hz = 0.0;

  size_t nt() const { return time_bins.size(); }
  size_t nf() const { return freq_bins.size(); }
  double at(size_t it, size_t jf) const { return magnitudes[it * nf() + jf]; }

  void write_csv(const std::string& path) const;
};

Spectrogram spectrogram(const SignalSeries& sig, double window_len, double hop,
                        WindowKind window = WindowKind::hann);

enum class RidgeLabel { unknown, main_bulk, main_surface, sideband_upper,
                        sideband_lower };

const char* ridge_label_name(RidgeLabel label);

struct RidgePoint {
  double t = 0.0;
  double freq_hz = 0.0;
  double amp = 0.0;
};

struct Ridge {
  std::vector<RidgePoint> points;
  RidgeLabel label = RidgeLabel::unknown;

  double integrated_amp() const;
  // Mean absolute slope of the (median-filtered) frequency track, Hz/s.
  double frequency_variation() const;
  bool overlaps(double t) const {
    return !points.empty() && t >= points.front().t && t <= points.back().t;
  }
  double freq_at(double t) const;   // linear interpolation inside the support
  double amp_at(double t) const;
};

struct RidgeSet {
  std::vector<Ridge> ridges;
  bool classification_warning = false;

  void write_csv(const std::string& path) const;
  const Ridge* find(RidgeLabel label) const;
};

// Greedy peak chaining: per time bin, local maxima above min_amp are linked
// to the nearest live ridge within max_hop_hz; anything unmatched starts a
// new ridge. Sub-bin frequency and amplitude by parabolic interpolation.
RidgeSet track_ridges(const Spectrogram& spec, double min_amp,
                      double max_hop_hz);

// Ranks the two strongest ridges as the main traces (the more
// frequency-varying one is the bulk), then labels ridges whose offset from
// the bulk trace matches the main-trace separation as FM sidebands.
RidgeSet classify_sidebands(const RidgeSet& ridges, double rel_tol = 0.15,
                            double min_overlap_frac = 0.70);

}  // namespace mduet

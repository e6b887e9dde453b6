#include "schedule.hpp"

#include <cmath>
#include <stdexcept>

namespace mduet {

void Schedule::validate() const {
  if (mode == Mode::programmed) {
    if (detuning.size() < 2)
      throw std::invalid_argument(
          "schedule: programmed mode needs at least two detuning points");
    for (size_t i = 1; i < detuning.size(); ++i)
      if (!(detuning[i].first > detuning[i - 1].first))
        throw std::invalid_argument(
            "schedule: detuning times must be strictly increasing");
    if (!std::isfinite(programmed_center))
      throw std::invalid_argument("schedule: center must be finite");
  }
  if (!bulk_freq_table.empty()) {
    if (bulk_freq_table.size() < 2)
      throw std::invalid_argument(
          "schedule: bulk frequency table needs at least two rows");
    for (size_t i = 1; i < bulk_freq_table.size(); ++i) {
      if (!(bulk_freq_table[i].first > bulk_freq_table[i - 1].first))
        throw std::invalid_argument(
            "schedule: table populations must be strictly increasing");
      if (bulk_freq_table[i].second > bulk_freq_table[i - 1].second)
        throw std::invalid_argument(
            "schedule: table frequencies must be non-increasing");
    }
  }
}

namespace {

double interp_clamped(const std::vector<std::pair<double, double>>& pts,
                      double x) {
  if (x <= pts.front().first) return pts.front().second;
  if (x >= pts.back().first) return pts.back().second;
  size_t hi = 1;
  while (pts[hi].first < x) ++hi;
  const auto& a = pts[hi - 1];
  const auto& b = pts[hi];
  const double w = (x - a.first) / (b.first - a.first);
  return a.second + w * (b.second - a.second);
}

}  // namespace

double Schedule::detuning_at(double t) const {
  return interp_clamped(detuning, t);
}

double Schedule::table_bulk_frequency(double n_b) const {
  return interp_clamped(bulk_freq_table, n_b);
}

Schedule Schedule::linear_sweep(double rate, double t_cross, double t0,
                                double t1, double center) {
  Schedule schedule;
  schedule.mode = Mode::programmed;
  schedule.programmed_center = center;
  schedule.detuning = {{t0, rate * (t0 - t_cross)}, {t1, rate * (t1 - t_cross)}};
  return schedule;
}

InstantFrequencies instantaneous_frequencies(const SystemParams& params,
                                             const Schedule& schedule,
                                             double t, double n_b,
                                             double n_s) {
  InstantFrequencies freqs;
  if (schedule.mode == Schedule::Mode::programmed) {
    const double half = 0.5 * schedule.detuning_at(t);
    freqs.omega_b = schedule.programmed_center + half;
    freqs.omega_s = schedule.programmed_center - half;
    return freqs;
  }
  freqs.omega_b = schedule.bulk_freq_table.empty()
                      ? bulk_frequency(params, n_b)
                      : schedule.table_bulk_frequency(n_b);
  freqs.omega_s = surface_frequency(params, n_b, n_s);
  return freqs;
}

}  // namespace mduet

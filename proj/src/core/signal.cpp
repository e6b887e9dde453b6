#include "signal.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

#include "io.hpp"

namespace mduet {

namespace {

using cplx = std::complex<double>;

// Box-Muller normal deviates from a seeded mt19937_64; self-contained so the
// stream does not depend on the standard library's distribution internals.
class GaussianGen {
 public:
  explicit GaussianGen(uint64_t seed) : rng_(seed) {}

  double next() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = (double(rng_() >> 11) + 0.5) * 0x1p-53;
    const double u2 = (double(rng_() >> 11) + 0.5) * 0x1p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(two_pi * u2);
    have_spare_ = true;
    return r * std::cos(two_pi * u2);
  }

 private:
  std::mt19937_64 rng_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

cplx catmull_rom(cplx p0, cplx p1, cplx p2, cplx p3, double w) {
  const cplx m1 = 0.5 * (p2 - p0);
  const cplx m2 = 0.5 * (p3 - p1);
  const double w2 = w * w, w3 = w2 * w;
  return (2.0 * w3 - 3.0 * w2 + 1.0) * p1 + (w3 - 2.0 * w2 + w) * m1 +
         (-2.0 * w3 + 3.0 * w2) * p2 + (w3 - w2) * m2;
}

}  // namespace

SignalSeries synthesize(const Trajectory& traj, const SystemParams& params,
                        double sample_rate, double noise_rms, uint64_t seed) {
  params.validate();
  if (!(sample_rate > 0.0))
    throw std::invalid_argument("synthesize: sample rate must be > 0");
  if (!(noise_rms >= 0.0))
    throw std::invalid_argument("synthesize: noise RMS must be >= 0");
  const auto& s = traj.samples();
  if (s.size() < 2)
    throw std::invalid_argument("synthesize: trajectory too short");

  double f_max = rad_to_hz(std::abs(params.omega_larmor));
  for (const auto& smp : s) {
    const double w = std::max(std::abs(smp.dressed_lo), std::abs(smp.dressed_hi));
    f_max = std::max(f_max, rad_to_hz(std::abs(params.omega_larmor) + w));
  }
  if (sample_rate < 4.0 * f_max)
    throw std::invalid_argument(
        "synthesize: sample rate " + format_double(sample_rate) +
        " Hz undersamples the signal; need at least " +
        format_double(4.0 * f_max) + " Hz");

  const double t0 = s.front().t;
  const double span = s.back().t - t0;
  const size_t n = size_t(std::floor(span * sample_rate * (1.0 + 1e-12))) + 1;

  const double traj_rate = traj.sample_rate();
  const double ratio = traj_rate / sample_rate;
  const long stride = std::lround(ratio);
  const bool aligned = std::abs(ratio - double(stride)) < 1e-9 && stride >= 1;

  SignalSeries sig;
  sig.sample_rate = sample_rate;
  sig.start_time = t0;
  sig.samples.resize(n);

  const cplx ilarmor{0.0, -params.omega_larmor};
  const auto project = [&](double t, cplx psi_b, cplx psi_s) {
    cplx total = params.fill_b * psi_b + params.fill_s * psi_s;
    if (params.omega_larmor != 0.0) total *= std::exp(ilarmor * t);
    return total.real();
  };

  if (aligned) {
    for (size_t k = 0; k < n; ++k) {
      const auto& smp = s[std::min(k * size_t(stride), s.size() - 1)];
      sig.samples[k] = project(smp.t, smp.psi_b, smp.psi_s);
    }
  } else {
    for (size_t k = 0; k < n; ++k) {
      const double t = t0 + double(k) / sample_rate;
      double pos = (t - t0) * traj_rate;
      size_t i = std::min(size_t(pos), s.size() - 2);
      const double w = std::clamp(pos - double(i), 0.0, 1.0);
      const size_t i0 = i > 0 ? i - 1 : 0;
      const size_t i3 = std::min(i + 2, s.size() - 1);
      sig.samples[k] =
          project(t,
                  catmull_rom(s[i0].psi_b, s[i].psi_b, s[i + 1].psi_b,
                              s[i3].psi_b, w),
                  catmull_rom(s[i0].psi_s, s[i].psi_s, s[i + 1].psi_s,
                              s[i3].psi_s, w));
    }
  }

  if (noise_rms > 0.0) {
    GaussianGen gen(seed);
    for (auto& v : sig.samples) v += noise_rms * gen.next();
  }
  return sig;
}

void write_signal_csv(const SignalSeries& sig, const std::string& path) {
  std::string out;
  out.reserve(sig.samples.size() * 40 + 16);
  out += "t,signal\n";
  for (size_t k = 0; k < sig.samples.size(); ++k) {
    out += format_double(sig.start_time + double(k) / sig.sample_rate);
    out += ',';
    out += format_double(sig.samples[k]);
    out += '\n';
  }
  write_text_file(path, out);
}

SignalSeries read_signal_csv(const std::string& path) {
  const std::string text = read_text_file(path);
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("t,signal", 0) != 0)
    throw IoError("signal csv: missing 't,signal' header in " + path);
  std::vector<double> times;
  std::vector<double> values;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw IoError("signal csv: malformed row in " + path);
    times.push_back(std::stod(line.substr(0, comma)));
    values.push_back(std::stod(line.substr(comma + 1)));
  }
  if (times.size() < 2) throw IoError("signal csv: too few samples in " + path);
  const double dt = (times.back() - times.front()) / double(times.size() - 1);
  if (!(dt > 0.0)) throw IoError("signal csv: non-increasing time axis");
  for (size_t k = 1; k < times.size(); ++k) {
    const double expect = times.front() + double(k) * dt;
    if (std::abs(times[k] - expect) > 1e-6 * std::max(1.0, std::abs(expect)))
      throw IoError("signal csv: non-uniform sampling in " + path);
  }
  SignalSeries sig;
  sig.sample_rate = 1.0 / dt;
  sig.start_time = times.front();
  sig.samples = std::move(values);
  return sig;
}

void write_signal_binary(const SignalSeries& sig, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  char header[16] = {'M', 'D', 'S', 'I', 'G', '1', '\0', '\0'};
  std::memcpy(header + 8, &sig.sample_rate, 8);
  out.write(header, 16);
  out.write(reinterpret_cast<const char*>(sig.samples.data()),
            std::streamsize(sig.samples.size() * sizeof(double)));
  out.flush();
  if (!out) throw IoError("write failed: " + path);
}

SignalSeries read_signal_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path);
  char header[16];
  in.read(header, 16);
  if (!in || std::memcmp(header, "MDSIG1\0\0", 8) != 0)
    throw IoError("signal binary: bad magic in " + path);
  SignalSeries sig;
  std::memcpy(&sig.sample_rate, header + 8, 8);
  if (!(sig.sample_rate > 0.0))
    throw IoError("signal binary: bad sample rate in " + path);
  in.seekg(0, std::ios::end);
  const auto end = in.tellg();
  in.seekg(16, std::ios::beg);
  const size_t n = size_t(end - std::streamoff(16)) / sizeof(double);
  sig.samples.resize(n);
  in.read(reinterpret_cast<char*>(sig.samples.data()),
          std::streamsize(n * sizeof(double)));
  if (!in) throw IoError("signal binary: truncated file " + path);
  return sig;
}

}  // namespace mduet

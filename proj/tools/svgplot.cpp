#include "svgplot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "util.hpp"

namespace cli {

namespace {

constexpr int kWidth = 900;
constexpr int kHeight = 540;
constexpr int kMarginLeft = 70;
constexpr int kMarginRight = 20;
constexpr int kMarginTop = 40;
constexpr int kMarginBottom = 50;

struct Range {
  double lo = 0.0, hi = 1.0;
  double span() const { return hi - lo; }
};

Range nice_range(double lo, double hi) {
  if (!(hi > lo)) {
    const double pad = std::max(1.0, std::abs(lo)) * 0.05;
    return {lo - pad, hi + pad};
  }
  const double pad = 0.03 * (hi - lo);
  return {lo - pad, hi + pad};
}

double nice_step(double span, int target_ticks) {
  const double raw = span / std::max(target_ticks, 1);
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double mult : {1.0, 2.0, 5.0, 10.0})
    if (raw <= mult * mag) return mult * mag;
  return 10.0 * mag;
}

std::string tick_text(double value) {
  // trim long representations for axis labels
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", value);
  return buf;
}

void open_svg(std::string& out, const std::string& title) {
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         std::to_string(kWidth) + "\" height=\"" + std::to_string(kHeight) +
         "\" viewBox=\"0 0 " + std::to_string(kWidth) + " " +
         std::to_string(kHeight) + "\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<text x=\"" + std::to_string(kWidth / 2) +
         "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"16\">" + title + "</text>\n";
}

void draw_axes(std::string& out, const Range& xr, const Range& yr,
               const std::string& x_label, const std::string& y_label) {
  const int x0 = kMarginLeft, x1 = kWidth - kMarginRight;
  const int y0 = kHeight - kMarginBottom, y1 = kMarginTop;
  const auto px = [&](double x) {
    return x0 + (x - xr.lo) / xr.span() * (x1 - x0);
  };
  const auto py = [&](double y) {
    return y0 - (y - yr.lo) / yr.span() * (y0 - y1);
  };

  out += "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">\n";
  const double xstep = nice_step(xr.span(), 8);
  for (double x = std::ceil(xr.lo / xstep) * xstep; x <= xr.hi + 1e-12 * xstep;
       x += xstep) {
    const double sx = px(x);
    out += "<line x1=\"" + format_double(sx) + "\" y1=\"" +
           std::to_string(y0) + "\" x2=\"" + format_double(sx) + "\" y2=\"" +
           std::to_string(y1) + "\" stroke=\"#e0e0e0\"/>\n";
    out += "<text x=\"" + format_double(sx) + "\" y=\"" +
           std::to_string(y0 + 16) + "\" text-anchor=\"middle\">" +
           tick_text(x) + "</text>\n";
  }
  const double ystep = nice_step(yr.span(), 6);
  for (double y = std::ceil(yr.lo / ystep) * ystep; y <= yr.hi + 1e-12 * ystep;
       y += ystep) {
    const double sy = py(y);
    out += "<line x1=\"" + std::to_string(x0) + "\" y1=\"" +
           format_double(sy) + "\" x2=\"" + std::to_string(x1) + "\" y2=\"" +
           format_double(sy) + "\" stroke=\"#e0e0e0\"/>\n";
    out += "<text x=\"" + std::to_string(x0 - 6) + "\" y=\"" +
           format_double(sy + 4) + "\" text-anchor=\"end\">" + tick_text(y) +
           "</text>\n";
  }
  out += "<line x1=\"" + std::to_string(x0) + "\" y1=\"" + std::to_string(y0) +
         "\" x2=\"" + std::to_string(x1) + "\" y2=\"" + std::to_string(y0) +
         "\" stroke=\"black\"/>\n";
  out += "<line x1=\"" + std::to_string(x0) + "\" y1=\"" + std::to_string(y0) +
         "\" x2=\"" + std::to_string(x0) + "\" y2=\"" + std::to_string(y1) +
         "\" stroke=\"black\"/>\n";
  out += "<text x=\"" + std::to_string((x0 + x1) / 2) + "\" y=\"" +
         std::to_string(kHeight - 12) + "\" text-anchor=\"middle\">" + x_label +
         "</text>\n";
  out += "<text x=\"16\" y=\"" + std::to_string((y0 + y1) / 2) +
         "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
         std::to_string((y0 + y1) / 2) + ")\">" + y_label + "</text>\n";
  out += "</g>\n";
}

std::string polyline(const std::vector<double>& xs, const std::vector<double>& ys,
                     const Range& xr, const Range& yr, const std::string& color,
                     double width) {
  const int x0 = kMarginLeft, x1 = kWidth - kMarginRight;
  const int y0 = kHeight - kMarginBottom, y1 = kMarginTop;
  const size_t n = std::min(xs.size(), ys.size());
  const size_t stride = std::max<size_t>(1, n / 4000);
  std::string pts;
  for (size_t i = 0; i < n; i += stride) {
    const double sx = x0 + (xs[i] - xr.lo) / xr.span() * (x1 - x0);
    const double sy = y0 - (ys[i] - yr.lo) / yr.span() * (y0 - y1);
    pts += format_double(sx) + "," + format_double(sy) + " ";
  }
  return "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"" +
         format_double(width) + "\" points=\"" + pts + "\"/>\n";
}

}  // namespace

void write_line_chart(const std::string& path, const std::string& title,
                      const std::string& x_label, const std::string& y_label,
                      const std::vector<PlotSeries>& series) {
  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo;
  double ylo = xlo, yhi = -xlo;
  for (const auto& s : series)
    for (size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      xlo = std::min(xlo, s.x[i]);
      xhi = std::max(xhi, s.x[i]);
      ylo = std::min(ylo, s.y[i]);
      yhi = std::max(yhi, s.y[i]);
    }
  if (!std::isfinite(xlo)) {
    xlo = 0.0; xhi = 1.0; ylo = 0.0; yhi = 1.0;
  }
  const Range xr = nice_range(xlo, xhi);
  const Range yr = nice_range(ylo, yhi);

  std::string out;
  open_svg(out, title);
  draw_axes(out, xr, yr, x_label, y_label);
  for (const auto& s : series) out += polyline(s.x, s.y, xr, yr, s.color, 1.5);

  int legend_y = kMarginTop + 8;
  for (const auto& s : series) {
    out += "<rect x=\"" + std::to_string(kWidth - 180) + "\" y=\"" +
           std::to_string(legend_y - 9) +
           "\" width=\"14\" height=\"4\" fill=\"" + s.color + "\"/>\n";
    out += "<text x=\"" + std::to_string(kWidth - 160) + "\" y=\"" +
           std::to_string(legend_y - 3) +
           "\" font-family=\"sans-serif\" font-size=\"12\">" + s.name +
           "</text>\n";
    legend_y += 18;
  }
  out += "</svg>\n";
  write_file(path, out);
}

void write_heatmap(const std::string& path, const std::string& title,
                   const std::string& x_label, const std::string& y_label,
                   const std::vector<double>& times,
                   const std::vector<double>& freqs,
                   const std::vector<double>& magnitudes,
                   const std::vector<PlotSeries>& overlays) {
  const size_t nt = times.size();
  const size_t nf = freqs.size();
  std::string out;
  open_svg(out, title);
  if (nt == 0 || nf == 0 || magnitudes.size() != nt * nf) {
    out += "</svg>\n";
    write_file(path, out);
    return;
  }

  const Range xr = nice_range(times.front(), times.back());
  const Range yr = nice_range(freqs.front(), freqs.back());
  draw_axes(out, xr, yr, x_label, y_label);

  double peak = 0.0;
  for (double m : magnitudes) peak = std::max(peak, m);
  if (peak <= 0.0) peak = 1.0;
  const double floor_db = -60.0;

  // downsample onto a coarse cell grid, keeping the max within each cell
  const size_t ct = std::min<size_t>(nt, 300);
  const size_t cf = std::min<size_t>(nf, 220);
  const int x0 = kMarginLeft, x1 = kWidth - kMarginRight;
  const int y0 = kHeight - kMarginBottom, y1 = kMarginTop;

  const auto color_of = [&](double mag) {
    const double db = 20.0 * std::log10(std::max(mag, peak * 1e-9) / peak);
    const double v = std::clamp(1.0 - db / floor_db, 0.0, 1.0);
    // dark blue -> cyan -> yellow ramp
    int r, g, b;
    if (v < 0.5) {
      const double w = v / 0.5;
      r = int(10 + 20 * w);
      g = int(15 + 165 * w);
      b = int(60 + 140 * w);
    } else {
      const double w = (v - 0.5) / 0.5;
      r = int(30 + 225 * w);
      g = int(180 + 60 * w);
      b = int(200 - 170 * w);
    }
    char buf[10];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
    return std::string(buf);
  };

  for (size_t i = 0; i < ct; ++i) {
    const size_t t_lo = i * nt / ct, t_hi = std::max(t_lo + 1, (i + 1) * nt / ct);
    for (size_t j = 0; j < cf; ++j) {
      const size_t f_lo = j * nf / cf,
                   f_hi = std::max(f_lo + 1, (j + 1) * nf / cf);
      double cell = 0.0;
      for (size_t it = t_lo; it < t_hi; ++it)
        for (size_t jf = f_lo; jf < f_hi; ++jf)
          cell = std::max(cell, magnitudes[it * nf + jf]);
      const double sx = x0 + double(i) / ct * (x1 - x0);
      const double sw = double(x1 - x0) / ct + 0.5;
      const double sy = y0 - double(j + 1) / cf * (y0 - y1);
      const double sh = double(y0 - y1) / cf + 0.5;
      out += "<rect x=\"" + format_double(sx) + "\" y=\"" + format_double(sy) +
             "\" width=\"" + format_double(sw) + "\" height=\"" +
             format_double(sh) + "\" fill=\"" + color_of(cell) + "\"/>\n";
    }
  }

  for (const auto& o : overlays) out += polyline(o.x, o.y, xr, yr, o.color, 0.8);
  out += "</svg>\n";
  write_file(path, out);
}

}  // namespace cli

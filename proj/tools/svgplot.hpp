#pragma once

#include <string>
#include <vector>

namespace cli {

struct PlotSeries {
  std::string name;
  std::string color;
  std::vector<double> x;
  std::vector<double> y;
};

// Simple static SVG renderers for run artifacts.
void write_line_chart(const std::string& path, const std::string& title,
                      const std::string& x_label, const std::string& y_label,
                      const std::vector<PlotSeries>& series);

// magnitudes row-major nt x nf, rendered on a dB scale; overlays are drawn
// as thin traces in the data coordinate system
void write_heatmap(const std::string& path, const std::string& title,
                   const std::string& x_label, const std::string& y_label,
                   const std::vector<double>& times,
                   const std::vector<double>& freqs,
                   const std::vector<double>& magnitudes,
                   const std::vector<PlotSeries>& overlays);

}  // namespace cli

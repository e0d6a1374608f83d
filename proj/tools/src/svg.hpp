#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace ggflow::cli {

/// Minimal line-plot writer: polylines on a framed canvas with axis ranges.
class SvgPlot {
 public:
  SvgPlot(std::string title, std::string xlabel, std::string ylabel);

  void add_series(std::vector<double> x, std::vector<double> y, std::string color);
  /// Log-scaled x axis (positive data only).
  void set_log_x(bool on) { log_x_ = on; }

  void write(std::ostream& out) const;

 private:
  struct Series {
    std::vector<double> x;
    std::vector<double> y;
    std::string color;
  };
  std::string title_;
  std::string xlabel_;
  std::string ylabel_;
  std::vector<Series> series_;
  bool log_x_ = false;
};

/// Grey-scale raster of an n x n grid, row-major, first index along x.
void write_heatmap(std::ostream& out, const std::vector<double>& values, int n, const std::string& title);

}  // namespace ggflow::cli

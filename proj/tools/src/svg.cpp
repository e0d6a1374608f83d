#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace ggflow::cli {

namespace {

constexpr double kW = 640.0;
constexpr double kH = 400.0;
constexpr double kMargin = 56.0;

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (const char c : s) {
    switch (c) {
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '&':
        out += "&amp;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

}  // namespace

SvgPlot::SvgPlot(std::string title, std::string xlabel, std::string ylabel)
    : title_(std::move(title)), xlabel_(std::move(xlabel)), ylabel_(std::move(ylabel)) {}

void SvgPlot::add_series(std::vector<double> x, std::vector<double> y, std::string color) {
  series_.push_back({std::move(x), std::move(y), std::move(color)});
}

void SvgPlot::write(std::ostream& out) const {
  auto tx = [&](double x) { return log_x_ ? std::log10(x) : x; };
  double x0 = std::numeric_limits<double>::infinity();
  double x1 = -x0;
  double y0 = x0;
  double y1 = -x0;
  for (const auto& s : series_) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.y[i]) || (log_x_ && !(s.x[i] > 0.0))) continue;
      x0 = std::min(x0, tx(s.x[i]));
      x1 = std::max(x1, tx(s.x[i]));
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  }
  if (!std::isfinite(x0)) {
    x0 = 0.0;
    x1 = 1.0;
    y0 = 0.0;
    y1 = 1.0;
  }
  if (x1 - x0 < 1e-12) x1 = x0 + 1.0;
  if (y1 - y0 < 1e-12) {
    y0 -= 0.5;
    y1 += 0.5;
  }
  const double pw = kW - 2 * kMargin;
  const double ph = kH - 2 * kMargin;
  auto px = [&](double x) { return kMargin + (tx(x) - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return kH - kMargin - (y - y0) / (y1 - y0) * ph; };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  out << "<text x=\"" << kW / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" << escape(title_)
      << "</text>\n";
  out << "<text x=\"" << kW / 2 << "\" y=\"" << kH - 12 << "\" text-anchor=\"middle\" font-size=\"12\">"
      << escape(xlabel_) << (log_x_ ? " (log)" : "") << "</text>\n";
  out << "<text x=\"14\" y=\"" << kH / 2 << "\" font-size=\"12\" transform=\"rotate(-90 14 " << kH / 2 << ")\">"
      << escape(ylabel_) << "</text>\n";
  const std::string xl = log_x_ ? num(std::pow(10.0, x0)) : num(x0);
  const std::string xr = log_x_ ? num(std::pow(10.0, x1)) : num(x1);
  out << "<text x=\"" << kMargin << "\" y=\"" << kH - kMargin + 16 << "\" font-size=\"10\">" << xl << "</text>\n";
  out << "<text x=\"" << kW - kMargin << "\" y=\"" << kH - kMargin + 16
      << "\" font-size=\"10\" text-anchor=\"end\">" << xr << "</text>\n";
  out << "<text x=\"" << kMargin - 4 << "\" y=\"" << kH - kMargin << "\" font-size=\"10\" text-anchor=\"end\">"
      << num(y0) << "</text>\n";
  out << "<text x=\"" << kMargin - 4 << "\" y=\"" << kMargin + 10 << "\" font-size=\"10\" text-anchor=\"end\">"
      << num(y1) << "</text>\n";
  for (const auto& s : series_) {
    out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
    // Thin long series to at most ~2000 vertices.
    const std::size_t m = std::min(s.x.size(), s.y.size());
    const std::size_t stride = std::max<std::size_t>(1, m / 2000);
    for (std::size_t i = 0; i < m; i += stride) {
      if (!std::isfinite(s.y[i]) || (log_x_ && !(s.x[i] > 0.0))) continue;
      out << num(px(s.x[i])) << ',' << num(py(s.y[i])) << ' ';
    }
    if (m > 0 && (m - 1) % stride != 0 && std::isfinite(s.y[m - 1])) {
      out << num(px(s.x[m - 1])) << ',' << num(py(s.y[m - 1]));
    }
    out << "\"/>\n";
  }
  out << "</svg>\n";
}

void write_heatmap(std::ostream& out, const std::vector<double>& values, int n, const std::string& title) {
  const int cells = std::min(n, 64);
  const int stride = std::max(1, n / cells);
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it;
  const double span = std::max(*hi_it - lo, 1e-300);
  const double side = 384.0 / cells;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"420\" height=\"440\">\n";
  out << "<text x=\"210\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << escape(title) << "</text>\n";
  for (int i = 0; i < cells; ++i) {
    for (int j = 0; j < cells; ++j) {
      const double v = values[static_cast<std::size_t>(i * stride) * n + static_cast<std::size_t>(j * stride)];
      const int g = static_cast<int>(std::lround(255.0 * (v - lo) / span));
      // x along the horizontal axis, y upwards.
      out << "<rect x=\"" << num(18 + i * side) << "\" y=\"" << num(36 + (cells - 1 - j) * side) << "\" width=\""
          << num(side) << "\" height=\"" << num(side) << "\" fill=\"rgb(" << g << ',' << g << ',' << g << ")\"/>\n";
    }
  }
  out << "</svg>\n";
}

}  // namespace ggflow::cli

#include "dmsgd/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

namespace dmsgd {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  bool log = false;

  double map(double v, double px_lo, double px_hi) const {
    double t = log ? std::log10(v) : v;
    double a = log ? std::log10(lo) : lo;
    double b = log ? std::log10(hi) : hi;
    if (b <= a) b = a + 1.0;
    return px_lo + (t - a) / (b - a) * (px_hi - px_lo);
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

void write_line_chart(const std::string& path, const std::string& title,
                      const std::string& xlabel, const std::string& ylabel,
                      const std::vector<ChartSeries>& series, bool log_x,
                      bool log_y) {
  const double w = 720, h = 480;
  const double ml = 70, mr = 20, mt = 40, mb = 50;

  Axis ax{std::numeric_limits<double>::max(), std::numeric_limits<double>::lowest(), log_x};
  Axis ay{std::numeric_limits<double>::max(), std::numeric_limits<double>::lowest(), log_y};
  for (const auto& s : series) {
    for (std::size_t j = 0; j < s.x.size(); ++j) {
      const double xv = s.x[j], yv = s.y[j];
      if (log_x && xv <= 0.0) continue;
      if (log_y && yv <= 0.0) continue;
      ax.lo = std::min(ax.lo, xv);
      ax.hi = std::max(ax.hi, xv);
      ay.lo = std::min(ay.lo, yv);
      ay.hi = std::max(ay.hi, yv);
    }
  }
  if (ax.lo > ax.hi) { ax.lo = log_x ? 1.0 : 0.0; ax.hi = log_x ? 10.0 : 1.0; }
  if (ay.lo > ay.hi) { ay.lo = log_y ? 1.0 : 0.0; ay.hi = log_y ? 10.0 : 1.0; }

  std::ofstream out(path);
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='"
      << h << "' viewBox='0 0 " << w << " " << h << "'>\n";
  out << "<rect width='100%' height='100%' fill='white'/>\n";
  out << "<text x='" << w / 2 << "' y='24' text-anchor='middle' "
      << "font-family='sans-serif' font-size='16'>" << title << "</text>\n";
  out << "<rect x='" << ml << "' y='" << mt << "' width='" << w - ml - mr
      << "' height='" << h - mt - mb
      << "' fill='none' stroke='#333' stroke-width='1'/>\n";
  out << "<text x='" << w / 2 << "' y='" << h - 12
      << "' text-anchor='middle' font-family='sans-serif' font-size='12'>"
      << xlabel << "</text>\n";
  out << "<text x='16' y='" << h / 2
      << "' text-anchor='middle' font-family='sans-serif' font-size='12' "
      << "transform='rotate(-90 16 " << h / 2 << ")'>" << ylabel << "</text>\n";

  // corner tick labels
  out << "<text x='" << ml << "' y='" << h - mb + 16
      << "' font-family='sans-serif' font-size='10'>" << fmt(ax.lo) << "</text>\n";
  out << "<text x='" << w - mr << "' y='" << h - mb + 16
      << "' text-anchor='end' font-family='sans-serif' font-size='10'>"
      << fmt(ax.hi) << "</text>\n";
  out << "<text x='" << ml - 4 << "' y='" << h - mb
      << "' text-anchor='end' font-family='sans-serif' font-size='10'>"
      << fmt(ay.lo) << "</text>\n";
  out << "<text x='" << ml - 4 << "' y='" << mt + 10
      << "' text-anchor='end' font-family='sans-serif' font-size='10'>"
      << fmt(ay.hi) << "</text>\n";

  int color = 0;
  for (const auto& s : series) {
    const char* stroke = kPalette[color % 8];
    out << "<polyline fill='none' stroke='" << stroke
        << "' stroke-width='1.5' points='";
    for (std::size_t j = 0; j < s.x.size(); ++j) {
      if (log_x && s.x[j] <= 0.0) continue;
      if (log_y && s.y[j] <= 0.0) continue;
      const double px = ax.map(s.x[j], ml, w - mr);
      const double py = ay.map(s.y[j], h - mb, mt);
      out << fmt(px) << "," << fmt(py) << " ";
    }
    out << "'/>\n";
    out << "<text x='" << w - mr - 8 << "' y='" << mt + 16 + 16 * color
        << "' text-anchor='end' font-family='sans-serif' font-size='12' fill='"
        << stroke << "'>" << s.label << "</text>\n";
    ++color;
  }
  out << "</svg>\n";
}

}  // namespace dmsgd

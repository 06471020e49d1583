#pragma once

#include <string>
#include <vector>

namespace dmsgd {

struct ChartSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

// Minimal static vector chart: polylines on optionally log-scaled axes.
void write_line_chart(const std::string& path, const std::string& title,
                      const std::string& xlabel, const std::string& ylabel,
                      const std::vector<ChartSeries>& series, bool log_x,
                      bool log_y);

}  // namespace dmsgd

#pragma once

#include <string>
#include <vector>

namespace xdaudit::svg {

struct SeriesPoint {
  double x = 0.0;
  double y = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

struct Series {
  std::string name;
  std::string color;
  bool triangle_marker = false;  // circles for linear models, triangles for MLPs
  std::vector<SeriesPoint> points;
};

struct ChartSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
};

// Deterministic standalone SVG line chart with CI whiskers. Every marker
// carries a data-y attribute holding the exact series value so downstream
// checks can read plotted numbers back.
std::string render_line_chart(const ChartSpec& spec, const std::vector<Series>& series);

}  // namespace xdaudit::svg

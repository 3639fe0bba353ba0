#include "xdaudit/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "xdaudit/dataset.hpp"

namespace xdaudit::svg {

namespace {

constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 64, kRight = 150, kTop = 44, kBottom = 52;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string fmt_tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

}  // namespace

std::string render_line_chart(const ChartSpec& spec, const std::vector<Series>& series) {
  double x_min = 0.0, x_max = 1.0, y_min = 0.0, y_max = 1.0;
  bool first = true;
  for (const auto& s : series) {
    for (const auto& p : s.points) {
      if (first) {
        x_min = x_max = p.x;
        y_min = std::min(0.0, p.ci_low);
        y_max = p.ci_high;
        first = false;
      }
      x_min = std::min(x_min, p.x);
      x_max = std::max(x_max, p.x);
      y_min = std::min({y_min, p.ci_low, p.y});
      y_max = std::max({y_max, p.ci_high, p.y});
    }
  }
  if (x_max == x_min) {
    x_min -= 0.5;
    x_max += 0.5;
  }
  if (y_max == y_min) y_max = y_min + 1.0;
  y_max += (y_max - y_min) * 0.08;

  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto sx = [&](double x) { return kLeft + (x - x_min) / (x_max - x_min) * plot_w; };
  auto sy = [&](double y) {
    return kTop + plot_h - (y - y_min) / (y_max - y_min) * plot_h;
  };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << ' '
      << kHeight << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << fmt(kLeft + plot_w / 2) << "\" y=\"24\" font-size=\"15\" "
         "text-anchor=\"middle\" font-family=\"sans-serif\">"
      << spec.title << "</text>\n";

  // Axes, ticks and light gridlines.
  for (int i = 0; i <= 5; ++i) {
    const double fy = y_min + (y_max - y_min) * i / 5.0;
    const double py = sy(fy);
    out << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(py) << "\" x2=\""
        << fmt(kLeft + plot_w) << "\" y2=\"" << fmt(py)
        << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    out << "<text x=\"" << fmt(kLeft - 8) << "\" y=\"" << fmt(py + 4)
        << "\" font-size=\"11\" text-anchor=\"end\" font-family=\"sans-serif\">"
        << fmt_tick(fy) << "</text>\n";
  }
  for (int i = 0; i <= 5; ++i) {
    const double fx = x_min + (x_max - x_min) * i / 5.0;
    const double px = sx(fx);
    out << "<line x1=\"" << fmt(px) << "\" y1=\"" << fmt(kTop + plot_h)
        << "\" x2=\"" << fmt(px) << "\" y2=\"" << fmt(kTop + plot_h + 5)
        << "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
    out << "<text x=\"" << fmt(px) << "\" y=\"" << fmt(kTop + plot_h + 18)
        << "\" font-size=\"11\" text-anchor=\"middle\" font-family=\"sans-serif\">"
        << fmt_tick(fx) << "</text>\n";
  }
  out << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(kTop) << "\" x2=\""
      << fmt(kLeft) << "\" y2=\"" << fmt(kTop + plot_h)
      << "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
  out << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(kTop + plot_h)
      << "\" x2=\"" << fmt(kLeft + plot_w) << "\" y2=\"" << fmt(kTop + plot_h)
      << "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
  out << "<text x=\"" << fmt(kLeft + plot_w / 2) << "\" y=\""
      << fmt(kHeight - 14)
      << "\" font-size=\"12\" text-anchor=\"middle\" font-family=\"sans-serif\">"
      << spec.x_label << "</text>\n";
  out << "<text x=\"18\" y=\"" << fmt(kTop + plot_h / 2)
      << "\" font-size=\"12\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "transform=\"rotate(-90 18 "
      << fmt(kTop + plot_h / 2) << ")\">" << spec.y_label << "</text>\n";

  for (const auto& s : series) {
    // CI whiskers.
    for (const auto& p : s.points) {
      const double px = sx(p.x);
      out << "<line x1=\"" << fmt(px) << "\" y1=\"" << fmt(sy(p.ci_low))
          << "\" x2=\"" << fmt(px) << "\" y2=\"" << fmt(sy(p.ci_high))
          << "\" stroke=\"" << s.color << "\" stroke-width=\"1\" opacity=\"0.7\"/>\n";
    }
    if (s.points.size() > 1) {
      out << "<polyline fill=\"none\" stroke=\"" << s.color
          << "\" stroke-width=\"1.5\" points=\"";
      for (const auto& p : s.points) out << fmt(sx(p.x)) << ',' << fmt(sy(p.y)) << ' ';
      out << "\"/>\n";
    }
    for (const auto& p : s.points) {
      const double px = sx(p.x), py = sy(p.y);
      if (s.triangle_marker) {
        out << "<polygon fill=\"" << s.color << "\" data-series=\"" << s.name
            << "\" data-x=\"" << format_double(p.x) << "\" data-y=\""
            << format_double(p.y) << "\" points=\"" << fmt(px) << ','
            << fmt(py - 5) << ' ' << fmt(px - 4.5) << ',' << fmt(py + 3.5) << ' '
            << fmt(px + 4.5) << ',' << fmt(py + 3.5) << "\"/>\n";
      } else {
        out << "<circle fill=\"" << s.color << "\" data-series=\"" << s.name
            << "\" data-x=\"" << format_double(p.x) << "\" data-y=\""
            << format_double(p.y) << "\" cx=\"" << fmt(px) << "\" cy=\""
            << fmt(py) << "\" r=\"4\"/>\n";
      }
    }
  }

  // Legend.
  double ly = kTop + 6;
  const double lx = kLeft + plot_w + 16;
  for (const auto& s : series) {
    if (s.triangle_marker) {
      out << "<polygon fill=\"" << s.color << "\" points=\"" << fmt(lx + 5) << ','
          << fmt(ly - 5) << ' ' << fmt(lx + 0.5) << ',' << fmt(ly + 3.5) << ' '
          << fmt(lx + 9.5) << ',' << fmt(ly + 3.5) << "\"/>\n";
    } else {
      out << "<circle fill=\"" << s.color << "\" cx=\"" << fmt(lx + 5) << "\" cy=\""
          << fmt(ly) << "\" r=\"4\"/>\n";
    }
    out << "<text x=\"" << fmt(lx + 16) << "\" y=\"" << fmt(ly + 4)
        << "\" font-size=\"11\" font-family=\"sans-serif\">" << s.name
        << "</text>\n";
    ly += 18;
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace xdaudit::svg

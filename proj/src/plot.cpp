// Copyright (c) 2026, cotvars contributors
// SPDX-License-Identifier: Apache-2.0

#include "cotvars/plot.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace cotvars {

namespace {

constexpr double kW = 520, kH = 340, kLeft = 60, kRight = 20, kTop = 36, kBottom = 48;
constexpr const char* kColours[] = {"steelblue", "firebrick", "seagreen", "darkorange", "purple", "dimgray"};

struct Frame {
  double plot_w = kW - kLeft - kRight;
  double plot_h = kH - kTop - kBottom;
  double y_max = 1.0;
  double y(double v) const { return kTop + plot_h * (1.0 - v / y_max); }
};

void open_svg(std::ostringstream& s, const std::string& title, const Frame& f) {
  s << std::fixed << std::setprecision(2);
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH << "\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << kW / 2 << "\" y=\"20\" font-size=\"14\" text-anchor=\"middle\">" << xml_escape(title)
    << "</text>\n";
  s << "<line x1=\"" << kLeft << "\" y1=\"" << f.y(0) << "\" x2=\"" << kLeft + f.plot_w << "\" y2=\"" << f.y(0)
    << "\" stroke=\"black\"/>\n";
  s << "<line x1=\"" << kLeft << "\" y1=\"" << f.y(0) << "\" x2=\"" << kLeft << "\" y2=\"" << f.y(f.y_max)
    << "\" stroke=\"black\"/>\n";
  for (double t : {0.0, 0.5, 1.0}) {
    const double v = t * f.y_max;
    s << "<text x=\"" << kLeft - 6 << "\" y=\"" << f.y(v) + 4 << "\" font-size=\"11\" text-anchor=\"end\">";
    if (f.y_max <= 1.0) {
      s << std::setprecision(2) << v;
    } else {
      s << std::setprecision(0) << v << std::setprecision(2);
    }
    s << "</text>\n";
  }
}

}  // namespace

std::string xml_escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string line_plot_svg(const std::string& title, const std::string& x_title, const std::vector<std::string>& x_labels,
                          const std::vector<PlotSeries>& series, double y_max) {
  Frame f;
  f.y_max = y_max > 0 ? y_max : 1.0;
  std::ostringstream s;
  open_svg(s, title, f);
  const std::size_t n = x_labels.size();
  auto x = [&](std::size_t i) { return n <= 1 ? kLeft + f.plot_w / 2 : kLeft + f.plot_w * i / (n - 1); };
  for (std::size_t i = 0; i < n; ++i) {
    s << "<text x=\"" << x(i) << "\" y=\"" << f.y(0) + 16 << "\" font-size=\"11\" text-anchor=\"middle\">"
      << xml_escape(x_labels[i]) << "</text>\n";
  }
  s << "<text x=\"" << kLeft + f.plot_w / 2 << "\" y=\"" << kH - 8 << "\" font-size=\"12\" text-anchor=\"middle\">"
    << xml_escape(x_title) << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const char* colour = kColours[k % std::size(kColours)];
    std::string points;
    auto flush = [&] {
      if (!points.empty()) {
        s << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"2\" points=\"" << points << "\"/>\n";
      }
      points.clear();
    };
    for (std::size_t i = 0; i < std::min(n, series[k].values.size()); ++i) {
      const double v = series[k].values[i];
      if (std::isnan(v)) {
        flush();
        continue;
      }
      std::ostringstream p;
      p << std::fixed << std::setprecision(2) << x(i) << ',' << f.y(std::clamp(v, 0.0, f.y_max)) << ' ';
      points += p.str();
      s << "<circle cx=\"" << x(i) << "\" cy=\"" << f.y(std::clamp(v, 0.0, f.y_max)) << "\" r=\"3\" fill=\"" << colour
        << "\"/>\n";
    }
    flush();
    s << "<text x=\"" << kLeft + 10 << "\" y=\"" << kTop + 12 + 14 * k << "\" font-size=\"11\" fill=\"" << colour
      << "\">" << xml_escape(series[k].name) << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

std::string bar_chart_svg(const std::string& title, const std::vector<std::string>& labels,
                          const std::vector<double>& values) {
  Frame f;
  double hi = 0;
  for (double v : values) hi = std::max(hi, v);
  f.y_max = hi > 0 ? hi : 1.0;
  std::ostringstream s;
  open_svg(s, title, f);
  const std::size_t n = std::min(labels.size(), values.size());
  const double slot = n == 0 ? f.plot_w : f.plot_w / n;
  for (std::size_t i = 0; i < n; ++i) {
    const double x0 = kLeft + slot * i + slot * 0.15;
    const double top = f.y(values[i]);
    s << "<rect x=\"" << x0 << "\" y=\"" << top << "\" width=\"" << slot * 0.7 << "\" height=\"" << f.y(0) - top
      << "\" fill=\"" << kColours[0] << "\"/>\n";
    s << "<text x=\"" << x0 + slot * 0.35 << "\" y=\"" << top - 4 << "\" font-size=\"10\" text-anchor=\"middle\">"
      << std::setprecision(0) << values[i] << std::setprecision(2) << "</text>\n";
    s << "<text x=\"" << x0 + slot * 0.35 << "\" y=\"" << f.y(0) + 16
      << "\" font-size=\"11\" text-anchor=\"middle\">" << xml_escape(labels[i]) << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

}  // namespace cotvars

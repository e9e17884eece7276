// Copyright (c) 2026, cotvars contributors
// SPDX-License-Identifier: Apache-2.0
//
// Minimal SVG charts for reports. Values are plotted on a fixed [0, y_max] axis.

#pragma once

#include <string>
#include <vector>

namespace cotvars {

struct PlotSeries {
  std::string name;
  std::vector<double> values;  // one per x label; NaN leaves a gap
};

std::string line_plot_svg(const std::string& title, const std::string& x_title, const std::vector<std::string>& x_labels,
                          const std::vector<PlotSeries>& series, double y_max = 1.0);

std::string bar_chart_svg(const std::string& title, const std::vector<std::string>& labels,
                          const std::vector<double>& values);

/// Escapes &, <, > and quotes for SVG/XML text.
std::string xml_escape(const std::string& text);

}  // namespace cotvars

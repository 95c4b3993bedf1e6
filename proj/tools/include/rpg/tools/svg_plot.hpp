#pragma once

#include <optional>
#include <string>
#include <vector>

namespace rpg::tools {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct ChartSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
  std::optional<double> reference_y;  // dashed horizontal line
  bool log_y = false;                 // non-positive values are dropped
  int width = 720;
  int height = 420;
};

// Self-contained SVG document. Non-finite points are skipped; a legend is drawn
// when there is more than one series.
std::string render_line_chart(const ChartSpec& spec);

std::string xml_escape(const std::string& s);

}  // namespace rpg::tools

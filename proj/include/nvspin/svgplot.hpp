#pragma once

#include <string>
#include <vector>

namespace nvspin {

struct PlotSeries {
  std::vector<double> x, y;
  std::string label;
  std::string color = "#1f6fb2";
  bool line = true;
  bool points = false;
};

struct PlotPanel {
  std::vector<PlotSeries> series;
  std::string title, xlabel, ylabel;
  bool logy = false;
};

// Self-contained SVG figure with the panels laid out in columns.
void write_svg(const std::string& path, const std::vector<PlotPanel>& panels,
               int columns = 2);

}  // namespace nvspin

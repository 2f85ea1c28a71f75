#include "nvspin/svgplot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace nvspin {

namespace {

constexpr int kPanelW = 440;
constexpr int kPanelH = 340;
constexpr int kMarginL = 62, kMarginR = 16, kMarginT = 30, kMarginB = 46;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

// 1-2-5 tick ladder.
std::vector<double> nice_ticks(double lo, double hi, int target = 6) {
  std::vector<double> ticks;
  if (!(hi > lo)) {
    ticks.push_back(lo);
    return ticks;
  }
  const double raw = (hi - lo) / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (raw <= m * mag) {
      step = m * mag;
      break;
    }
  }
  const double first = std::ceil(lo / step) * step;
  for (double t = first; t <= hi + 0.5 * step; t += step) {
    ticks.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
  }
  return ticks;
}

void render_panel(std::ostringstream& os, const PlotPanel& panel, int x0,
                  int y0) {
  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo;
  double ylo = xlo, yhi = -xlo;
  for (const auto& s : panel.series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const double yv = panel.logy ? (s.y[i] > 0 ? std::log10(s.y[i])
                                                 : std::numeric_limits<
                                                       double>::quiet_NaN())
                                   : s.y[i];
      if (!std::isfinite(s.x[i]) || !std::isfinite(yv)) continue;
      xlo = std::min(xlo, s.x[i]);
      xhi = std::max(xhi, s.x[i]);
      ylo = std::min(ylo, yv);
      yhi = std::max(yhi, yv);
    }
  }
  if (!std::isfinite(xlo) || !std::isfinite(ylo)) {
    throw std::invalid_argument("write_svg: no finite data to plot");
  }
  if (xhi == xlo) xhi = xlo + 1.0;
  if (yhi == ylo) {
    yhi += 0.5;
    ylo -= 0.5;
  }
  const double ypad = 0.06 * (yhi - ylo);
  ylo -= ypad;
  yhi += ypad;

  const int plot_x = x0 + kMarginL, plot_y = y0 + kMarginT;
  const int plot_w = kPanelW - kMarginL - kMarginR;
  const int plot_h = kPanelH - kMarginT - kMarginB;
  auto sx = [&](double v) {
    return plot_x + plot_w * (v - xlo) / (xhi - xlo);
  };
  auto sy = [&](double v) {
    const double t = panel.logy ? std::log10(v) : v;
    return plot_y + plot_h * (1.0 - (t - ylo) / (yhi - ylo));
  };

  os << "<rect x='" << plot_x << "' y='" << plot_y << "' width='" << plot_w
     << "' height='" << plot_h
     << "' fill='white' stroke='#444' stroke-width='1'/>\n";
  os << "<text x='" << x0 + kPanelW / 2 << "' y='" << y0 + 18
     << "' text-anchor='middle' font-size='13' font-weight='bold'>"
     << panel.title << "</text>\n";

  for (double t : nice_ticks(xlo, xhi)) {
    const double px = sx(t);
    os << "<line x1='" << fmt(px) << "' y1='" << plot_y + plot_h << "' x2='"
       << fmt(px) << "' y2='" << plot_y + plot_h + 4
       << "' stroke='#444'/>\n";
    os << "<text x='" << fmt(px) << "' y='" << plot_y + plot_h + 17
       << "' text-anchor='middle' font-size='10'>" << fmt(t) << "</text>\n";
  }
  for (double t : nice_ticks(ylo, yhi)) {
    const double vy = panel.logy ? std::pow(10.0, t) : t;
    const double py =
        plot_y + plot_h * (1.0 - (t - ylo) / (yhi - ylo));
    os << "<line x1='" << plot_x - 4 << "' y1='" << fmt(py) << "' x2='"
       << plot_x << "' y2='" << fmt(py) << "' stroke='#444'/>\n";
    os << "<text x='" << plot_x - 7 << "' y='" << fmt(py + 3.5)
       << "' text-anchor='end' font-size='10'>"
       << (panel.logy ? fmt(vy) : fmt(t)) << "</text>\n";
  }
  os << "<text x='" << plot_x + plot_w / 2 << "' y='" << y0 + kPanelH - 8
     << "' text-anchor='middle' font-size='12'>" << panel.xlabel
     << "</text>\n";
  os << "<text x='" << x0 + 16 << "' y='" << plot_y + plot_h / 2
     << "' text-anchor='middle' font-size='12' transform='rotate(-90 "
     << x0 + 16 << ' ' << plot_y + plot_h / 2 << ")'>" << panel.ylabel
     << "</text>\n";

  int legend_row = 0;
  for (const auto& s : panel.series) {
    std::ostringstream pts;
    bool pen_up = true;
    std::ostringstream markers;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (panel.logy && !(s.y[i] > 0.0)) {
        pen_up = true;
        continue;
      }
      const double px = sx(s.x[i]);
      const double py = sy(s.y[i]);
      if (s.line) {
        pts << (pen_up ? "M" : "L") << fmt(px) << ' ' << fmt(py) << ' ';
        pen_up = false;
      }
      if (s.points) {
        markers << "<circle cx='" << fmt(px) << "' cy='" << fmt(py)
                << "' r='2.4' fill='" << s.color << "'/>\n";
      }
    }
    if (s.line) {
      os << "<path d='" << pts.str() << "' fill='none' stroke='" << s.color
         << "' stroke-width='1.3'/>\n";
    }
    os << markers.str();
    if (!s.label.empty()) {
      const int ly = plot_y + 14 + 14 * legend_row++;
      os << "<line x1='" << plot_x + plot_w - 110 << "' y1='" << ly - 4
         << "' x2='" << plot_x + plot_w - 92 << "' y2='" << ly - 4
         << "' stroke='" << s.color << "' stroke-width='2'/>\n";
      os << "<text x='" << plot_x + plot_w - 88 << "' y='" << ly
         << "' font-size='10'>" << s.label << "</text>\n";
    }
  }
}

}  // namespace

void write_svg(const std::string& path, const std::vector<PlotPanel>& panels,
               int columns) {
  if (panels.empty()) {
    throw std::invalid_argument("write_svg: no panels");
  }
  columns = std::max(1, std::min<int>(columns, panels.size()));
  const int rows = (static_cast<int>(panels.size()) + columns - 1) / columns;
  const int width = columns * kPanelW;
  const int height = rows * kPanelH;

  std::ostringstream os;
  os << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width
     << "' height='" << height << "' viewBox='0 0 " << width << ' ' << height
     << "' font-family='sans-serif'>\n";
  os << "<rect width='100%' height='100%' fill='white'/>\n";
  for (std::size_t i = 0; i < panels.size(); ++i) {
    const int col = static_cast<int>(i) % columns;
    const int row = static_cast<int>(i) / columns;
    render_panel(os, panels[i], col * kPanelW, row * kPanelH);
  }
  os << "</svg>\n";

  std::ofstream file(path);
  if (!file) throw std::runtime_error("cannot open for writing: " + path);
  file << os.str();
  if (!file) throw std::runtime_error("write failed: " + path);
}

}  // namespace nvspin

#pragma once

#include <algorithm>
#include <array>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "pyrflow/errors.hpp"
#include "pyrflow/io/csv.hpp"

namespace pyrflow::io {

inline constexpr int kPlotSize = 480;
inline constexpr int kPlotMargin = 40;

inline const char* stage_colour(int stage) {
  static constexpr std::array<const char*, 6> palette{"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                                       "#8c564b"};
  return palette[static_cast<std::size_t>(stage) % palette.size()];
}

/// Polyline of one particle over consecutive rows of one stage.
struct PlotSegment {
  int stage = 0;
  std::vector<std::array<double, 2>> points;
};

/// Parses a point-cloud trajectory CSV into per-particle, per-stage segments.
/// Only 2-channel states can be drawn.
inline std::vector<PlotSegment> read_plot_segments(std::istream& is) {
  const CsvTable table = read_csv(is);
  if (table.header.empty()) return {};
  if (table.header.size() < 3 || table.header[0] != "step" || table.header[1] != "t" || table.header[2] != "stage") {
    throw IoError("trajectory CSV must start with step,t,stage");
  }
  if (std::find(table.header.begin(), table.header.end(), "mean") != table.header.end()) {
    throw DimensionError("trajectory holds summary statistics of a grid state; only 2D point states can be plotted");
  }
  std::size_t particles = 0;
  std::size_t channels = 0;
  for (std::size_t i = 3; i < table.header.size(); ++i) {
    const std::string& h = table.header[i];
    const auto dot = h.find('.');
    if (h.empty() || h[0] != 'p' || dot == std::string::npos) throw IoError("unexpected column '" + h + "'");
    particles = std::max(particles, static_cast<std::size_t>(parse_double(h.substr(1, dot - 1))) + 1);
    channels = std::max(channels, static_cast<std::size_t>(parse_double(h.substr(dot + 1))) + 1);
  }
  if (particles > 0 && channels != 2) {
    throw DimensionError("cannot plot " + std::to_string(channels) + "-dimensional states; expected 2");
  }
  if (particles * channels + 3 != table.header.size()) throw IoError("trajectory columns are not a full p{i}.{c} grid");

  std::vector<PlotSegment> segs;
  std::size_t r = 0;
  while (r < table.rows.size()) {
    const int stage = static_cast<int>(parse_double(table.rows[r][2]));
    std::size_t end = r;
    while (end < table.rows.size() && static_cast<int>(parse_double(table.rows[end][2])) == stage) ++end;
    for (std::size_t p = 0; p < particles; ++p) {
      PlotSegment s{stage, {}};
      for (std::size_t i = r; i < end; ++i) {
        s.points.push_back({parse_double(table.rows[i][3 + 2 * p]), parse_double(table.rows[i][4 + 2 * p])});
      }
      segs.push_back(std::move(s));
    }
    r = end;
  }
  return segs;
}

/// Square plot of the segments, fitted to their bounding box (or [-1, 1]^2
/// when there is nothing to draw), with x/y axes through the origin.
inline void write_svg(std::ostream& os, const std::vector<PlotSegment>& segs) {
  double lo_x = -1.0, hi_x = 1.0, lo_y = -1.0, hi_y = 1.0;
  for (const auto& s : segs) {
    for (const auto& p : s.points) {
      lo_x = std::min(lo_x, p[0]);
      hi_x = std::max(hi_x, p[0]);
      lo_y = std::min(lo_y, p[1]);
      hi_y = std::max(hi_y, p[1]);
    }
  }
  const double inner = kPlotSize - 2 * kPlotMargin;
  const double span = std::max(hi_x - lo_x, hi_y - lo_y);
  auto px = [&](double x) { return kPlotMargin + (x - lo_x) / span * inner; };
  auto py = [&](double y) { return kPlotSize - kPlotMargin - (y - lo_y) / span * inner; };

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kPlotSize << "\" height=\"" << kPlotSize
     << "\" viewBox=\"0 0 " << kPlotSize << ' ' << kPlotSize << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<g stroke=\"#444\" stroke-width=\"1\">\n";
  os << "<line x1=\"" << format_short(px(lo_x)) << "\" y1=\"" << format_short(py(0.0)) << "\" x2=\""
     << format_short(px(lo_x + span)) << "\" y2=\"" << format_short(py(0.0)) << "\"/>\n";
  os << "<line x1=\"" << format_short(px(0.0)) << "\" y1=\"" << format_short(py(lo_y)) << "\" x2=\""
     << format_short(px(0.0)) << "\" y2=\"" << format_short(py(lo_y + span)) << "\"/>\n";
  os << "</g>\n";
  for (const auto& s : segs) {
    if (s.points.empty()) continue;
    os << "<polyline fill=\"none\" stroke=\"" << stage_colour(s.stage) << "\" stroke-width=\"0.6\" points=\"";
    for (std::size_t i = 0; i < s.points.size(); ++i) {
      if (i) os << ' ';
      os << format_short(px(s.points[i][0])) << ',' << format_short(py(s.points[i][1]));
    }
    os << "\"/>\n";
  }
  os << "</svg>\n";
}

inline std::string plot_trajectory_csv(std::istream& csv) {
  std::ostringstream os;
  write_svg(os, read_plot_segments(csv));
  return os.str();
}

}  // namespace pyrflow::io

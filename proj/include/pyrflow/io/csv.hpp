#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "pyrflow/errors.hpp"
#include "pyrflow/sampler.hpp"

namespace pyrflow::io {

/// Shortest representation that round-trips.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

/// Four decimals with trailing zeros trimmed, keeping at least one:
/// 0.66666 -> "0.6667", 0.8 -> "0.8", 1 -> "1.0".
inline std::string format_short(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  std::string s(buf);
  if (s == "-0.0000") s = "0.0000";
  while (s.size() > 2 && s.back() == '0' && s[s.size() - 2] != '.') s.pop_back();
  return s;
}

inline std::string join(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out += ',';
    out += cells[i];
  }
  return out;
}

inline std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

inline double parse_double(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) throw IoError("not a number: '" + s + "'");
  return v;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

inline CsvTable read_csv(std::istream& is) {
  CsvTable t;
  std::string line;
  bool first = true;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split(line);
    if (first) {
      t.header = std::move(cells);
      first = false;
      continue;
    }
    if (cells.size() != t.header.size()) {
      throw IoError("row has " + std::to_string(cells.size()) + " cells, header has " +
                    std::to_string(t.header.size()));
    }
    t.rows.push_back(std::move(cells));
  }
  return t;
}

/// A trajectory is written point by point when every state is a 1 x N grid of
/// one shape (point clouds); otherwise each row carries summary statistics.
inline bool flat_trajectory(const Trajectory& traj) {
  if (traj.empty()) return true;
  const Shape first = traj.front().state.shape();
  if (first.height != 1) return false;
  return std::all_of(traj.begin(), traj.end(), [&](const TrajectoryPoint& p) { return p.state.shape() == first; });
}

inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  std::vector<std::string> header{"step", "t", "stage"};
  const bool flat = flat_trajectory(traj);
  if (flat) {
    if (!traj.empty()) {
      const Shape s = traj.front().state.shape();
      for (std::size_t i = 0; i < s.width; ++i) {
        for (std::size_t c = 0; c < s.channels; ++c) header.push_back("p" + std::to_string(i) + "." + std::to_string(c));
      }
    }
  } else {
    for (const char* h : {"height", "width", "mean", "std", "min", "max"}) header.emplace_back(h);
  }
  os << join(header) << '\n';
  for (std::size_t step = 0; step < traj.size(); ++step) {
    const auto& p = traj[step];
    std::vector<std::string> row{std::to_string(step), format_double(p.t), std::to_string(p.stage)};
    if (flat) {
      for (double v : p.state.data()) row.push_back(format_double(v));
    } else {
      const auto& d = p.state.data();
      double mean = 0.0;
      for (double v : d) mean += v;
      mean /= static_cast<double>(d.size());
      double var = 0.0;
      for (double v : d) var += (v - mean) * (v - mean);
      var /= static_cast<double>(d.size());
      const auto [lo, hi] = std::minmax_element(d.begin(), d.end());
      row.push_back(std::to_string(p.state.height()));
      row.push_back(std::to_string(p.state.width()));
      row.push_back(format_double(mean));
      row.push_back(format_double(std::sqrt(var)));
      row.push_back(format_double(*lo));
      row.push_back(format_double(*hi));
    }
    os << join(row) << '\n';
  }
}

}  // namespace pyrflow::io

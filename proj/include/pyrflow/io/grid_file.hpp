#pragma once

#include <filesystem>
#include <fstream>
#include <limits>
#include <vector>

#include "pyrflow/grid.hpp"
#include "pyrflow/io/binary.hpp"

namespace pyrflow::io {

// "PYRG", u32 height, width, channels, then f64 values; all little-endian.
inline void write_grid(std::ostream& os, const LatentGrid& g) {
  constexpr auto kMax = std::numeric_limits<std::uint32_t>::max();
  if (g.height() > kMax || g.width() > kMax || g.channels() > kMax) {
    throw DimensionError("grid too large for PYRG format: " + to_string(g.shape()));
  }
  os.write("PYRG", 4);
  write_u32(os, static_cast<std::uint32_t>(g.height()));
  write_u32(os, static_cast<std::uint32_t>(g.width()));
  write_u32(os, static_cast<std::uint32_t>(g.channels()));
  for (double v : g.data()) write_f64(os, v);
  if (!os) throw IoError("failed writing grid");
}

inline LatentGrid read_grid(std::istream& is) {
  expect_magic(is, "PYRG");
  Shape s;
  s.height = read_u32(is);
  s.width = read_u32(is);
  s.channels = read_u32(is);
  if (s.height == 0 || s.width == 0 || s.channels == 0) throw IoError("PYRG header has a zero dimension");
  std::vector<double> data(s.size());
  for (double& v : data) v = read_f64(is);
  return LatentGrid(s, std::move(data));
}

inline void save_grid(const std::filesystem::path& path, const LatentGrid& g) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  write_grid(os, g);
}

inline LatentGrid load_grid(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  return read_grid(is);
}

}  // namespace pyrflow::io

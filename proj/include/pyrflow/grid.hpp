#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "pyrflow/errors.hpp"
#include "pyrflow/rng.hpp"

namespace pyrflow {

struct Shape {
  std::size_t height = 1;
  std::size_t width = 1;
  std::size_t channels = 1;

  std::size_t pixels() const { return height * width; }
  std::size_t size() const { return height * width * channels; }

  friend bool operator==(const Shape&, const Shape&) = default;
};

inline std::string to_string(const Shape& s) {
  return std::to_string(s.height) + "x" + std::to_string(s.width) + "x" + std::to_string(s.channels);
}

inline bool is_power_of_two(std::size_t v) { return v != 0 && (v & (v - 1)) == 0; }

/// Dense H x W x C grid of doubles, row-major with channels innermost.
class LatentGrid {
 public:
  LatentGrid() : LatentGrid(Shape{}) {}

  explicit LatentGrid(Shape shape, double fill = 0.0) : shape_(validated(shape)), data_(shape.size(), fill) {}

  LatentGrid(Shape shape, std::vector<double> data) : shape_(validated(shape)), data_(std::move(data)) {
    if (data_.size() != shape_.size()) {
      throw DimensionError("grid data length " + std::to_string(data_.size()) + " does not match shape " +
                           to_string(shape_));
    }
    for (double v : data_) {
      if (!std::isfinite(v)) throw NumericalError("non-finite value in grid data", 0);
    }
  }

  const Shape& shape() const { return shape_; }
  std::size_t height() const { return shape_.height; }
  std::size_t width() const { return shape_.width; }
  std::size_t channels() const { return shape_.channels; }
  std::size_t size() const { return data_.size(); }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  const std::vector<double>& values() const { return data_; }

  double& at(std::size_t y, std::size_t x, std::size_t c = 0) { return data_[index(y, x, c)]; }
  double at(std::size_t y, std::size_t x, std::size_t c = 0) const { return data_[index(y, x, c)]; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::size_t index(std::size_t y, std::size_t x, std::size_t c) const {
    return (y * shape_.width + x) * shape_.channels + c;
  }

  bool all_finite() const {
    for (double v : data_) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  LatentGrid& operator+=(const LatentGrid& o) {
    require_same_shape(o, "+=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  LatentGrid& operator-=(const LatentGrid& o) {
    require_same_shape(o, "-=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
  }
  LatentGrid& operator*=(double a) {
    for (double& v : data_) v *= a;
    return *this;
  }

  // this += a * o
  LatentGrid& axpy(double a, const LatentGrid& o) {
    require_same_shape(o, "axpy");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += a * o.data_[i];
    return *this;
  }

  friend LatentGrid operator+(LatentGrid a, const LatentGrid& b) { return a += b; }
  friend LatentGrid operator-(LatentGrid a, const LatentGrid& b) { return a -= b; }
  friend LatentGrid operator*(double s, LatentGrid a) { return a *= s; }

  friend bool operator==(const LatentGrid&, const LatentGrid&) = default;

  void require_same_shape(const LatentGrid& o, const char* op) const {
    if (shape_ != o.shape_) {
      throw DimensionError(std::string(op) + ": shape mismatch " + to_string(shape_) + " vs " +
                           to_string(o.shape_));
    }
  }

 private:
  static Shape validated(Shape s) {
    if (s.height == 0 || s.width == 0 || s.channels == 0) {
      throw DimensionError("grid dimensions must be >= 1, got " + to_string(s));
    }
    return s;
  }

  Shape shape_;
  std::vector<double> data_;
};

inline void require_factor(std::size_t factor) {
  if (!is_power_of_two(factor)) {
    throw ArgumentError("resampling factor must be a power of two, got " + std::to_string(factor));
  }
}

/// Block-mean downsampling: each output cell averages its factor x factor source block.
inline LatentGrid down(const LatentGrid& g, std::size_t factor) {
  require_factor(factor);
  if (g.height() % factor != 0 || g.width() % factor != 0) {
    throw DimensionError("down: " + to_string(g.shape()) + " not divisible by " + std::to_string(factor));
  }
  if (factor == 1) return g;
  const std::size_t C = g.channels();
  LatentGrid out(Shape{g.height() / factor, g.width() / factor, C});
  const double inv = 1.0 / static_cast<double>(factor * factor);
  for (std::size_t y = 0; y < out.height(); ++y) {
    for (std::size_t x = 0; x < out.width(); ++x) {
      for (std::size_t c = 0; c < C; ++c) {
        double acc = 0.0;
        for (std::size_t dy = 0; dy < factor; ++dy) {
          for (std::size_t dx = 0; dx < factor; ++dx) acc += g.at(y * factor + dy, x * factor + dx, c);
        }
        out.at(y, x, c) = acc * inv;
      }
    }
  }
  return out;
}

/// Nearest-neighbour upsampling: each source cell fills a factor x factor block.
inline LatentGrid up(const LatentGrid& g, std::size_t factor) {
  require_factor(factor);
  constexpr std::size_t kMaxDim = std::numeric_limits<std::uint32_t>::max();
  if (g.height() > kMaxDim / factor || g.width() > kMaxDim / factor) {
    throw DimensionError("up: " + to_string(g.shape()) + " x " + std::to_string(factor) + " overflows");
  }
  if (factor == 1) return g;
  const std::size_t C = g.channels();
  LatentGrid out(Shape{g.height() * factor, g.width() * factor, C});
  for (std::size_t y = 0; y < out.height(); ++y) {
    for (std::size_t x = 0; x < out.width(); ++x) {
      for (std::size_t c = 0; c < C; ++c) out.at(y, x, c) = g.at(y / factor, x / factor, c);
    }
  }
  return out;
}

/// (1 - w) * a + w * b, elementwise.
inline LatentGrid lerp(const LatentGrid& a, const LatentGrid& b, double w) {
  a.require_same_shape(b, "lerp");
  LatentGrid out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = (1.0 - w) * a[i] + w * b[i];
  return out;
}

/// I.i.d. standard normal grid; a pure function of (shape, seed, stream id).
inline LatentGrid gaussian(Shape shape, std::uint64_t seed, std::uint64_t stream_id) {
  LatentGrid out(shape);
  RngStream rng(seed, stream_id);
  for (double& v : out.data()) v = rng.normal();
  return out;
}

inline LatentGrid gaussian(Shape shape, RngStream& rng) {
  LatentGrid out(shape);
  for (double& v : out.data()) v = rng.normal();
  return out;
}

inline double mean_squared_error(const LatentGrid& a, const LatentGrid& b) {
  a.require_same_shape(b, "mean_squared_error");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc / static_cast<double>(a.size());
}

inline double max_abs_diff(const LatentGrid& a, const LatentGrid& b) {
  a.require_same_shape(b, "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace pyrflow

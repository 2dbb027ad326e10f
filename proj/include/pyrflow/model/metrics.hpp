#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "pyrflow/errors.hpp"
#include "pyrflow/grid.hpp"
#include "pyrflow/sampler.hpp"

namespace pyrflow::model {

inline double euclidean(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

/// Energy distance (V-statistic) between two sets of equally shaped grids:
/// 2 E|X - Y| - E|X - X'| - E|Y - Y'|.
inline double energy_distance(std::span<const LatentGrid> xs, std::span<const LatentGrid> ys) {
  if (xs.empty() || ys.empty()) throw ArgumentError("energy distance needs non-empty sample sets");
  auto mean_pairwise = [](std::span<const LatentGrid> a, std::span<const LatentGrid> b) {
    double acc = 0.0;
    for (const auto& p : a) {
      for (const auto& q : b) {
        p.require_same_shape(q, "energy_distance");
        acc += euclidean(p.data(), q.data());
      }
    }
    return acc / static_cast<double>(a.size() * b.size());
  };
  return 2.0 * mean_pairwise(xs, ys) - mean_pairwise(xs, xs) - mean_pairwise(ys, ys);
}

/// Mean squared deviation of trajectory states from the straight chord of
/// their window. Each pixel is one particle with `channels` coordinates;
/// the chord point for step j of n is x_0 + (j/n)(x_n - x_0).
inline double straightness(const Trajectory& traj) {
  double total = 0.0;
  std::size_t windows = 0;
  std::size_t i = 0;
  while (i < traj.size()) {
    std::size_t j = i;
    while (j + 1 < traj.size() && traj[j + 1].stage == traj[i].stage) ++j;
    const std::size_t n = j - i;
    if (n > 0) {
      const LatentGrid& a = traj[i].state;
      const LatentGrid& b = traj[j].state;
      const std::size_t particles = a.height() * a.width();
      double acc = 0.0;
      for (std::size_t step = 0; step <= n; ++step) {
        const LatentGrid& x = traj[i + step].state;
        const double u = static_cast<double>(step) / static_cast<double>(n);
        for (std::size_t e = 0; e < x.size(); ++e) {
          const double d = x[e] - (a[e] + u * (b[e] - a[e]));
          acc += d * d;
        }
      }
      total += acc / static_cast<double>((n + 1) * particles);
      ++windows;
    }
    i = j + 1;
  }
  return windows == 0 ? 0.0 : total / static_cast<double>(windows);
}

struct BlockCorrelation {
  double within = 0.0;  // adjacent pixel pairs inside the same 2x2 block
  double across = 0.0;  // adjacent pixel pairs straddling a block boundary
};

/// Lag-1 correlation of residuals (sample minus the per-pixel mean over the
/// set), split by whether the pair lies inside one 2x2 block.
inline BlockCorrelation block_autocorrelation(std::span<const LatentGrid> samples) {
  if (samples.empty()) throw ArgumentError("block autocorrelation needs samples");
  const Shape shape = samples.front().shape();
  LatentGrid mean(shape);
  for (const auto& s : samples) {
    s.require_same_shape(mean, "block_autocorrelation");
    mean += s;
  }
  mean *= 1.0 / static_cast<double>(samples.size());

  double sab[2] = {0, 0}, saa[2] = {0, 0}, sbb[2] = {0, 0};
  auto add = [&](int cls, double ra, double rb) {
    sab[cls] += ra * rb;
    saa[cls] += ra * ra;
    sbb[cls] += rb * rb;
  };
  for (const auto& s : samples) {
    for (std::size_t y = 0; y < shape.height; ++y) {
      for (std::size_t x = 0; x < shape.width; ++x) {
        for (std::size_t c = 0; c < shape.channels; ++c) {
          const double r = s.at(y, x, c) - mean.at(y, x, c);
          if (x + 1 < shape.width) add(x % 2 == 0 ? 0 : 1, r, s.at(y, x + 1, c) - mean.at(y, x + 1, c));
          if (y + 1 < shape.height) add(y % 2 == 0 ? 0 : 1, r, s.at(y + 1, x, c) - mean.at(y + 1, x, c));
        }
      }
    }
  }
  auto corr = [&](int cls) {
    const double den = std::sqrt(saa[cls] * sbb[cls]);
    return den > 0.0 ? sab[cls] / den : 0.0;
  };
  return {corr(0), corr(1)};
}

}  // namespace pyrflow::model

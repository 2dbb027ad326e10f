#pragma once

#include <cmath>
#include <string>

#include "pyrflow/errors.hpp"
#include "pyrflow/grid.hpp"
#include "pyrflow/rng.hpp"

namespace pyrflow {

inline constexpr double kDecorrelationGamma = -1.0 / 3.0;

inline void require_gamma(double gamma) {
  if (!(gamma >= kDecorrelationGamma && gamma <= 0.0)) {
    throw ArgumentError("gamma must lie in [-1/3, 0] for a semidefinite block covariance, got " +
                        std::to_string(gamma));
  }
}

/// Coefficients of the jump-point transition
///   x_start = rescale * up(x_end_prev) + alpha * n',
/// where n' has unit variance and within-block correlation gamma.
struct JumpParams {
  double s = 0.0;       // start time of the finer stage
  double e_prev = 1.0;  // end time of the coarser stage
  double gamma = kDecorrelationGamma;
  double rescale = 0.0;
  double alpha = 0.0;
};

/// Solves the mean and covariance matching conditions for the jump into a
/// stage starting at `s`.
///
/// gamma = -1/3 uses the simplified closed forms e = 2s/(1+s),
/// rescale = (1+s)/2, alpha = sqrt(3)(1-s)/2. gamma = 0 is the limit
/// e = 1, alpha = 1 - s (the general expression is 0/0 there).
inline JumpParams solve_jump(double s, double gamma = kDecorrelationGamma) {
  if (!(s > 0.0 && s < 1.0)) throw ArgumentError("jump start s must lie in (0, 1), got " + std::to_string(s));
  require_gamma(gamma);
  JumpParams p;
  p.s = s;
  p.gamma = gamma;
  if (gamma == kDecorrelationGamma) {
    p.e_prev = 2.0 * s / (1.0 + s);
    p.rescale = (1.0 + s) / 2.0;
    p.alpha = std::sqrt(3.0) * (1.0 - s) / 2.0;
  } else if (gamma == 0.0) {
    p.e_prev = 1.0;
    p.rescale = s;
    p.alpha = 1.0 - s;
  } else {
    const double a = std::sqrt(1.0 - gamma);
    const double b = std::sqrt(-gamma);
    p.e_prev = s * a / ((1.0 - s) * b + s * a);
    p.rescale = s / p.e_prev;
    p.alpha = (1.0 - s) / a;
  }
  return p;
}

/// End time of the coarser stage that links to a stage starting at s.
inline double linked_end(double s, double gamma = kDecorrelationGamma) { return solve_jump(s, gamma).e_prev; }

/// (a, b) such that n_i = a z_i + b mean(z) over a 2x2 block of i.i.d. normals
/// has unit variance and pairwise correlation gamma.
struct BlockNoiseCoefficients {
  double a;
  double b;
};

inline BlockNoiseCoefficients block_noise_coefficients(double gamma) {
  require_gamma(gamma);
  const double a = std::sqrt(1.0 - gamma);
  return {a, std::sqrt(std::max(0.0, 1.0 + 3.0 * gamma)) - a};
}

/// Corrective noise on a grid with even height and width. Each 2x2 block of
/// each channel is an independent draw with unit diagonal and off-diagonal
/// gamma; at gamma = -1/3 every block sums to zero.
inline LatentGrid corrective_noise(Shape shape, double gamma, RngStream& rng) {
  if (shape.height % 2 != 0 || shape.width % 2 != 0) {
    throw DimensionError("corrective noise needs even height and width, got " + to_string(shape));
  }
  const auto [a, b] = block_noise_coefficients(gamma);
  const bool zero_sum = (a + b == 0.0);
  LatentGrid out(shape);
  for (std::size_t by = 0; by < shape.height; by += 2) {
    for (std::size_t bx = 0; bx < shape.width; bx += 2) {
      for (std::size_t c = 0; c < shape.channels; ++c) {
        double z[4];
        for (double& zi : z) zi = rng.normal();
        const double mean = 0.25 * (z[0] + z[1] + z[2] + z[3]);
        double n[4];
        for (int i = 0; i < 4; ++i) n[i] = a * z[i] + b * mean;
        // Rank-deficient case: close the block exactly so sums are 0 in floating point too.
        if (zero_sum) n[3] = -(n[0] + n[1] + n[2]);
        out.at(by, bx, c) = n[0];
        out.at(by, bx + 1, c) = n[1];
        out.at(by + 1, bx, c) = n[2];
        out.at(by + 1, bx + 1, c) = n[3];
      }
    }
  }
  return out;
}

/// Jump to the next finer stage: rescale * up(x, 2) + alpha * corrective noise.
inline LatentGrid jump(const LatentGrid& x_end_prev, const JumpParams& params, RngStream& rng) {
  LatentGrid out = up(x_end_prev, 2);
  out *= params.rescale;
  if (params.alpha != 0.0) out.axpy(params.alpha, corrective_noise(out.shape(), params.gamma, rng));
  return out;
}

}  // namespace pyrflow

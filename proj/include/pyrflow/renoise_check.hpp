#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "pyrflow/errors.hpp"
#include "pyrflow/grid.hpp"
#include "pyrflow/renoise.hpp"
#include "pyrflow/rng.hpp"

namespace pyrflow {

inline constexpr std::size_t kCheckSide = 8;

/// Empirical moments of the corrective noise over many 2x2 blocks.
struct NoiseMoments {
  double diagonal = 0.0;      // mean of the four per-position variances
  double off_diagonal = 0.0;  // mean of the six pairwise covariances
  double max_block_sum = 0.0; // largest |sum of a block|
};

inline NoiseMoments noise_moments(double gamma, std::size_t blocks, RngStream& rng) {
  if (blocks == 0) throw ArgumentError("need at least one block");
  double sum[4] = {0, 0, 0, 0};
  double cross[4][4] = {};
  double max_sum = 0.0;
  const Shape one{2, 2, 1};
  for (std::size_t b = 0; b < blocks; ++b) {
    const LatentGrid n = corrective_noise(one, gamma, rng);
    max_sum = std::max(max_sum, std::abs(n[0] + n[1] + n[2] + n[3]));
    for (int i = 0; i < 4; ++i) {
      sum[i] += n[static_cast<std::size_t>(i)];
      for (int j = i; j < 4; ++j) cross[i][j] += n[static_cast<std::size_t>(i)] * n[static_cast<std::size_t>(j)];
    }
  }
  const auto N = static_cast<double>(blocks);
  auto cov = [&](int i, int j) { return cross[i][j] / N - (sum[i] / N) * (sum[j] / N); };
  NoiseMoments m;
  for (int i = 0; i < 4; ++i) {
    m.diagonal += cov(i, i) / 4.0;
    for (int j = i + 1; j < 4; ++j) m.off_diagonal += cov(i, j) / 6.0;
  }
  m.max_block_sum = max_sum;
  return m;
}

/// Per-pixel statistics of jump outputs when the coarse input follows the
/// path law at the linked end time: x_e = e * down(x1, 4) + (1 - e) * n at
/// quarter resolution, jumped to half resolution with start time s.
struct JumpMoments {
  LatentGrid expected_mean;        // s * up(down(x1, 4), 2)
  double expected_variance = 0.0;  // (1 - s)^2
  double max_mean_error = 0.0;
  double max_variance_error = 0.0;
  double mean_variance = 0.0;
  double mean_block_covariance = 0.0;  // within-block, should vanish
};

inline JumpMoments jump_moments(const LatentGrid& x1, double s, double gamma, std::size_t samples, RngStream& rng) {
  if (samples < 2) throw ArgumentError("need at least two samples");
  const JumpParams p = solve_jump(s, gamma);
  const LatentGrid coarse = down(x1, 4);
  JumpMoments out;
  out.expected_mean = up(coarse, 2);
  out.expected_mean *= s;
  out.expected_variance = (1.0 - s) * (1.0 - s);

  const std::size_t n = out.expected_mean.size();
  std::vector<double> sum(n, 0.0), sq(n, 0.0);
  double block_cross = 0.0;
  LatentGrid x_e = coarse;
  for (std::size_t i = 0; i < samples; ++i) {
    for (std::size_t j = 0; j < x_e.size(); ++j) x_e[j] = p.e_prev * coarse[j] + (1.0 - p.e_prev) * rng.normal();
    const LatentGrid y = jump(x_e, p, rng);
    for (std::size_t j = 0; j < n; ++j) {
      const double r = y[j] - out.expected_mean[j];
      sum[j] += r;
      sq[j] += r * r;
    }
    // Horizontal neighbours that share a block: (2m, 2m+1) columns.
    for (std::size_t yy = 0; yy < y.height(); ++yy) {
      for (std::size_t xx = 0; xx + 1 < y.width(); xx += 2) {
        block_cross += (y.at(yy, xx) - out.expected_mean.at(yy, xx)) * (y.at(yy, xx + 1) - out.expected_mean.at(yy, xx + 1));
      }
    }
  }
  const auto N = static_cast<double>(samples);
  for (std::size_t j = 0; j < n; ++j) {
    const double bias = sum[j] / N;
    const double var = sq[j] / N - bias * bias;
    out.max_mean_error = std::max(out.max_mean_error, std::abs(bias));
    out.max_variance_error = std::max(out.max_variance_error, std::abs(var - out.expected_variance));
    out.mean_variance += var / static_cast<double>(n);
  }
  out.mean_block_covariance = block_cross / (N * static_cast<double>(n / 2));
  return out;
}

struct RenoiseReport {
  NoiseMoments noise;
  JumpMoments jump;
  double gamma = 0.0;
  double noise_tolerance = 0.0;
  double jump_tolerance = 0.0;
  bool noise_ok = false;
  bool jump_ok = false;

  bool pass() const { return noise_ok && jump_ok; }
};

/// Monte Carlo check of the jump transition. Tolerances are 0.01 for the
/// noise covariance and 0.005 for jump moments at 10^6 samples, widened as
/// 1/sqrt(samples) below that.
inline RenoiseReport verify_renoise(double gamma, double s, std::size_t samples, std::uint64_t seed) {
  require_gamma(gamma);
  RenoiseReport r;
  r.gamma = gamma;
  const double widen = std::max(1.0, std::sqrt(1e6 / static_cast<double>(samples)));
  r.noise_tolerance = 0.01 * widen;
  r.jump_tolerance = 0.005 * widen;

  RngStream noise_rng(seed, 1);
  r.noise = noise_moments(gamma, samples, noise_rng);
  const bool sums_closed = gamma != kDecorrelationGamma || r.noise.max_block_sum == 0.0;
  r.noise_ok = std::abs(r.noise.diagonal - 1.0) <= r.noise_tolerance &&
               std::abs(r.noise.off_diagonal - gamma) <= r.noise_tolerance && sums_closed;

  const LatentGrid x1 = gaussian(Shape{kCheckSide, kCheckSide, 1}, seed, 2);
  RngStream jump_rng(seed, 3);
  r.jump = jump_moments(x1, s, gamma, samples, jump_rng);
  r.jump_ok = r.jump.max_mean_error <= r.jump_tolerance && r.jump.max_variance_error <= r.jump_tolerance &&
              std::abs(r.jump.mean_block_covariance) <= r.jump_tolerance;
  return r;
}

}  // namespace pyrflow

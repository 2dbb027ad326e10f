#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "pyrflow/model/local_field.hpp"
#include "pyrflow/model/metrics.hpp"
#include "pyrflow/model/trainer.hpp"
#include "pyrflow/sampler.hpp"

namespace pyrflow::model {

inline constexpr int kToyWindows = 2;

/// Contiguous windows [(K-1-k)/K, (K-k)/K] in generation order. Points have no
/// resolution, so consecutive windows meet without rollback.
inline std::vector<Stage> toy_windows(int K = kToyWindows) {
  std::vector<Stage> w;
  for (int k = K - 1; k >= 0; --k) {
    w.push_back({k, 1, static_cast<double>(K - 1 - k) / K, static_cast<double>(K - k) / K});
  }
  return w;
}

inline std::vector<std::array<double, 2>> toy_targets(int num_points) {
  if (num_points == 1) return {{0.5, 0.5}};
  if (num_points == 3) return {{-0.5, -0.5}, {0.5, -0.5}, {0.0, 0.6}};
  throw ArgumentError("toy2d supports 1 or 3 target points, got " + std::to_string(num_points));
}

struct Toy2dResult {
  MlpNet net;
  std::vector<double> losses;
  double straightness = 0.0;
  double nearest_target_distance = 0.0;
  SampleResult samples;
};

/// Particles drawn uniformly from [-1, 1]^2, as a 1 x n x 2 grid.
inline LatentGrid uniform_particles(int n, std::uint64_t seed, std::uint64_t stream) {
  LatentGrid g(Shape{1, static_cast<std::size_t>(n), 2});
  RngStream rng(seed, stream);
  for (double& v : g.data()) v = rng.uniform(-1.0, 1.0);
  return g;
}

inline SampleResult sample_toy2d(const MlpNet& net, int particles, int steps_per_window, std::uint64_t seed) {
  const LocalMlpField field(net, kPointSpec);
  SamplerConfig sc;
  sc.steps_per_stage.assign(static_cast<std::size_t>(net.num_stages()), steps_per_window);
  sc.seed = seed;
  auto identity = [](const LatentGrid& x, int) { return x; };
  return run_stages(field, toy_windows(net.num_stages()), sc, uniform_particles(particles, seed, 0x70617274), identity);
}

inline double mean_nearest_distance(const LatentGrid& points, const std::vector<std::array<double, 2>>& targets) {
  double acc = 0.0;
  for (std::size_t i = 0; i < points.width(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : targets) best = std::min(best, std::hypot(points.at(0, i, 0) - p[0], points.at(0, i, 1) - p[1]));
    acc += best;
  }
  return acc / static_cast<double>(points.width());
}

/// Piecewise flow from uniform noise on [-1,1]^2 to a few fixed points over
/// two windows. With Coupling::Ours both ends of a window share one noise
/// draw; with Coupling::Random they are drawn independently.
inline Toy2dResult train_toy2d(const TrainConfig& cfg) {
  cfg.validate();
  const auto targets = toy_targets(cfg.num_points);
  const auto windows = toy_windows(kToyWindows);
  MlpNet net = make_local_net(kPointSpec, cfg.hidden, kToyWindows);
  net.init(cfg.seed);
  Adam opt(cfg.adam(), net.param_count());
  RngStream rng(cfg.seed, 0x746f7932);

  Toy2dResult out{net, {}, 0.0, 0.0, {}};
  const auto B = static_cast<std::size_t>(cfg.batch);
  std::vector<double> weights(B);
  for (int step = 0; step < cfg.steps; ++step) {
    Matrix in(B, out.net.dims()[0]);
    Matrix target(B, 2);
    for (std::size_t r = 0; r < B; ++r) {
      const int k = sample_stage(kToyWindows, rng);
      const Stage& w = windows[static_cast<std::size_t>(kToyWindows - 1 - k)];
      const auto& x1 = targets[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(targets.size())))];
      const double t = rng.uniform(w.s, w.e);
      const double u = (t - w.s) / (w.e - w.s);
      double row[2];
      for (int c = 0; c < 2; ++c) {
        const double n_end = rng.uniform(-1.0, 1.0);
        const double n_start = cfg.coupling == Coupling::Ours ? n_end : rng.uniform(-1.0, 1.0);
        const double end = w.e * x1[static_cast<std::size_t>(c)] + (1.0 - w.e) * n_end;
        const double start = w.s * x1[static_cast<std::size_t>(c)] + (1.0 - w.s) * n_start;
        row[c] = (1.0 - u) * start + u * end;
        target(r, static_cast<std::size_t>(c)) = end - start;
      }
      in(r, 0) = row[0];
      in(r, 1) = row[1];
      out.net.embed(t, k, in.row(r) + 2);
      weights[r] = cfg.stage_weight(k) / static_cast<double>(2 * B);
    }
    const double loss = regression_step(out.net, opt, std::move(in), target, weights);
    check_loss(loss, static_cast<std::size_t>(step));
    out.losses.push_back(loss);
  }

  out.samples = sample_toy2d(out.net, cfg.eval_particles, cfg.eval_steps, cfg.seed);
  out.straightness = straightness(out.samples.trajectory);
  out.nearest_target_distance = mean_nearest_distance(out.samples.sample, targets);
  return out;
}

}  // namespace pyrflow::model

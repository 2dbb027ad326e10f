#pragma once

#include <cstdint>
#include <vector>

#include "pyrflow/flow.hpp"
#include "pyrflow/model/local_field.hpp"
#include "pyrflow/model/metrics.hpp"
#include "pyrflow/model/trainer.hpp"
#include "pyrflow/sampler.hpp"
#include "pyrflow/schedule.hpp"

namespace pyrflow::model {

inline constexpr std::size_t kTinyImageSide = 16;
inline constexpr std::uint64_t kTrainSetStream = 0x7472616e;
inline constexpr std::uint64_t kHeldOutStream = 0x68656c64;

/// One procedural 16x16 pattern: an axis-aligned rectangle on a darker
/// background, or a linear ramp (horizontal, vertical or diagonal).
inline LatentGrid make_pattern(RngStream& rng) {
  constexpr auto S = static_cast<int>(kTinyImageSide);
  LatentGrid g(Shape{kTinyImageSide, kTinyImageSide, 1});
  if (rng.uniform_int(2) == 0) {
    const int y0 = rng.uniform_int(S - 3);
    const int x0 = rng.uniform_int(S - 3);
    const int h = 4 + rng.uniform_int(S - y0 - 3);
    const int w = 4 + rng.uniform_int(S - x0 - 3);
    const double bg = rng.uniform(-1.0, -0.4);
    const double fg = rng.uniform(0.4, 1.0);
    for (int y = 0; y < S; ++y) {
      for (int x = 0; x < S; ++x) {
        const bool inside = y >= y0 && y < y0 + h && x >= x0 && x < x0 + w;
        g.at(static_cast<std::size_t>(y), static_cast<std::size_t>(x)) = inside ? fg : bg;
      }
    }
  } else {
    const int dir = rng.uniform_int(3);
    double lo = rng.uniform(-1.0, -0.2);
    double hi = rng.uniform(0.2, 1.0);
    if (rng.uniform_int(2) == 1) std::swap(lo, hi);
    for (int y = 0; y < S; ++y) {
      for (int x = 0; x < S; ++x) {
        const double py = static_cast<double>(y) / (S - 1);
        const double px = static_cast<double>(x) / (S - 1);
        const double pos = dir == 0 ? px : dir == 1 ? py : 0.5 * (px + py);
        g.at(static_cast<std::size_t>(y), static_cast<std::size_t>(x)) = lo + (hi - lo) * pos;
      }
    }
  }
  return g;
}

/// `count` patterns; image i depends only on (seed, stream, i).
inline std::vector<LatentGrid> make_dataset(int count, std::uint64_t seed, std::uint64_t stream = kTrainSetStream) {
  std::vector<LatentGrid> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    RngStream rng(seed, substream(stream, static_cast<std::uint64_t>(i)));
    out.push_back(make_pattern(rng));
  }
  return out;
}

struct TinyImageResult {
  MlpNet net;
  StageSchedule schedule;
  std::vector<double> losses;
  long long pixel_evals = 0;
  double energy_distance = 0.0;
};

/// `count` full-resolution samples; sample i uses seed substream(seed, i).
inline std::vector<LatentGrid> generate_images(const MlpNet& net, const StageSchedule& schedule, int count,
                                               int steps_per_stage, std::uint64_t seed, bool renoise = true) {
  const LocalMlpField field(net, kImageSpec);
  SamplerConfig sc;
  sc.steps_per_stage.assign(static_cast<std::size_t>(schedule.num_stages()), steps_per_stage);
  sc.renoise = renoise;
  std::vector<LatentGrid> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    sc.seed = substream(seed, static_cast<std::uint64_t>(i));
    out.push_back(sample(field, schedule, sc, Shape{kTinyImageSide, kTinyImageSide, 1}).sample);
  }
  return out;
}

/// Trains the per-pixel velocity model on the unified pyramid objective
/// (cfg.stages = 1 is plain full-resolution flow matching). Stops after
/// cfg.pixel_budget pixel evaluations when set, otherwise after cfg.steps.
/// With cfg.eval_samples > 0 the result carries the energy distance between
/// that many generated and held-out images.
inline TinyImageResult train_tinyimage(const TrainConfig& cfg) {
  cfg.validate();
  StageSchedule schedule = build_schedule(cfg.stages);
  MlpNet net = make_local_net(kImageSpec, cfg.hidden, cfg.stages);
  net.init(cfg.seed);
  Adam opt(cfg.adam(), net.param_count());
  const auto data = make_dataset(cfg.single_image ? 1 : cfg.dataset_size, cfg.seed);
  RngStream rng(cfg.seed, 0x696d6167);

  TinyImageResult out{std::move(net), schedule, {}, 0, 0.0};
  const auto B = static_cast<std::size_t>(cfg.batch);
  for (std::size_t step = 0;; ++step) {
    if (cfg.pixel_budget > 0 ? out.pixel_evals >= cfg.pixel_budget : step >= static_cast<std::size_t>(cfg.steps)) {
      break;
    }
    std::vector<PyramidSample> batch;
    std::size_t rows = 0;
    for (std::size_t b = 0; b < B; ++b) {
      const auto& x1 = data[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(data.size())))];
      batch.push_back(make_sample(x1, schedule, rng));
      rows += batch.back().x_t.height() * batch.back().x_t.width();
    }
    Matrix in(rows, out.net.dims()[0]);
    Matrix target(rows, 1);
    std::vector<double> weights(rows);
    std::size_t r0 = 0;
    for (const auto& s : batch) {
      const std::size_t px = s.x_t.height() * s.x_t.width();
      fill_features(kImageSpec, out.net, s.x_t, s.t, s.stage.index, in, r0);
      const double w = cfg.stage_weight(s.stage.index) / static_cast<double>(px * B);
      for (std::size_t p = 0; p < px; ++p) {
        target(r0 + p, 0) = s.target[p];
        weights[r0 + p] = w;
      }
      r0 += px;
    }
    const double loss = regression_step(out.net, opt, std::move(in), target, weights);
    check_loss(loss, step);
    out.losses.push_back(loss);
    out.pixel_evals += static_cast<long long>(rows);
  }

  if (cfg.eval_samples > 0) {
    const auto generated =
        generate_images(out.net, schedule, cfg.eval_samples, cfg.eval_steps_per_stage, substream(cfg.seed, 0x6576));
    const auto held_out = make_dataset(cfg.eval_samples, cfg.seed, kHeldOutStream);
    out.energy_distance = energy_distance(generated, held_out);
  }
  return out;
}

}  // namespace pyrflow::model

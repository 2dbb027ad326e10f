#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "pyrflow/errors.hpp"
#include "pyrflow/flow.hpp"
#include "pyrflow/grid.hpp"
#include "pyrflow/renoise.hpp"
#include "pyrflow/rng.hpp"
#include "pyrflow/schedule.hpp"
#include "pyrflow/velocity_field.hpp"

namespace pyrflow {

inline constexpr int kDefaultStepsPerStage = 16;

struct SamplerConfig {
  std::vector<int> steps_per_stage;  // indexed by stage k; empty = default for every stage
  double guidance_scale = 1.0;
  std::uint64_t seed = 0;
  bool renoise = true;

  int steps(int k) const {
    if (steps_per_stage.empty()) return kDefaultStepsPerStage;
    return steps_per_stage.at(static_cast<std::size_t>(k));
  }
};

struct TrajectoryPoint {
  double t = 0.0;
  int stage = 0;
  LatentGrid state;
};

using Trajectory = std::vector<TrajectoryPoint>;

struct SampleResult {
  LatentGrid sample;
  Trajectory trajectory;
};

/// v_uncond + scale * (v_cond - v_uncond)
inline LatentGrid guided_velocity(const LatentGrid& v_cond, const LatentGrid& v_uncond, double scale) {
  v_cond.require_same_shape(v_uncond, "guided_velocity");
  LatentGrid out = v_uncond;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += scale * (v_cond[i] - v_uncond[i]);
  return out;
}

/// Classifier-free guidance around another field.
class GuidedField : public VelocityField {
 public:
  GuidedField(const VelocityField& inner, double scale) : inner_(inner), scale_(scale) {}

  LatentGrid evaluate(const LatentGrid& x, double t, int stage, const HistoryPyramid* condition) const override {
    LatentGrid v_cond = inner_.evaluate(x, t, stage, condition);
    if (condition == nullptr || scale_ == 1.0) return v_cond;
    return guided_velocity(v_cond, inner_.evaluate(x, t, stage, nullptr), scale_);
  }

 private:
  const VelocityField& inner_;
  double scale_;
};

/// Explicit Euler over one window in local time, n_steps uniform steps from
/// u = 0 to u = 1: x <- x + v(x, t(u), k) / n_steps. Appends every state,
/// including the start, to `trajectory` when given.
inline LatentGrid integrate_stage(const VelocityField& v, LatentGrid x, const Stage& stage, int n_steps,
                                  const HistoryPyramid* condition, Trajectory* trajectory = nullptr) {
  if (n_steps < 1) throw ArgumentError("steps per stage must be >= 1, got " + std::to_string(n_steps));
  const double h = 1.0 / n_steps;
  if (trajectory) trajectory->push_back({stage.s, stage.index, x});
  for (int j = 0; j < n_steps; ++j) {
    const double t = window_time(stage, static_cast<double>(j) / n_steps);
    const LatentGrid vel = v.evaluate(x, t, stage.index, condition);
    if (vel.shape() != x.shape()) {
      throw DimensionError("velocity field returned shape " + to_string(vel.shape()) + " for state " +
                           to_string(x.shape()));
    }
    if (!vel.all_finite()) {
      throw NumericalError("non-finite velocity at stage " + std::to_string(stage.index), static_cast<std::size_t>(j));
    }
    x.axpy(h, vel);
    if (trajectory) trajectory->push_back({window_time(stage, static_cast<double>(j + 1) / n_steps), stage.index, x});
  }
  return x;
}

/// Maps the end state of the stage just finished onto the start of stage
/// `next_k`.
using StageTransition = std::function<LatentGrid(const LatentGrid& x_end, int next_k)>;

/// Runs stages in the given order (coarsest first), applying `transition`
/// between consecutive stages. The trajectory holds each stage's start
/// (post-transition) state followed by its Euler states.
inline SampleResult run_stages(const VelocityField& v, const std::vector<Stage>& stages, const SamplerConfig& cfg,
                               LatentGrid x, const StageTransition& transition,
                               const HistoryPyramid* condition = nullptr) {
  SampleResult out;
  const GuidedField field(v, cfg.guidance_scale);
  for (std::size_t i = 0; i < stages.size(); ++i) {
    const Stage& st = stages[i];
    x = integrate_stage(field, std::move(x), st, cfg.steps(st.index), condition, &out.trajectory);
    if (i + 1 < stages.size()) x = transition(x, stages[i + 1].index);
  }
  out.sample = std::move(x);
  return out;
}

/// Stagewise sampling from coarse noise to a full-resolution grid of shape
/// `full`, with the renoising jump between stages.
inline SampleResult sample(const VelocityField& v, const StageSchedule& schedule, const SamplerConfig& cfg,
                           const Shape& full, const HistoryPyramid* condition = nullptr) {
  const int K = schedule.num_stages();
  if (!cfg.steps_per_stage.empty() && static_cast<int>(cfg.steps_per_stage.size()) != K) {
    throw ArgumentError("steps_per_stage has " + std::to_string(cfg.steps_per_stage.size()) +
                        " entries for a " + std::to_string(K) + "-stage schedule");
  }
  LatentGrid x0 = gaussian(stage_shape(full, schedule.coarsest_divisor()), cfg.seed, 0);
  const StageTransition transition = [&](const LatentGrid& x_end, int next_k) {
    JumpParams p = solve_jump(schedule.stage(next_k).s, schedule.gamma());
    if (!cfg.renoise) {
      p.rescale = 1.0;
      p.alpha = 0.0;
    }
    RngStream rng(cfg.seed, substream(1, static_cast<std::uint64_t>(next_k)));
    return jump(x_end, p, rng);
  };
  SampleResult out = run_stages(v, schedule.stages(), cfg, std::move(x0), transition, condition);
  if (out.sample.shape() != full) throw DimensionError("sampler finished at " + to_string(out.sample.shape()));
  return out;
}

}  // namespace pyrflow

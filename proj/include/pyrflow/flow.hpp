#pragma once

#include <utility>

#include "pyrflow/errors.hpp"
#include "pyrflow/grid.hpp"
#include "pyrflow/rng.hpp"
#include "pyrflow/schedule.hpp"

namespace pyrflow {

/// Window endpoints of the piecewise path at one stage.
struct Endpoints {
  LatentGrid start;  // at t = s_k
  LatentGrid end;    // at t = e_k
};

/// One training example for the unified objective.
struct PyramidSample {
  Stage stage;
  double t = 0.0;
  LatentGrid x_t;
  LatentGrid target;  // end - start, constant within the window
  Endpoints endpoints;
};

inline Shape stage_shape(const Shape& full, std::size_t divisor) {
  if (full.height % divisor != 0 || full.width % divisor != 0) {
    throw DimensionError("shape " + to_string(full) + " not divisible by " + std::to_string(divisor));
  }
  return Shape{full.height / divisor, full.width / divisor, full.channels};
}

/// Endpoints with independent noise draws for the two ends. `make_endpoints`
/// with a single noise grid is the coupled form used for training.
///   end   = e * down(x1, 2^k)              + (1 - e) * noise_end
///   start = s * up(down(x1, 2^(k+1)), 2)   + (1 - s) * noise_start
inline Endpoints make_endpoints(const LatentGrid& x1, const Stage& stage, const LatentGrid& noise_end,
                                const LatentGrid& noise_start) {
  const Shape res = stage_shape(x1.shape(), stage.divisor);
  if (noise_end.shape() != res || noise_start.shape() != res) {
    throw DimensionError("noise shape must be " + to_string(res) + " at stage " + std::to_string(stage.index));
  }
  Endpoints ep{LatentGrid(res), down(x1, stage.divisor)};
  ep.end *= stage.e;
  ep.end.axpy(1.0 - stage.e, noise_end);

  // The coarser term vanishes at s = 0, so x1 need only be divisible by 2^k there.
  if (stage.s != 0.0) {
    ep.start = up(down(x1, stage.divisor * 2), 2);
    ep.start *= stage.s;
  }
  ep.start.axpy(1.0 - stage.s, noise_start);
  return ep;
}

inline Endpoints make_endpoints(const LatentGrid& x1, const Stage& stage, const LatentGrid& noise) {
  return make_endpoints(x1, stage, noise, noise);
}

/// Sample at a given stage and time from precomputed endpoints.
inline PyramidSample sample_at(const Stage& stage, double t, Endpoints endpoints) {
  PyramidSample out;
  out.stage = stage;
  out.t = t;
  out.x_t = lerp(endpoints.start, endpoints.end, rescale_time(stage, t));
  out.target = endpoints.end - endpoints.start;
  out.endpoints = std::move(endpoints);
  return out;
}

/// Draws stage, time and one shared noise grid from `rng`.
inline PyramidSample make_sample(const LatentGrid& x1, const StageSchedule& schedule, RngStream& rng) {
  const int K = schedule.num_stages();
  if (x1.height() % (std::size_t{1} << K) != 0 || x1.width() % (std::size_t{1} << K) != 0) {
    throw DimensionError("x1 shape " + to_string(x1.shape()) + " not divisible by 2^" + std::to_string(K));
  }
  const Stage& stage = schedule.stage(sample_stage(K, rng));
  const double t = rng.uniform(stage.s, stage.e);
  const LatentGrid noise = gaussian(stage_shape(x1.shape(), stage.divisor), rng);
  return sample_at(stage, t, make_endpoints(x1, stage, noise));
}

/// Mean squared error of a predicted velocity against the sample target.
inline double fm_loss(const LatentGrid& v_pred, const PyramidSample& sample) {
  return mean_squared_error(v_pred, sample.target);
}

}  // namespace pyrflow

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "pyrflow/errors.hpp"
#include "pyrflow/renoise.hpp"
#include "pyrflow/rng.hpp"

namespace pyrflow {

/// One pyramid stage: time window [s, e] at resolution full / divisor.
/// Index 0 is full resolution; divisor = 2^index.
struct Stage {
  int index = 0;
  std::size_t divisor = 1;
  double s = 0.0;
  double e = 1.0;

  friend bool operator==(const Stage&, const Stage&) = default;
};

enum class ScheduleLayout { UniformStart };

class StageSchedule {
 public:
  StageSchedule(std::vector<Stage> stages, double gamma) : stages_(std::move(stages)), gamma_(gamma) {
    validate();
  }

  int num_stages() const { return static_cast<int>(stages_.size()); }
  double gamma() const { return gamma_; }

  // Stage by pyramid index k (0 = full resolution).
  const Stage& stage(int k) const {
    if (k < 0 || k >= num_stages()) throw ArgumentError("stage index out of range: " + std::to_string(k));
    return stages_[static_cast<std::size_t>(num_stages() - 1 - k)];
  }

  // Stages in generation order, coarsest (K-1) first.
  const std::vector<Stage>& stages() const { return stages_; }

  std::size_t coarsest_divisor() const { return stages_.front().divisor; }

 private:
  void validate() const {
    require_gamma(gamma_);
    if (stages_.empty()) throw ArgumentError("schedule needs at least one stage");
    const int K = num_stages();
    for (int k = 0; k < K; ++k) {
      const Stage& st = stage(k);
      if (st.index != k || st.divisor != (std::size_t{1} << k)) {
        throw ArgumentError("stage " + std::to_string(k) + " has inconsistent index/divisor");
      }
      if (!(st.s >= 0.0 && st.s < st.e && st.e <= 1.0)) {
        throw ArgumentError("stage " + std::to_string(k) + " window is not a sub-interval of [0,1]");
      }
    }
    if (stage(K - 1).s != 0.0 || stage(0).e != 1.0) throw ArgumentError("windows must cover [0, 1]");
    for (int k = 0; k + 1 < K; ++k) {
      if (!(stage(k + 1).e > stage(k).s)) {
        throw ArgumentError("stage " + std::to_string(k + 1) + " must end after stage " + std::to_string(k) +
                            " starts");
      }
    }
  }

  std::vector<Stage> stages_;
  double gamma_;
};

/// K stages with starts s_k = (K-1-k)/K; each coarser end is forced by the
/// jump link e_{k+1} = linked_end(s_k, gamma).
inline StageSchedule build_schedule(int K, double gamma = kDecorrelationGamma,
                                    ScheduleLayout layout = ScheduleLayout::UniformStart) {
  (void)layout;
  if (K < 1) throw ArgumentError("number of stages must be >= 1, got " + std::to_string(K));
  require_gamma(gamma);
  std::vector<Stage> stages;
  for (int k = K - 1; k >= 0; --k) {
    Stage st;
    st.index = k;
    st.divisor = std::size_t{1} << k;
    st.s = static_cast<double>(K - 1 - k) / K;
    st.e = (k == 0) ? 1.0 : linked_end(static_cast<double>(K - k) / K, gamma);
    stages.push_back(st);
  }
  return StageSchedule(std::move(stages), gamma);
}

/// Maps t in [s, e] to the window-local time (t - s) / (e - s) in [0, 1].
inline double rescale_time(const Stage& stage, double t) {
  if (!(t >= stage.s && t <= stage.e)) {
    throw ArgumentError("t = " + std::to_string(t) + " outside stage window [" + std::to_string(stage.s) + ", " +
                        std::to_string(stage.e) + "]");
  }
  return (t - stage.s) / (stage.e - stage.s);
}

// Global time at window-local time u; exact at both endpoints.
inline double window_time(const Stage& stage, double u) {
  if (u <= 0.0) return stage.s;
  if (u >= 1.0) return stage.e;
  return stage.s + (stage.e - stage.s) * u;
}

/// Uniform draw of a stage index in [0, K).
inline int sample_stage(int K, RngStream& rng) {
  if (K < 1) throw ArgumentError("number of stages must be >= 1");
  return K == 1 ? 0 : rng.uniform_int(K);
}

}  // namespace pyrflow

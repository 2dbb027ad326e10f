#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pyrflow/errors.hpp"
#include "pyrflow/model/adam.hpp"
#include "pyrflow/model/mlp.hpp"

namespace pyrflow::model {

enum class Coupling { Ours, Random };
enum class Task { Toy2d, TinyImage };

inline const char* to_string(Coupling c) { return c == Coupling::Ours ? "ours" : "random"; }

struct TrainConfig {
  Task task = Task::Toy2d;
  Coupling coupling = Coupling::Ours;
  int batch = 256;
  int steps = 5000;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.95;
  double eps = 1e-6;
  double max_grad_norm = 0.0;
  std::uint64_t seed = 0;
  std::vector<std::size_t> hidden{64, 64};
  std::vector<double> stage_weights;  // per stage k; empty means all ones

  // toy2d
  int num_points = 1;
  int eval_particles = 256;
  int eval_steps = 32;

  // tinyimage
  int stages = 3;
  long long pixel_budget = 0;  // > 0 replaces `steps` as the stopping rule
  int dataset_size = 512;
  int eval_samples = 256;
  int eval_steps_per_stage = 16;
  bool single_image = false;

  AdamConfig adam() const { return {lr, beta1, beta2, eps, 0.0, max_grad_norm}; }

  double stage_weight(int k) const {
    return stage_weights.empty() ? 1.0 : stage_weights.at(static_cast<std::size_t>(k));
  }

  void validate() const {
    if (!(lr > 0.0)) throw ArgumentError("learning rate must be positive");
    if (steps < 0) throw ArgumentError("steps must be non-negative");
    if (batch < 1) throw ArgumentError("batch must be >= 1");
  }
};

/// One optimizer step on a weighted squared-error regression. Row r
/// contributes row_weight[r] * |pred_r - target_r|^2 to the returned loss.
inline double regression_step(MlpNet& net, Adam& opt, Matrix inputs, const Matrix& targets,
                              std::span<const double> row_weight) {
  ForwardCache cache;
  const Matrix pred = forward_batch(net, std::move(inputs), &cache);
  Matrix upstream(pred.rows, pred.cols);
  double loss = 0.0;
  for (std::size_t r = 0; r < pred.rows; ++r) {
    const double w = row_weight[r];
    for (std::size_t c = 0; c < pred.cols; ++c) {
      const double d = pred(r, c) - targets(r, c);
      loss += w * d * d;
      upstream(r, c) = 2.0 * w * d;
    }
  }
  const std::vector<double> grad = backward(net, cache, upstream);
  opt.step(net.params(), grad);
  return loss;
}

inline void check_loss(double loss, std::size_t step) {
  if (!std::isfinite(loss)) throw TrainingError("training diverged: loss is not finite", step);
}

}  // namespace pyrflow::model

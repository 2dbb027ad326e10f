#pragma once

#include <algorithm>
#include <cstddef>
#include <string>

#include "pyrflow/errors.hpp"
#include "pyrflow/grid.hpp"
#include "pyrflow/model/mlp.hpp"
#include "pyrflow/velocity_field.hpp"

namespace pyrflow::model {

/// What the per-pixel network sees: a (2r+1)^2 neighbourhood of every
/// channel (edge-clamped), optionally the pixel-centre coordinates in
/// [-1, 1], then the time/stage embedding.
struct LocalFieldSpec {
  int radius = 0;
  bool coords = false;
  std::size_t channels = 1;

  std::size_t features() const {
    const auto side = static_cast<std::size_t>(2 * radius + 1);
    return side * side * channels + (coords ? 2 : 0);
  }

  friend bool operator==(const LocalFieldSpec&, const LocalFieldSpec&) = default;
};

// Point clouds stored as 1 x N x 2 grids; each point is processed alone.
inline constexpr LocalFieldSpec kPointSpec{0, false, 2};
// Single-channel images with a 3x3 neighbourhood and coordinates.
inline constexpr LocalFieldSpec kImageSpec{1, true, 1};

/// Writes one feature row per pixel of `x` into rows [row0, row0 + pixels).
inline void fill_features(const LocalFieldSpec& spec, const MlpNet& net, const LatentGrid& x, double t, int stage,
                          Matrix& out, std::size_t row0) {
  if (x.channels() != spec.channels) {
    throw DimensionError("field expects " + std::to_string(spec.channels) + " channels, got " +
                         std::to_string(x.channels()));
  }
  if (net.feature_dims() != spec.features() || net.output_dims() != spec.channels) {
    throw DimensionError("network dimensions do not match the field layout");
  }
  const auto H = static_cast<long>(x.height());
  const auto W = static_cast<long>(x.width());
  std::vector<double> emb(net.embedding_dims());
  net.embed(t, stage, emb.data());
  std::size_t r = row0;
  for (long y = 0; y < H; ++y) {
    for (long xx = 0; xx < W; ++xx, ++r) {
      double* row = out.row(r);
      std::size_t c = 0;
      for (long dy = -spec.radius; dy <= spec.radius; ++dy) {
        const auto sy = static_cast<std::size_t>(std::clamp(y + dy, 0L, H - 1));
        for (long dx = -spec.radius; dx <= spec.radius; ++dx) {
          const auto sx = static_cast<std::size_t>(std::clamp(xx + dx, 0L, W - 1));
          for (std::size_t ch = 0; ch < spec.channels; ++ch) row[c++] = x.at(sy, sx, ch);
        }
      }
      if (spec.coords) {
        row[c++] = (2.0 * static_cast<double>(y) + 1.0) / static_cast<double>(H) - 1.0;
        row[c++] = (2.0 * static_cast<double>(xx) + 1.0) / static_cast<double>(W) - 1.0;
      }
      std::copy(emb.begin(), emb.end(), row + c);
    }
  }
}

/// Velocity field that applies one MLP independently at every pixel.
class LocalMlpField : public VelocityField {
 public:
  LocalMlpField(const MlpNet& net, LocalFieldSpec spec) : net_(net), spec_(spec) {}

  LatentGrid evaluate(const LatentGrid& x, double t, int stage, const HistoryPyramid*) const override {
    Matrix in(x.height() * x.width(), net_.dims()[0]);
    fill_features(spec_, net_, x, t, stage, in, 0);
    Matrix out = forward_batch(net_, std::move(in));
    return LatentGrid(x.shape(), std::move(out.data));
  }

  const MlpNet& net() const { return net_; }
  const LocalFieldSpec& spec() const { return spec_; }

 private:
  const MlpNet& net_;
  LocalFieldSpec spec_;
};

inline MlpNet make_local_net(const LocalFieldSpec& spec, std::span<const std::size_t> hidden, int num_stages) {
  std::vector<std::size_t> dims{spec.features() + kTimeFeatures + static_cast<std::size_t>(num_stages)};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(spec.channels);
  return MlpNet(std::move(dims), num_stages);
}

}  // namespace pyrflow::model

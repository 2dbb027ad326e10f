#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pyrflow/errors.hpp"
#include "pyrflow/rng.hpp"

namespace pyrflow::model {

// sin/cos pairs of pi * 2^j * t for j < kTimeFrequencies.
inline constexpr std::size_t kTimeFrequencies = 4;
inline constexpr std::size_t kTimeFeatures = 2 * kTimeFrequencies;

/// Row-major n x cols matrix used for batched activations.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double* row(std::size_t r) { return data.data() + r * cols; }
  const double* row(std::size_t r) const { return data.data() + r * cols; }
  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

/// Fully connected network with SiLU hidden activations and a linear output
/// layer. The first layer consumes the data features followed by a
/// time/stage embedding (sinusoidal features of t, one-hot stage).
///
/// Parameters are stored flat, layer by layer: weights (input-major, in x out)
/// then biases.
class MlpNet {
 public:
  MlpNet(std::vector<std::size_t> dims, int num_stages) : dims_(std::move(dims)), num_stages_(num_stages) {
    if (dims_.size() < 2) throw ArgumentError("MlpNet needs at least an input and an output dimension");
    if (num_stages_ < 1) throw ArgumentError("MlpNet needs num_stages >= 1");
    if (dims_[0] <= embedding_dims()) throw ArgumentError("input dimension must exceed the embedding size");
    for (std::size_t d : dims_) {
      if (d == 0) throw ArgumentError("layer dimensions must be positive");
    }
    std::size_t off = 0;
    for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
      w_offset_.push_back(off);
      off += dims_[l] * dims_[l + 1];
      b_offset_.push_back(off);
      off += dims_[l + 1];
    }
    params_.assign(off, 0.0);
  }

  const std::vector<std::size_t>& dims() const { return dims_; }
  std::size_t num_layers() const { return dims_.size() - 1; }
  int num_stages() const { return num_stages_; }
  std::size_t embedding_dims() const { return kTimeFeatures + static_cast<std::size_t>(num_stages_); }
  std::size_t feature_dims() const { return dims_[0] - embedding_dims(); }
  std::size_t output_dims() const { return dims_.back(); }

  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }
  std::size_t param_count() const { return params_.size(); }

  double* weights(std::size_t l) { return params_.data() + w_offset_[l]; }
  const double* weights(std::size_t l) const { return params_.data() + w_offset_[l]; }
  double* bias(std::size_t l) { return params_.data() + b_offset_[l]; }
  const double* bias(std::size_t l) const { return params_.data() + b_offset_[l]; }
  std::size_t weight_offset(std::size_t l) const { return w_offset_[l]; }
  std::size_t bias_offset(std::size_t l) const { return b_offset_[l]; }

  /// Writes the embedding of (t, stage) into `out` (embedding_dims() values).
  void embed(double t, int stage, double* out) const {
    if (stage < 0 || stage >= num_stages_) {
      throw DimensionError("stage " + std::to_string(stage) + " outside network's " + std::to_string(num_stages_) +
                           " stages");
    }
    for (std::size_t j = 0; j < kTimeFrequencies; ++j) {
      const double w = std::numbers::pi * static_cast<double>(std::size_t{1} << j) * t;
      out[2 * j] = std::sin(w);
      out[2 * j + 1] = std::cos(w);
    }
    for (int k = 0; k < num_stages_; ++k) out[kTimeFeatures + static_cast<std::size_t>(k)] = (k == stage);
  }

  /// Scaled-uniform (Glorot) weights, zero biases.
  void init(std::uint64_t seed) {
    RngStream rng(seed, 0x6d6c70);
    for (std::size_t l = 0; l < num_layers(); ++l) {
      const double limit = std::sqrt(6.0 / static_cast<double>(dims_[l] + dims_[l + 1]));
      double* w = weights(l);
      for (std::size_t i = 0; i < dims_[l] * dims_[l + 1]; ++i) w[i] = rng.uniform(-limit, limit);
      double* b = bias(l);
      for (std::size_t o = 0; o < dims_[l + 1]; ++o) b[o] = 0.0;
    }
  }

 private:
  std::vector<std::size_t> dims_;
  int num_stages_;
  std::vector<std::size_t> w_offset_;
  std::vector<std::size_t> b_offset_;
  std::vector<double> params_;
};

/// Activations kept by forward_batch for backward.
struct ForwardCache {
  std::vector<Matrix> inputs;  // input to each layer
  std::vector<Matrix> pre;     // pre-activation of each layer

  bool empty() const { return inputs.empty(); }
};

namespace detail {
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVec = Eigen::Matrix<double, 1, Eigen::Dynamic>;

inline Eigen::Map<RowMat> view(Matrix& m) { return {m.data.data(), static_cast<Eigen::Index>(m.rows), static_cast<Eigen::Index>(m.cols)}; }
inline Eigen::Map<const RowMat> view(const Matrix& m) {
  return {m.data.data(), static_cast<Eigen::Index>(m.rows), static_cast<Eigen::Index>(m.cols)};
}
}  // namespace detail

/// Forward pass over a batch whose rows already contain the embedding.
inline Matrix forward_batch(const MlpNet& net, Matrix input, ForwardCache* cache = nullptr) {
  if (input.cols != net.dims()[0]) {
    throw DimensionError("input has " + std::to_string(input.cols) + " columns, network expects " +
                         std::to_string(net.dims()[0]));
  }
  if (cache) {
    cache->inputs.clear();
    cache->pre.clear();
  }
  const std::size_t n = input.rows;
  Matrix a = std::move(input);
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    const auto in = static_cast<Eigen::Index>(net.dims()[l]);
    const auto out = static_cast<Eigen::Index>(net.dims()[l + 1]);
    const Eigen::Map<const detail::RowMat> W(net.weights(l), in, out);
    const Eigen::Map<const detail::RowVec> b(net.bias(l), out);
    Matrix z(n, static_cast<std::size_t>(out));
    auto Z = detail::view(z);
    Z.noalias() = detail::view(a) * W;
    Z.rowwise() += b;
    const bool last = (l + 1 == net.num_layers());
    Matrix next = z;
    if (!last) {
      for (double& v : next.data) v = v * sigmoid(v);
    }
    if (cache) {
      cache->inputs.push_back(std::move(a));
      cache->pre.push_back(std::move(z));
    }
    a = std::move(next);
  }
  return a;
}

/// Single-row forward: appends the (t, stage) embedding to `features`.
inline std::vector<double> forward(const MlpNet& net, std::span<const double> features, double t, int stage) {
  if (features.size() != net.feature_dims()) {
    throw DimensionError("input length " + std::to_string(features.size()) + ", expected " +
                         std::to_string(net.feature_dims()));
  }
  Matrix x(1, net.dims()[0]);
  std::copy(features.begin(), features.end(), x.row(0));
  net.embed(t, stage, x.row(0) + features.size());
  Matrix y = forward_batch(net, std::move(x));
  return y.data;
}

/// Reverse-mode gradient of sum(upstream . output) with respect to all
/// parameters, laid out like MlpNet::params().
inline std::vector<double> backward(const MlpNet& net, const ForwardCache& cache, const Matrix& upstream) {
  if (cache.empty() || cache.inputs.size() != net.num_layers()) {
    throw StateError("backward called without cached forward activations");
  }
  const std::size_t n = cache.inputs.front().rows;
  if (upstream.rows != n || upstream.cols != net.output_dims()) {
    throw DimensionError("upstream gradient shape does not match network output");
  }
  std::vector<double> grad(net.param_count(), 0.0);
  Matrix g = upstream;  // gradient at the current layer's pre-activation
  for (std::size_t l = net.num_layers(); l-- > 0;) {
    const auto in = static_cast<Eigen::Index>(net.dims()[l]);
    const auto out = static_cast<Eigen::Index>(net.dims()[l + 1]);
    const auto G = detail::view(g);
    Eigen::Map<detail::RowMat> gW(grad.data() + net.weight_offset(l), in, out);
    Eigen::Map<detail::RowVec> gb(grad.data() + net.bias_offset(l), out);
    gW.noalias() = detail::view(cache.inputs[l]).transpose() * G;
    gb = G.colwise().sum();
    if (l == 0) break;
    // Into the previous layer's pre-activation through W^T and SiLU'.
    const Eigen::Map<const detail::RowMat> W(net.weights(l), in, out);
    Matrix gprev(n, static_cast<std::size_t>(in));
    detail::view(gprev).noalias() = G * W.transpose();
    const Matrix& zprev = cache.pre[l - 1];
    for (std::size_t i = 0; i < gprev.data.size(); ++i) {
      const double z = zprev.data[i];
      const double sg = sigmoid(z);
      gprev.data[i] *= sg * (1.0 + z * (1.0 - sg));
    }
    g = std::move(gprev);
  }
  return grad;
}

}  // namespace pyrflow::model

#pragma once

#include <cstdint>
#include <random>

namespace pyrflow {

// SplitMix64 finalizer; used to derive independent stream ids.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Child stream id for sub-task `index` of stream `parent`.
constexpr std::uint64_t substream(std::uint64_t parent, std::uint64_t index) noexcept {
  return mix64(mix64(parent) ^ (index + 0x632be59bd9b4e019ULL));
}

/// A reproducible random stream keyed by (seed, stream id).
///
/// Two streams constructed from the same key produce the same sequence no
/// matter what other streams exist or in which order they are consumed.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream_id),
                      static_cast<std::uint32_t>(stream_id >> 32)};
    engine_.seed(seq);
  }

  double normal() { return normal_(engine_); }

  // Uniform on [lo, hi).
  double uniform(double lo, double hi) {
    return lo + (hi - lo) * std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
  }

  // Uniform integer on [0, n).
  int uniform_int(int n) { return std::uniform_int_distribution<int>(0, n - 1)(engine_); }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace pyrflow

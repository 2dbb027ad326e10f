#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pyrflow/errors.hpp"
#include "pyrflow/temporal.hpp"

namespace pyrflow {

/// Video size and latent compression used for token arithmetic. The defaults
/// are a 241-frame 768x1280 clip through an 8x8x8 causal VAE with 2x2 patches.
struct VideoSpec {
  std::size_t frames = 241;
  std::size_t height = 768;
  std::size_t width = 1280;
  std::size_t vae_spatial = 8;
  std::size_t vae_temporal = 8;
  bool causal_first_frame = true;
  std::size_t patch = 2;

  void validate(int K = 1) const {
    if (frames == 0 || height == 0 || width == 0 || vae_spatial == 0 || vae_temporal == 0 || patch == 0) {
      throw ArgumentError("video spec fields must be positive");
    }
    if (K < 1) throw ArgumentError("number of stages must be >= 1");
    const std::size_t unit = vae_spatial * patch * (std::size_t{1} << (K - 1));
    if (height % unit != 0 || width % unit != 0) {
      throw ArgumentError("height and width must be divisible by vae_spatial * patch * 2^(K-1) = " +
                          std::to_string(unit));
    }
  }
};

/// Latent frame count: the first frame is kept and the rest are compressed
/// temporally when the VAE is causal.
inline std::size_t latent_frames(const VideoSpec& spec) {
  if (spec.vae_temporal == 0 || spec.frames == 0) throw ArgumentError("frames and vae_temporal must be positive");
  if (spec.causal_first_frame) {
    if ((spec.frames - 1) % spec.vae_temporal != 0) {
      throw ArgumentError("frames - 1 = " + std::to_string(spec.frames - 1) + " not divisible by vae_temporal " +
                          std::to_string(spec.vae_temporal));
    }
    return 1 + (spec.frames - 1) / spec.vae_temporal;
  }
  if (spec.frames % spec.vae_temporal != 0) {
    throw ArgumentError("frames not divisible by vae_temporal " + std::to_string(spec.vae_temporal));
  }
  return spec.frames / spec.vae_temporal;
}

inline std::size_t tokens_per_frame(const VideoSpec& spec) {
  spec.validate();
  const std::size_t unit = spec.vae_spatial * spec.patch;
  return (spec.height / unit) * (spec.width / unit);
}

/// Every latent frame at full resolution.
inline std::size_t tokens_full(const VideoSpec& spec) { return latent_frames(spec) * tokens_per_frame(spec); }

/// History divisors (oldest first) for every past latent frame when the
/// current frame is generated at stage k.
inline std::vector<std::size_t> default_history_divisors(const VideoSpec& spec, int K, int k = 0) {
  return history_divisors(latent_frames(spec) - 1, k, K);
}

/// Current frame at full resolution plus each history frame at its divisor.
inline std::size_t tokens_pyramid(const VideoSpec& spec, int K, std::span<const std::size_t> divisors) {
  spec.validate(K);
  const std::size_t T = latent_frames(spec);
  if (divisors.size() > T - 1) {
    throw ArgumentError("history has " + std::to_string(divisors.size()) + " frames but the clip only " +
                        std::to_string(T - 1));
  }
  const std::size_t coarsest = std::size_t{1} << (K - 1);
  for (std::size_t i = 0; i < divisors.size(); ++i) {
    if (!is_power_of_two(divisors[i]) || divisors[i] > coarsest) {
      throw ArgumentError("history divisor " + std::to_string(divisors[i]) + " is not a power of two <= " +
                          std::to_string(coarsest));
    }
    if (i > 0 && divisors[i] > divisors[i - 1]) {
      throw ArgumentError("history divisors must not increase toward the present");
    }
  }
  const std::size_t N = tokens_per_frame(spec);
  return token_count(divisors, N, N);
}

inline std::size_t tokens_pyramid(const VideoSpec& spec, int K) {
  const auto d = default_history_divisors(spec, K);
  return tokens_pyramid(spec, K, d);
}

/// Full attention over n tokens costs n^2 pairwise interactions.
inline std::uint64_t attention_cost(std::uint64_t tokens) { return tokens * tokens; }

}  // namespace pyrflow

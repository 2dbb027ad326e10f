#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "pyrflow/errors.hpp"
#include "pyrflow/flow.hpp"
#include "pyrflow/grid.hpp"
#include "pyrflow/rng.hpp"
#include "pyrflow/schedule.hpp"

namespace pyrflow {

inline constexpr double kMaxHistoryCorruption = 1.0 / 3.0;

struct HistoryEntry {
  int frame_index = 0;
  std::size_t divisor = 1;
  LatentGrid grid;
  double corruption = 0.0;
};

/// Past-frame condition for the frame being generated, oldest entry first.
/// The newest entry sits at the current stage's resolution and each older
/// frame is halved again, down to the coarsest pyramid level.
struct HistoryPyramid {
  std::vector<HistoryEntry> entries;
  Stage current_stage;
  Shape full_shape;

  int current_frame_index() const { return static_cast<int>(entries.size()); }
};

enum class HistoryMode { Train, Infer };

/// Divisors for `num_past` history frames, oldest first, when the current
/// frame is generated at stage k of a K-stage pyramid.
inline std::vector<std::size_t> history_divisors(std::size_t num_past, int k, int K) {
  if (K < 1 || k < 0 || k >= K) throw ArgumentError("stage index must satisfy 0 <= k < K");
  std::vector<std::size_t> out(num_past);
  for (std::size_t back = 0; back < num_past; ++back) {
    const int level = std::min(k + static_cast<int>(back), K - 1);
    out[num_past - 1 - back] = std::size_t{1} << level;
  }
  return out;
}

/// Builds the history condition. In train mode each entry is blended with
/// fresh noise at an independent strength u ~ U[0, 1/3]:
/// entry = (1 - u) * down(frame) + u * noise. In infer mode entries are clean.
inline HistoryPyramid build_history(std::span<const LatentGrid> past_frames, const StageSchedule& schedule, int k,
                                    HistoryMode mode, RngStream& rng) {
  const int K = schedule.num_stages();
  HistoryPyramid h;
  h.current_stage = schedule.stage(k);
  if (past_frames.empty()) return h;

  h.full_shape = past_frames.front().shape();
  const std::size_t coarsest = std::size_t{1} << (K - 1);
  if (h.full_shape.height % coarsest != 0 || h.full_shape.width % coarsest != 0) {
    throw DimensionError("history frames " + to_string(h.full_shape) + " not divisible by " +
                         std::to_string(coarsest));
  }
  const auto divisors = history_divisors(past_frames.size(), k, K);
  for (std::size_t i = 0; i < past_frames.size(); ++i) {
    if (past_frames[i].shape() != h.full_shape) {
      throw DimensionError("history frame " + std::to_string(i) + " has shape " +
                           to_string(past_frames[i].shape()) + ", expected " + to_string(h.full_shape));
    }
    HistoryEntry e;
    e.frame_index = static_cast<int>(i);
    e.divisor = divisors[i];
    e.grid = down(past_frames[i], e.divisor);
    if (mode == HistoryMode::Train) {
      e.corruption = rng.uniform(0.0, kMaxHistoryCorruption);
      e.grid *= 1.0 - e.corruption;
      e.grid.axpy(e.corruption, gaussian(e.grid.shape(), rng));
    }
    h.entries.push_back(std::move(e));
  }
  return h;
}

/// Blockwise causal attention: a token may attend to every token of its own
/// frame and of earlier frames.
struct AttentionMask {
  std::vector<int> frame_of_token;
  std::vector<std::uint8_t> allowed;  // row-major, n x n

  std::size_t num_tokens() const { return frame_of_token.size(); }
  bool at(std::size_t q, std::size_t kv) const { return allowed[q * num_tokens() + kv] != 0; }
};

inline AttentionMask causal_mask(std::span<const std::size_t> tokens_per_frame) {
  if (tokens_per_frame.empty()) throw ArgumentError("causal mask needs at least one frame");
  AttentionMask m;
  for (std::size_t f = 0; f < tokens_per_frame.size(); ++f) {
    m.frame_of_token.insert(m.frame_of_token.end(), tokens_per_frame[f], static_cast<int>(f));
  }
  const std::size_t n = m.num_tokens();
  m.allowed.assign(n * n, 0);
  for (std::size_t q = 0; q < n; ++q) {
    for (std::size_t kv = 0; kv < n; ++kv) m.allowed[q * n + kv] = m.frame_of_token[kv] <= m.frame_of_token[q];
  }
  return m;
}

inline AttentionMask causal_mask(std::size_t frames, std::size_t tokens_per_frame) {
  std::vector<std::size_t> counts(frames, tokens_per_frame);
  return causal_mask(counts);
}

/// Continuous 2D position of one token plus its frame index. `extent` is the
/// side length, in full-resolution pixels, that the token covers.
struct TokenPosition {
  double y = 0.0;
  double x = 0.0;
  int frame = 0;
  double extent = 1.0;
};

struct PositionGrid {
  std::vector<TokenPosition> tokens;
};

struct BoundingBox {
  double y0, x0, y1, x1;
  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

// Region of the full frame covered by the given tokens.
inline BoundingBox coverage(std::span<const TokenPosition> tokens) {
  BoundingBox b{1e300, 1e300, -1e300, -1e300};
  for (const auto& t : tokens) {
    const double h = t.extent / 2.0;
    b.y0 = std::min(b.y0, t.y - h + 0.5);
    b.x0 = std::min(b.x0, t.x - h + 0.5);
    b.y1 = std::max(b.y1, t.y + h + 0.5);
    b.x1 = std::max(b.x1, t.x + h + 0.5);
  }
  return b;
}

/// History tokens are placed at the centres of the full-resolution blocks they
/// summarize (interpolated), so every history entry spans the same frame area.
/// Current-stage tokens keep the integer lattice of their own reduced grid
/// (extrapolated).
inline PositionGrid position_grids(const HistoryPyramid& history, const Shape& full) {
  PositionGrid pg;
  for (const auto& e : history.entries) {
    const double d = static_cast<double>(e.divisor);
    const double centre = (d - 1.0) / 2.0;
    for (std::size_t y = 0; y < e.grid.height(); ++y) {
      for (std::size_t x = 0; x < e.grid.width(); ++x) {
        pg.tokens.push_back({static_cast<double>(y) * d + centre, static_cast<double>(x) * d + centre,
                             e.frame_index, d});
      }
    }
  }
  const Shape cur = stage_shape(full, history.current_stage.divisor);
  for (std::size_t y = 0; y < cur.height; ++y) {
    for (std::size_t x = 0; x < cur.width; ++x) {
      pg.tokens.push_back({static_cast<double>(y), static_cast<double>(x), history.current_frame_index(), 1.0});
    }
  }
  return pg;
}

inline std::size_t token_count(const HistoryPyramid& history, std::size_t current_tokens) {
  std::size_t n = current_tokens;
  for (const auto& e : history.entries) n += e.grid.shape().pixels();
  return n;
}

/// Token count when a full-resolution frame has `frame_tokens` tokens and a
/// history frame at divisor d keeps frame_tokens / d^2 of them.
inline std::size_t token_count(std::span<const std::size_t> history_divisors, std::size_t frame_tokens,
                               std::size_t current_tokens) {
  std::size_t n = current_tokens;
  for (std::size_t d : history_divisors) {
    if (d == 0 || frame_tokens % (d * d) != 0) {
      throw ArgumentError("frame token count " + std::to_string(frame_tokens) + " not divisible by " +
                          std::to_string(d) + "^2");
    }
    n += frame_tokens / (d * d);
  }
  return n;
}

inline AttentionMask history_mask(const HistoryPyramid& history, std::size_t current_tokens) {
  std::vector<std::size_t> counts;
  for (const auto& e : history.entries) counts.push_back(e.grid.shape().pixels());
  counts.push_back(current_tokens);
  return causal_mask(counts);
}

}  // namespace pyrflow

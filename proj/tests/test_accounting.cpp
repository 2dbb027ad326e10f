#include <gtest/gtest.h>

#include <vector>

#include "pyrflow/accounting.hpp"

using namespace pyrflow;

TEST(LatentFrames, Examples) {
  EXPECT_EQ(latent_frames(VideoSpec{}), 31u);
  VideoSpec image;
  image.frames = 1;
  EXPECT_EQ(latent_frames(image), 1u);
  VideoSpec nc;
  nc.frames = 16;
  nc.causal_first_frame = false;
  EXPECT_EQ(latent_frames(nc), 2u);
}

TEST(LatentFrames, NonDivisible) {
  VideoSpec bad;
  bad.frames = 240;
  EXPECT_THROW(latent_frames(bad), ArgumentError);
  bad.causal_first_frame = false;
  bad.frames = 241;
  EXPECT_THROW(latent_frames(bad), ArgumentError);
}

TEST(TokensFull, Examples) {
  EXPECT_EQ(tokens_per_frame(VideoSpec{}), 3840u);
  EXPECT_EQ(tokens_full(VideoSpec{}), 119040u);
  VideoSpec small;
  small.frames = 1;
  small.height = 128;
  small.width = 128;
  EXPECT_EQ(tokens_full(small), 64u);
  VideoSpec big = small;
  big.height = 256;
  big.width = 256;
  EXPECT_EQ(tokens_full(big), 4 * tokens_full(small));
}

TEST(VideoSpec, Validation) {
  VideoSpec s;
  s.patch = 0;
  EXPECT_THROW(s.validate(), ArgumentError);
  VideoSpec odd;
  odd.height = 776;  // divisible by 8 but not by 8 * 2 * 4
  EXPECT_THROW(odd.validate(3), ArgumentError);
  EXPECT_NO_THROW(VideoSpec{}.validate(3));
}

TEST(TokensPyramid, DefaultScheduleMeetsBound) {
  const auto d = default_history_divisors(VideoSpec{}, 3);
  ASSERT_EQ(d.size(), 30u);
  EXPECT_EQ(d.back(), 1u);
  EXPECT_EQ(d[28], 2u);
  EXPECT_EQ(d.front(), 4u);
  EXPECT_EQ(tokens_pyramid(VideoSpec{}, 3), 15360u);
  EXPECT_LE(tokens_pyramid(VideoSpec{}, 3), 15360u);
}

TEST(TokensPyramid, NewestAtTwoRestAtFour) {
  std::vector<std::size_t> d(29, 4);
  d.push_back(2);
  EXPECT_EQ(tokens_pyramid(VideoSpec{}, 3, d), 11760u);
  EXPECT_EQ(d, default_history_divisors(VideoSpec{}, 3, 1));
}

TEST(TokensPyramid, DegenerateCases) {
  EXPECT_EQ(tokens_pyramid(VideoSpec{}, 3, std::vector<std::size_t>{}), 3840u);
  const std::vector<std::size_t> ones(30, 1);
  EXPECT_EQ(tokens_pyramid(VideoSpec{}, 1, ones), tokens_full(VideoSpec{}));
}

TEST(TokensPyramid, NeverExceedsFull) {
  for (int K = 1; K <= 4; ++K) {
    for (int k = 0; k < K; ++k) {
      const auto d = default_history_divisors(VideoSpec{}, K, k);
      const auto n = tokens_pyramid(VideoSpec{}, K, d);
      EXPECT_LE(n, tokens_full(VideoSpec{}));
      const bool all_ones = std::all_of(d.begin(), d.end(), [](std::size_t v) { return v == 1; });
      EXPECT_EQ(n == tokens_full(VideoSpec{}), all_ones);
    }
  }
}

TEST(TokensPyramid, InvalidSchedules) {
  std::vector<std::size_t> increasing(30, 1);
  increasing.back() = 2;
  EXPECT_THROW(tokens_pyramid(VideoSpec{}, 3, increasing), ArgumentError);
  std::vector<std::size_t> too_coarse(30, 8);
  EXPECT_THROW(tokens_pyramid(VideoSpec{}, 3, too_coarse), ArgumentError);
  std::vector<std::size_t> too_long(31, 4);
  EXPECT_THROW(tokens_pyramid(VideoSpec{}, 3, too_long), ArgumentError);
  std::vector<std::size_t> not_pow2(30, 3);
  EXPECT_THROW(tokens_pyramid(VideoSpec{}, 3, not_pow2), ArgumentError);
}

TEST(AttentionCost, Examples) {
  EXPECT_EQ(attention_cost(0), 0u);
  EXPECT_EQ(attention_cost(100), 10000u);
  EXPECT_EQ(attention_cost(119040), 14170521600ull);
  EXPECT_LT(attention_cost(11760), attention_cost(15360));
}

TEST(AttentionCost, PyramidRatio) {
  const double ratio = static_cast<double>(attention_cost(tokens_pyramid(VideoSpec{}, 3))) /
                       static_cast<double>(attention_cost(tokens_full(VideoSpec{})));
  // 15360^2 / 119040^2 = (16/124)^2
  EXPECT_NEAR(ratio, (16.0 / 124.0) * (16.0 / 124.0), 1e-15);
}

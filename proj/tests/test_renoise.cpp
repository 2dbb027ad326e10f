#include <gtest/gtest.h>

#include <cmath>

#include "pyrflow/renoise.hpp"
#include "pyrflow/renoise_check.hpp"

using namespace pyrflow;

TEST(SolveJump, DecorrelatedExamples) {
  const auto p = solve_jump(2.0 / 3.0);
  EXPECT_NEAR(p.e_prev, 0.8, 1e-15);
  EXPECT_NEAR(p.rescale, 5.0 / 6.0, 1e-15);
  EXPECT_NEAR(p.alpha, std::sqrt(3.0) / 6.0, 1e-15);
  const auto q = solve_jump(1.0 / 3.0);
  EXPECT_NEAR(q.e_prev, 0.5, 1e-15);
  EXPECT_NEAR(q.rescale, 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(q.alpha, std::sqrt(3.0) / 3.0, 1e-15);
}

TEST(SolveJump, GammaZeroLimit) {
  for (double s : {0.1, 0.5, 0.9}) {
    const auto p = solve_jump(s, 0.0);
    EXPECT_EQ(p.e_prev, 1.0);
    EXPECT_EQ(p.alpha, 1.0 - s);
    EXPECT_EQ(p.rescale, s);
  }
}

TEST(SolveJump, GeneralFormulaAgreesWithClosedForm) {
  // Just inside the range the general branch runs; it must approach the special cases.
  const double s = 0.4;
  const auto near_decor = solve_jump(s, -1.0 / 3.0 + 1e-12);
  const auto decor = solve_jump(s);
  EXPECT_NEAR(near_decor.e_prev, decor.e_prev, 1e-6);
  EXPECT_NEAR(near_decor.alpha, decor.alpha, 1e-6);
}

TEST(SolveJump, MatchingEquationsAndInvariants) {
  RngStream rng(3, 0);
  for (int i = 0; i < 200; ++i) {
    const double s = rng.uniform(0.01, 0.99);
    const double g = rng.uniform(-1.0 / 3.0, 0.0);
    const auto p = solve_jump(s, g);
    const double noise = p.rescale * p.rescale * (1.0 - p.e_prev) * (1.0 - p.e_prev);
    EXPECT_NEAR(noise + p.alpha * p.alpha, (1.0 - s) * (1.0 - s), 1e-14);
    EXPECT_NEAR(noise + p.alpha * p.alpha * g, 0.0, 1e-14);
    EXPECT_NEAR(p.rescale, s / p.e_prev, 1e-14);
    EXPECT_NEAR(p.alpha, (1.0 - s) / std::sqrt(1.0 - g), 1e-14);
    EXPECT_GT(p.e_prev, s);
  }
}

TEST(SolveJump, Errors) {
  EXPECT_THROW(solve_jump(0.0), ArgumentError);
  EXPECT_THROW(solve_jump(1.0), ArgumentError);
  EXPECT_THROW(solve_jump(0.5, -0.34), ArgumentError);
  EXPECT_THROW(solve_jump(0.5, 0.01), ArgumentError);
  EXPECT_THROW(solve_jump(std::nan(""), -0.2), ArgumentError);
}

TEST(BlockNoise, Coefficients) {
  const auto c = block_noise_coefficients(-1.0 / 3.0);
  EXPECT_NEAR(c.a, 2.0 / std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(c.a + c.b, 0.0, 1e-15);
  const auto w = block_noise_coefficients(0.0);
  EXPECT_EQ(w.a, 1.0);
  EXPECT_EQ(w.b, 0.0);
}

TEST(CorrectiveNoise, BlocksSumToZero) {
  RngStream rng(4, 0);
  const auto n = corrective_noise(Shape{16, 16, 3}, -1.0 / 3.0, rng);
  for (std::size_t y = 0; y < 16; y += 2) {
    for (std::size_t x = 0; x < 16; x += 2) {
      for (std::size_t c = 0; c < 3; ++c) {
        EXPECT_EQ(n.at(y, x, c) + n.at(y, x + 1, c) + n.at(y + 1, x, c) + n.at(y + 1, x + 1, c), 0.0);
      }
    }
  }
}

TEST(CorrectiveNoise, DecorrelatedFormula) {
  // At gamma = -1/3 the first three entries are (2/sqrt3)(z_i - mean z).
  RngStream a(5, 0), b(5, 0);
  const auto n = corrective_noise(Shape{2, 2, 1}, -1.0 / 3.0, a);
  double z[4];
  for (double& v : z) v = b.normal();
  const double m = (z[0] + z[1] + z[2] + z[3]) / 4.0;
  EXPECT_NEAR(n.at(0, 0), 2.0 / std::sqrt(3.0) * (z[0] - m), 1e-14);
  EXPECT_NEAR(n.at(0, 1), 2.0 / std::sqrt(3.0) * (z[1] - m), 1e-14);
  EXPECT_NEAR(n.at(1, 0), 2.0 / std::sqrt(3.0) * (z[2] - m), 1e-14);
  EXPECT_NEAR(n.at(1, 1), 2.0 / std::sqrt(3.0) * (z[3] - m), 1e-14);
}

TEST(CorrectiveNoise, WhiteAtGammaZero) {
  RngStream a(6, 0), b(6, 0);
  const auto n = corrective_noise(Shape{2, 2, 1}, 0.0, a);
  EXPECT_EQ(n.at(0, 0), b.normal());
  EXPECT_EQ(n.at(0, 1), b.normal());
}

TEST(CorrectiveNoise, OddDimsRejected) {
  RngStream rng(1, 0);
  EXPECT_THROW(corrective_noise(Shape{3, 4, 1}, -1.0 / 3.0, rng), DimensionError);
  EXPECT_THROW(corrective_noise(Shape{4, 3, 1}, -1.0 / 3.0, rng), DimensionError);
}

TEST(CorrectiveNoise, CovarianceMonteCarlo) {
  for (double g : {-1.0 / 3.0, -0.2, 0.0}) {
    RngStream rng(7, 0);
    const auto m = noise_moments(g, 1000000, rng);
    EXPECT_NEAR(m.diagonal, 1.0, 0.01) << g;
    EXPECT_NEAR(m.off_diagonal, g, 0.01) << g;
  }
}

TEST(Jump, WithoutNoiseIsUpsample) {
  const auto x = gaussian(Shape{3, 5, 2}, 8, 0);
  RngStream rng(1, 0);
  JumpParams p;
  p.rescale = 1.0;
  p.alpha = 0.0;
  EXPECT_EQ(jump(x, p, rng), up(x, 2));
}

TEST(Jump, ZeroInputGivesScaledNoise) {
  const auto p = solve_jump(2.0 / 3.0);
  RngStream rng(9, 0);
  const auto y = jump(LatentGrid(Shape{1000, 1000, 1}), p, rng);
  double mean = 0, sq = 0;
  for (double v : y.data()) {
    mean += v;
    sq += v * v;
  }
  const auto n = static_cast<double>(y.size());
  mean /= n;
  EXPECT_NEAR(mean, 0.0, 0.005);
  EXPECT_NEAR(std::sqrt(sq / n - mean * mean), std::sqrt(3.0) / 6.0, 0.005);
}

TEST(Jump, MatchesPathLawAtNextStart) {
  const auto x1 = gaussian(Shape{8, 8, 1}, 10, 0);
  RngStream rng(10, 1);
  const auto m = jump_moments(x1, 1.0 / 3.0, -1.0 / 3.0, 200000, rng);
  EXPECT_LT(m.max_mean_error, 0.01);
  EXPECT_LT(m.max_variance_error, 0.01);
  EXPECT_NEAR(m.mean_variance, 4.0 / 9.0, 0.005);
  EXPECT_LT(std::abs(m.mean_block_covariance), 0.005);
}

TEST(VerifyRenoise, PassesAtNominalAndWidensTolerance) {
  const auto r = verify_renoise(-1.0 / 3.0, 2.0 / 3.0, 100000, 3);
  EXPECT_TRUE(r.pass());
  EXPECT_NEAR(r.noise_tolerance, 0.01 * std::sqrt(10.0), 1e-12);
  EXPECT_EQ(r.noise.max_block_sum, 0.0);
}

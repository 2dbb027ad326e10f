#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "pyrflow/grid.hpp"

using namespace pyrflow;

namespace {

LatentGrid grid(std::size_t h, std::size_t w, std::vector<double> v, std::size_t c = 1) {
  return LatentGrid(Shape{h, w, c}, std::move(v));
}

}  // namespace

TEST(LatentGrid, RejectsZeroDimensions) {
  EXPECT_THROW(LatentGrid(Shape{0, 2, 1}), DimensionError);
  EXPECT_THROW(LatentGrid(Shape{2, 0, 1}), DimensionError);
  EXPECT_THROW(LatentGrid(Shape{2, 2, 0}), DimensionError);
}

TEST(LatentGrid, RejectsWrongLengthAndNonFinite) {
  EXPECT_THROW(grid(2, 2, {1, 2, 3}), DimensionError);
  EXPECT_THROW(grid(1, 1, {std::nan("")}), NumericalError);
  EXPECT_THROW(grid(1, 1, {INFINITY}), NumericalError);
}

TEST(LatentGrid, ChannelInnermostLayout) {
  const auto g = grid(1, 2, {1, 2, 3, 4, 5, 6}, 3);
  EXPECT_EQ(g.at(0, 1, 0), 4);
  EXPECT_EQ(g.at(0, 0, 2), 3);
}

TEST(Down, BlockMean) {
  EXPECT_EQ(down(grid(2, 2, {1, 3, 5, 7}), 2), grid(1, 1, {4}));
}

TEST(Down, RowIndexGrid) {
  std::vector<double> v;
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 4; ++x) v.push_back(y);
  }
  EXPECT_EQ(down(grid(4, 4, v), 2), grid(2, 2, {0.5, 0.5, 2.5, 2.5}));
}

TEST(Down, ConstantStaysConstant) {
  const LatentGrid c(Shape{8, 8, 2}, 1.25);
  for (std::size_t f : {1, 2, 4, 8}) {
    const auto d = down(c, f);
    EXPECT_EQ(d.shape(), (Shape{8 / f, 8 / f, 2}));
    for (double v : d.data()) EXPECT_EQ(v, 1.25);
  }
}

TEST(Down, Errors) {
  EXPECT_THROW(down(LatentGrid(Shape{6, 6, 1}), 4), DimensionError);
  EXPECT_THROW(down(LatentGrid(Shape{6, 6, 1}), 3), ArgumentError);
  EXPECT_THROW(down(LatentGrid(Shape{6, 6, 1}), 0), ArgumentError);
}

TEST(Up, Replicates) {
  EXPECT_EQ(up(grid(1, 1, {4}), 2), grid(2, 2, {4, 4, 4, 4}));
  EXPECT_EQ(up(grid(2, 1, {1, 2}), 2), grid(4, 2, {1, 1, 1, 1, 2, 2, 2, 2}));
}

TEST(Up, Errors) {
  EXPECT_THROW(up(LatentGrid(Shape{2, 2, 1}), 3), ArgumentError);
  EXPECT_THROW(up(LatentGrid(Shape{8, 1, 1}), std::size_t{1} << 30), DimensionError);
}

TEST(UpDown, DownOfUpIsIdentity) {
  const auto g = gaussian(Shape{4, 6, 3}, 11, 0);
  for (std::size_t f : {1, 2, 4}) EXPECT_LT(max_abs_diff(down(up(g, f), f), g), 1e-15);
}

TEST(UpDown, Linear) {
  const auto a = gaussian(Shape{8, 8, 1}, 1, 0);
  const auto b = gaussian(Shape{8, 8, 1}, 1, 1);
  const auto combo = 2.0 * a + (-3.0) * b;
  EXPECT_LT(max_abs_diff(down(combo, 4), 2.0 * down(a, 4) + (-3.0) * down(b, 4)), 1e-14);
  EXPECT_LT(max_abs_diff(up(combo, 2), 2.0 * up(a, 2) + (-3.0) * up(b, 2)), 1e-14);
}

TEST(Lerp, EndpointsAndMidpoint) {
  const auto a = gaussian(Shape{2, 2, 1}, 3, 0);
  const auto b = gaussian(Shape{2, 2, 1}, 3, 1);
  EXPECT_EQ(lerp(a, b, 0.0), a);
  EXPECT_EQ(lerp(a, b, 1.0), b);
  EXPECT_EQ(lerp(grid(1, 1, {0}), grid(1, 1, {2}), 0.25), grid(1, 1, {0.5}));
  EXPECT_THROW(lerp(a, LatentGrid(Shape{1, 2, 1}), 0.5), DimensionError);
}

TEST(Gaussian, Deterministic) {
  EXPECT_EQ(gaussian(Shape{5, 7, 2}, 42, 3), gaussian(Shape{5, 7, 2}, 42, 3));
  EXPECT_NE(gaussian(Shape{5, 7, 2}, 42, 3), gaussian(Shape{5, 7, 2}, 42, 4));
  EXPECT_NE(gaussian(Shape{5, 7, 2}, 42, 3), gaussian(Shape{5, 7, 2}, 43, 3));
}

TEST(Gaussian, MomentsAndStreamIndependence) {
  const Shape s{1000, 1000, 1};
  const auto a = gaussian(s, 9, 0);
  const auto b = gaussian(s, 9, 1);
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  const double n = static_cast<double>(a.size());
  ma /= n;
  mb /= n;
  double va = 0, vb = 0, cab = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    va += (a[i] - ma) * (a[i] - ma);
    vb += (b[i] - mb) * (b[i] - mb);
    cab += (a[i] - ma) * (b[i] - mb);
  }
  EXPECT_NEAR(ma, 0.0, 0.01);
  EXPECT_NEAR(va / n, 1.0, 0.01);
  EXPECT_LT(std::abs(cab / std::sqrt(va * vb)), 0.01);
}

TEST(Metrics, MseAndMaxAbs) {
  EXPECT_DOUBLE_EQ(mean_squared_error(grid(1, 2, {0, 0}), grid(1, 2, {1, 3})), 5.0);
  EXPECT_DOUBLE_EQ(max_abs_diff(grid(1, 2, {0, 0}), grid(1, 2, {1, -3})), 3.0);
}

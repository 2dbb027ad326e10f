#include <gtest/gtest.h>

#include <sstream>

#include "pyrflow/io/checkpoint.hpp"
#include "pyrflow/io/csv.hpp"
#include "pyrflow/io/grid_file.hpp"
#include "pyrflow/io/svg.hpp"

using namespace pyrflow;

namespace {

std::string grid_bytes(const LatentGrid& g) {
  std::ostringstream os(std::ios::binary);
  io::write_grid(os, g);
  return os.str();
}

}  // namespace

TEST(GridFile, LayoutIsLittleEndian) {
  const LatentGrid g(Shape{1, 2, 1}, std::vector<double>{1.0, -2.0});
  const std::string b = grid_bytes(g);
  ASSERT_EQ(b.size(), 4u + 12u + 16u);
  EXPECT_EQ(b.substr(0, 4), "PYRG");
  EXPECT_EQ(b.substr(4, 4), std::string("\x01\x00\x00\x00", 4));
  EXPECT_EQ(b.substr(8, 4), std::string("\x02\x00\x00\x00", 4));
  EXPECT_EQ(b.substr(12, 4), std::string("\x01\x00\x00\x00", 4));
  // 1.0 = 0x3FF0000000000000
  EXPECT_EQ(b.substr(16, 8), std::string("\x00\x00\x00\x00\x00\x00\xf0\x3f", 8));
}

TEST(GridFile, RoundTripBitExact) {
  const auto g = gaussian(Shape{3, 5, 2}, 1, 0);
  std::istringstream is(grid_bytes(g));
  EXPECT_EQ(io::read_grid(is), g);
}

TEST(GridFile, Errors) {
  std::istringstream bad_magic(std::string("PYRX") + std::string(12, '\0'));
  EXPECT_THROW(io::read_grid(bad_magic), IoError);
  const std::string b = grid_bytes(gaussian(Shape{2, 2, 1}, 1, 0));
  std::istringstream truncated(b.substr(0, b.size() - 3));
  EXPECT_THROW(io::read_grid(truncated), IoError);
  std::istringstream zero(std::string("PYRG") + std::string(12, '\0'));
  EXPECT_THROW(io::read_grid(zero), IoError);
  EXPECT_THROW(io::load_grid("/nonexistent/dir/file.pyrg"), IoError);
}

TEST(Checkpoint, RoundTrip) {
  auto net = model::make_local_net(model::kImageSpec, std::vector<std::size_t>{5, 4}, 3);
  net.init(9);
  std::ostringstream os(std::ios::binary);
  io::write_checkpoint(os, net);
  const std::string bytes = os.str();
  EXPECT_EQ(bytes.substr(0, 4), "PYRM");
  EXPECT_EQ(bytes.size(), 4u + 4u + 4u + 4u * 4u + 8u * net.param_count());
  std::istringstream is(bytes);
  const auto ck = io::read_checkpoint(is);
  EXPECT_EQ(ck.net.dims(), net.dims());
  EXPECT_EQ(ck.net.params(), net.params());
  EXPECT_EQ(ck.net.num_stages(), 3);
  EXPECT_EQ(ck.spec, model::kImageSpec);
}

TEST(Checkpoint, PointModel) {
  auto net = model::make_local_net(model::kPointSpec, std::vector<std::size_t>{6}, 2);
  std::ostringstream os(std::ios::binary);
  io::write_checkpoint(os, net);
  std::istringstream is(os.str());
  const auto ck = io::read_checkpoint(is);
  EXPECT_EQ(ck.spec, model::kPointSpec);
  EXPECT_EQ(ck.net.num_stages(), 2);
}

TEST(Checkpoint, Errors) {
  auto net = model::make_local_net(model::kPointSpec, std::vector<std::size_t>{6}, 2);
  std::ostringstream os(std::ios::binary);
  io::write_checkpoint(os, net);
  std::string bytes = os.str();
  std::string wrong_version = bytes;
  wrong_version[4] = 2;
  std::istringstream v(wrong_version);
  EXPECT_THROW(io::read_checkpoint(v), IoError);
  std::istringstream t(bytes.substr(0, bytes.size() - 1));
  EXPECT_THROW(io::read_checkpoint(t), IoError);
  EXPECT_THROW(io::infer_field_spec(3), IoError);
}

TEST(Csv, NumberFormats) {
  EXPECT_EQ(io::format_short(2.0 / 3.0), "0.6667");
  EXPECT_EQ(io::format_short(1.0), "1.0");
  EXPECT_EQ(io::format_short(0.8), "0.8");
  EXPECT_EQ(io::format_short(0.0), "0.0");
  EXPECT_EQ(io::format_short(-1e-9), "0.0");
  EXPECT_EQ(io::format_double(0.1), "0.1");
  EXPECT_EQ(io::parse_double(io::format_double(1.0 / 3.0)), 1.0 / 3.0);
  EXPECT_THROW(io::parse_double("1.5x"), IoError);
}

TEST(Csv, ReadRejectsRaggedRows) {
  std::istringstream is("a,b\n1,2\n3\n");
  EXPECT_THROW(io::read_csv(is), IoError);
}

TEST(TrajectoryCsv, PointStatesAreFlattened) {
  Trajectory traj;
  traj.push_back({0.0, 1, LatentGrid(Shape{1, 2, 2}, std::vector<double>{0, 1, 2, 3})});
  traj.push_back({0.5, 0, LatentGrid(Shape{1, 2, 2}, std::vector<double>{0.5, 1, 2, 3})});
  std::ostringstream os;
  io::write_trajectory_csv(os, traj);
  EXPECT_EQ(os.str(), "step,t,stage,p0.0,p0.1,p1.0,p1.1\n0,0,1,0,1,2,3\n1,0.5,0,0.5,1,2,3\n");
}

TEST(TrajectoryCsv, GridStatesAreSummarised) {
  Trajectory traj;
  traj.push_back({0.0, 1, LatentGrid(Shape{1, 1, 1}, std::vector<double>{2})});
  traj.push_back({1.0, 0, LatentGrid(Shape{2, 1, 1}, std::vector<double>{1, 3})});
  std::ostringstream os;
  io::write_trajectory_csv(os, traj);
  EXPECT_EQ(os.str(), "step,t,stage,height,width,mean,std,min,max\n0,0,1,1,1,2,0,2,2\n1,1,0,2,1,2,1,1,3\n");
}

TEST(Svg, EmptyFileGivesAxesOnly) {
  std::istringstream empty("");
  const std::string svg = io::plot_trajectory_csv(empty);
  EXPECT_NE(svg.find("<svg"), std::string::npos);
  EXPECT_NE(svg.find("<line"), std::string::npos);
  EXPECT_EQ(svg.find("<polyline"), std::string::npos);
  std::istringstream header_only("step,t,stage\n");
  EXPECT_EQ(io::plot_trajectory_csv(header_only), svg);
}

TEST(Svg, StraightTrajectoryIsCollinear) {
  std::istringstream csv("step,t,stage,p0.0,p0.1\n0,0,0,-1,-1\n1,0.5,0,0,0\n2,1,0,1,1\n");
  const auto segs = io::read_plot_segments(csv);
  ASSERT_EQ(segs.size(), 1u);
  const auto& p = segs[0].points;
  ASSERT_EQ(p.size(), 3u);
  const double cross = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[1][1] - p[0][1]) * (p[2][0] - p[0][0]);
  EXPECT_EQ(cross, 0.0);
  std::istringstream again("step,t,stage,p0.0,p0.1\n0,0,0,-1,-1\n1,0.5,0,0,0\n2,1,0,1,1\n");
  const std::string svg = io::plot_trajectory_csv(again);
  EXPECT_NE(svg.find("<polyline"), std::string::npos);
}

TEST(Svg, OneColourPerStage) {
  std::istringstream csv("step,t,stage,p0.0,p0.1\n0,0,1,0,0\n1,0.5,1,1,0\n2,0.5,0,1,0\n3,1,0,1,1\n");
  const std::string svg = io::plot_trajectory_csv(csv);
  EXPECT_NE(svg.find(io::stage_colour(0)), std::string::npos);
  EXPECT_NE(svg.find(io::stage_colour(1)), std::string::npos);
  EXPECT_STRNE(io::stage_colour(0), io::stage_colour(1));
}

TEST(Svg, RejectsOtherDimensionalities) {
  std::istringstream three("step,t,stage,p0.0,p0.1,p0.2\n0,0,0,1,2,3\n");
  EXPECT_THROW(io::plot_trajectory_csv(three), DimensionError);
  std::istringstream summary("step,t,stage,height,width,mean,std,min,max\n0,0,0,1,1,0,0,0,0\n");
  EXPECT_THROW(io::plot_trajectory_csv(summary), DimensionError);
  std::istringstream garbage("a,b,c\n");
  EXPECT_THROW(io::plot_trajectory_csv(garbage), IoError);
}

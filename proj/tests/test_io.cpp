#include <gtest/gtest.h>

#include <sstream>

#include "lorkam/io.hpp"

using namespace lorkam;

TEST(Io, ParseList) {
  auto v = io::parse_list("0,3.141592653589793,-2e-3");
  ASSERT_EQ(v.size(), 3u);
  EXPECT_EQ(v[1], kPi);
  EXPECT_THROW(io::parse_list("1,x"), ConfigError);
  EXPECT_THROW(io::parse_list("1,2abc"), ConfigError);
  EXPECT_THROW(io::parse_vec("1,2,3", 2, "--x"), ConfigError);
}

TEST(Io, SeventeenDigits) {
  EXPECT_EQ(io::num(0.1), "0.10000000000000001");
  EXPECT_EQ(std::stod(io::num(kPi)), kPi);
}

TEST(Io, DistanceJsonShape) {
  auto cyl = Spacetime::cylinder();
  auto j = io::to_json(cyl, connect(cyl, ChartPoint{0, 0}, ChartPoint{4, kPi}));
  EXPECT_EQ(j["relation"], "chronological");
  EXPECT_EQ(j["maximizers"].size(), 2u);
  EXPECT_NEAR(j["d"].get<double>(), std::sqrt(16 - kPi * kPi), 1e-12);
  for (const auto& m : j["maximizers"]) {
    const double th = m["endpoint"]["coords"][1].get<double>();
    EXPECT_GT(th, -kPi);
    EXPECT_LE(th, kPi);
  }
}

TEST(Io, GeodesicCsvLastRow) {
  auto mk = Spacetime::minkowski(2);
  auto g = integrate_geodesic(mk, ChartPoint{0, 0}, TangentVector{1, 0.5}, {0, 4});
  std::ostringstream os;
  io::write_geodesic_csv(os, mk, g, 0, 4, 5);
  std::istringstream is(os.str());
  std::string line, last;
  std::getline(is, line);
  EXPECT_EQ(line, "t,x0,x1,v0,v1,energy");
  while (std::getline(is, line)) last = line;
  auto vals = io::parse_list(last);
  ASSERT_EQ(vals.size(), 6u);
  EXPECT_EQ(vals[0], 4.0);
  EXPECT_NEAR(vals[1], 4.0, 1e-12);
  EXPECT_NEAR(vals[2], 2.0, 1e-12);
}

TEST(Io, CutCsvAndJson) {
  auto cyl = Spacetime::cylinder();
  auto recs = cut_locus_sample(cyl, ChartPoint{0, 0}, 3, 1e3);
  std::ostringstream os;
  io::write_cut_csv(os, recs);
  EXPECT_NE(os.str().find("at_horizon"), std::string::npos);
  auto j = io::to_json(cyl, recs.front());
  EXPECT_TRUE(j["multi_geodesic"].get<bool>());
  EXPECT_TRUE(j["error"].is_null());
}

#include <gtest/gtest.h>

#include <random>

#include "lorkam/laxoleinik.hpp"
#include "lorkam/testing/oracles.hpp"

using namespace lorkam;

TEST(LaxOleinik, ForwardIsTheAction) {
  auto cyl = Spacetime::cylinder();
  EXPECT_NEAR(forward_lo(cyl, 2.0, ChartPoint{0, 0}, ChartPoint{5, 1}),
              oracle::action(2.0, oracle::flat_distance(cyl, ChartPoint{0, 0}, ChartPoint{5, 1}).d), 1e-12);
}

TEST(LaxOleinik, MatchesBruteForceGrid) {
  auto cyl = Spacetime::cylinder();
  ChartPoint x{0, 0};
  for (auto y : {ChartPoint{5, kPi}, ChartPoint{5, 3.0}, ChartPoint{3, 1.0}}) {
    const double s = 0.05, t = 1.05;
    auto ev = backward_forward(cyl, s, t, x, y);
    const double brute = oracle::brute_lo(cyl, s, t, x, y, 0.5, 300, 300);
    // the grid maximum can only be below the true maximum
    EXPECT_GE(ev.value, brute - 1e-12);
    EXPECT_NEAR(ev.value, brute, 5e-5);
  }
}

TEST(LaxOleinik, SandwichOnRandomPoints) {
  auto cyl = Spacetime::cylinder();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(0, 1);
  for (int i = 0; i < 40; ++i) {
    ChartPoint x{U(rng), U(rng)};
    const double dt = 1 + 5 * U(rng);
    ChartPoint y{x[0] + dt, x[1] + 0.95 * std::min(dt, kPi) * (2 * U(rng) - 1)};
    const double t = 0.5 + U(rng), s = 0.1 * U(rng) + 1e-3;
    const double d = oracle::flat_distance(cyl, x, y).d;
    const double h = backward_forward(cyl, s, t, x, y).value;
    EXPECT_GE(h, oracle::action(t, d) - 1e-9);
    EXPECT_LE(h, oracle::action(t - s, d) + 1e-9);
  }
}

TEST(LaxOleinik, FMapMovesIntoNU) {
  auto cyl = Spacetime::cylinder();
  ChartPoint x{0, 0}, y{5, kPi};
  EXPECT_EQ(f_map(cyl, 0.0, x, y).coords, y.coords);
  for (double s : {0.01, 0.05}) {
    auto r = f_map_detail(cyl, s, x, y);
    EXPECT_NEAR(std::abs(wrap_angle(r.z[1])), kPi, 1e-9);
    EXPECT_GT(r.z[0], y[0]);
    EXPECT_LE(reference_distance(cyl, y, r.z), 10 * std::sqrt(s));
    EXPECT_TRUE(r.pair_in_cut);
    EXPECT_TRUE(r.nu);
  }
}

TEST(LaxOleinik, AwayFromTheCutLocusTheArgmaxMovesWithY) {
  auto cyl = Spacetime::cylinder();
  auto ev = backward_forward(cyl, 0.02, 1.02, ChartPoint{0, 0}, ChartPoint{5, 0.5});
  EXPECT_FALSE(ev.multiplicity_flag);
  EXPECT_GT(ev.argmax_z[0], 5.0);
}

TEST(LaxOleinik, FbarScaleAndCutRequirement) {
  LOOptions o;
  EXPECT_DOUBLE_EQ(fbar_scale(0.5, o), 0.0025);
  EXPECT_DOUBLE_EQ(fbar_scale(10.0, o), 0.1);
  auto cyl = Spacetime::cylinder();
  EXPECT_THROW(fbar_map(cyl, ChartPoint{0, 0}, ChartPoint{4, 1}, 0.5, 0.5), DomainError);
  auto z = fbar_map(cyl, ChartPoint{0, 0}, ChartPoint{4, kPi}, 0.0, 0.5);
  EXPECT_EQ(z.coords, (ChartPoint{4, kPi}).coords);
}

TEST(LaxOleinik, SuperdifferentialOnTheRidge) {
  auto cyl = Spacetime::cylinder();
  auto sd = superdiff_action(cyl, ChartPoint{0, 0}, ChartPoint{5, kPi});
  ASSERT_EQ(sd.size(), 2u);
  // gradient of -sqrt(d) in θ at the ridge: ±π / (2 d^{3/2})
  const double d = std::sqrt(25 - kPi * kPi);
  EXPECT_NEAR(std::abs(sd[0].second[1]), kPi / (2 * std::pow(d, 1.5)), 1e-9);
  EXPECT_NEAR(sd[0].second[1], -sd[1].second[1], 1e-12);
}

TEST(LaxOleinik, RegularityProbeSmallGrid) {
  auto cyl = Spacetime::cylinder();
  auto g = GridSpec::centred(ChartPoint{5, kPi}, 1e-2, 21);
  auto rt = regularity_probe(cyl, 0.0, 1.0, ChartPoint{0, 0}, g);
  auto rh = regularity_probe(cyl, 0.05, 1.05, ChartPoint{0, 0}, g);
  EXPECT_GT(rt.T_stats.gradient_jump, 0.4);
  EXPECT_TRUE(rh.c1_smooth);
  EXPECT_EQ(rh.failed_points, 0);
}

TEST(LaxOleinik, ArgumentChecks) {
  auto cyl = Spacetime::cylinder();
  EXPECT_THROW(backward_forward(cyl, 0.2, 1.2, ChartPoint{0, 0}, ChartPoint{5, 1}), ConfigError);  // s > s_max
  EXPECT_THROW(backward_forward(cyl, 0.05, 0.01, ChartPoint{0, 0}, ChartPoint{5, 1}), ConfigError);
  EXPECT_THROW(backward_forward(cyl, 0.05, 1.0, ChartPoint{0, 0}, ChartPoint{1, 2}), NotChronological);
}

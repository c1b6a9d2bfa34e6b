#include <gtest/gtest.h>

#include <random>

#include "lorkam/distance.hpp"
#include "lorkam/testing/oracles.hpp"

using namespace lorkam;

TEST(Distance, MinkowskiExamples) {
  EXPECT_NEAR(lorentz_distance(Spacetime::minkowski(2), ChartPoint{0, 0}, ChartPoint{5, 3}), 4.0, 1e-12);
  EXPECT_NEAR(lorentz_distance(Spacetime::minkowski(3), ChartPoint{0, 0, 0}, ChartPoint{5, 3, 0}), 4.0, 1e-12);
  EXPECT_THROW(connect(Spacetime::minkowski(2), ChartPoint{0, 0}, ChartPoint{3, 4}), NotCausallyRelated);
}

TEST(Distance, CylinderAntipodalPairHasTwoMaximizers) {
  auto cyl = Spacetime::cylinder();
  auto ms = connect(cyl, ChartPoint{0, 0}, ChartPoint{4, kPi});
  EXPECT_EQ(ms.relation, Relation::Chronological);
  EXPECT_NEAR(ms.d, std::sqrt(16 - kPi * kPi), 1e-12);
  ASSERT_EQ(ms.multiplicity(), 2u);
  EXPECT_NEAR(ms.maximizers[0].v[1], -ms.maximizers[1].v[1], 1e-12);
  for (const auto& m : ms.maximizers) EXPECT_LT(m.residual, 1e-9);
}

TEST(Distance, CylinderNullPair) {
  auto ms = connect(Spacetime::cylinder(), ChartPoint{0, 0}, ChartPoint{kPi, kPi});
  EXPECT_EQ(ms.relation, Relation::CausalNull);
  EXPECT_EQ(ms.d, 0.0);
  EXPECT_EQ(ms.multiplicity(), 2u);
}

TEST(Distance, CylinderUnrelated) {
  EXPECT_THROW(connect(Spacetime::cylinder(), ChartPoint{0, 0}, ChartPoint{1, 2}), NotCausallyRelated);
  EXPECT_FALSE(causally_related(Spacetime::cylinder(), ChartPoint{0, 0}, ChartPoint{1, 2}));
}

TEST(Distance, RandomCylinderAgainstWindingOracle) {
  auto cyl = Spacetime::cylinder();
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(0, 1);
  for (int i = 0; i < 200; ++i) {
    ChartPoint x{U(rng), kTwoPi * U(rng)};
    ChartPoint y{x[0] + 0.5 + 12 * U(rng), x[1] + 2 * kPi * (2 * U(rng) - 1)};
    auto ref = oracle::flat_distance(cyl, x, y);
    if (!ref.related) {
      EXPECT_THROW(connect(cyl, x, y), NotCausallyRelated);
      continue;
    }
    auto ms = connect(cyl, x, y);
    EXPECT_NEAR(ms.d, ref.d, 1e-9);
    EXPECT_EQ(static_cast<int>(ms.multiplicity()), ref.multiplicity);
    // the maximizer's winding class is one the oracle picked
    EXPECT_NE(std::find(ref.windings.begin(), ref.windings.end(), ms.maximizers[0].winding),
              ref.windings.end());
  }
}

TEST(Distance, WarpedMaximizerIsAGeodesicToY) {
  auto sp = spacetime_from_name("warped-cosh");
  ChartPoint x{0, 0}, y{2, 0.5};
  auto ms = connect(sp, x, y);
  ASSERT_EQ(ms.multiplicity(), 1u);
  auto end = exp_map(sp, x, ms.maximizers[0].v, 1.0, 1e-12);
  EXPECT_NEAR(end[0], 2.0, 1e-9);
  EXPECT_NEAR(end[1], 0.5, 1e-9);
  // length equals the Lorentzian norm of v, and beats the straight time axis bound
  EXPECT_NEAR(ms.d, lorentz_norm(sp, x, ms.maximizers[0].v), 1e-12);
  EXPECT_LT(ms.d, 2.0);
  // reversed time gives the same distance
  auto rs = sp.time_reversed();
  EXPECT_NEAR(lorentz_distance(rs, reverse_time(y), reverse_time(x)), ms.d, 1e-8);
}

TEST(Distance, WarpedCoshIsBelowFlatTimeSeparation) {
  auto sp = spacetime_from_name("warped-cosh");
  for (double th : {0.0, 0.2, 0.6}) {
    const double d = lorentz_distance(sp, ChartPoint{0, 0}, ChartPoint{2, th});
    EXPECT_LE(d, 2.0 + 1e-12);
  }
  EXPECT_NEAR(lorentz_distance(sp, ChartPoint{0, 0}, ChartPoint{2, 0}), 2.0, 1e-10);
}

TEST(Distance, ReverseTriangleInequality) {
  auto sp = spacetime_from_name("warped-2cos");
  ChartPoint x{0, 0}, y{1.5, 0.2}, z{3.5, 0.3};
  EXPECT_GE(lorentz_distance(sp, x, z) + 1e-10, lorentz_distance(sp, x, y) + lorentz_distance(sp, y, z));
}

TEST(Distance, ActionFormula) {
  auto cyl = Spacetime::cylinder();
  ChartPoint x{0, 0}, y{4, kPi};
  const double d = std::sqrt(16 - kPi * kPi);
  EXPECT_NEAR(action_c(cyl, 1.0, x, y), -std::sqrt(d), 1e-12);
  EXPECT_NEAR(action_c(cyl, 2.5, x, y), -std::sqrt(2.5 * d), 1e-12);
  EXPECT_EQ(action_c(cyl, 0.0, x, x), 0.0);
  EXPECT_EQ(action_c(cyl, 0.0, x, y), kInf);
}

TEST(Distance, PathActionOfMaximizerEqualsC) {
  auto cyl = Spacetime::cylinder();
  ChartPoint x{0, 0}, y{4, kPi};
  auto ms = connect(cyl, x, y);
  PathSample ps;
  ps.breakpoints = {{0.0, x}, {0.5, exp_map(cyl, x, ms.maximizers[0].v, 0.5)}, {1.0, ms.maximizers[0].target}};
  EXPECT_NEAR(path_action(cyl, ps, 1.0), -std::pow(16 - kPi * kPi, 0.25), 1e-10);
  // a broken path has larger action
  PathSample bent;
  bent.breakpoints = {{0.0, x}, {0.5, ChartPoint{2, 0}}, {1.0, ms.maximizers[0].target}};
  EXPECT_GT(path_action(cyl, bent, 1.0), path_action(cyl, ps, 1.0));
}

TEST(Distance, NuDetection) {
  auto cyl = Spacetime::cylinder();
  auto nu = is_nu(cyl, ChartPoint{0, 0}, ChartPoint{4, kPi});
  EXPECT_TRUE(nu.nu);
  EXPECT_TRUE(nu.fd_agrees);
  EXPECT_FALSE(is_nu(cyl, ChartPoint{0, 0}, ChartPoint{4, 1}).nu);
}

TEST(Distance, WindingBound) {
  auto cyl = Spacetime::cylinder(1);
  // antipodal maximizers use windings 0 and -1; K=1 excludes the second
  EXPECT_THROW(connect(cyl, ChartPoint{0, 0}, ChartPoint{20, kPi}), WindingBoundExceeded);
  EXPECT_NO_THROW(connect(Spacetime::cylinder(2), ChartPoint{0, 0}, ChartPoint{20, kPi}));
}

TEST(Distance, SeededConnectAgrees) {
  auto sp = spacetime_from_name("warped-2cos");
  ChartPoint x{0, 0};
  auto a = connect(sp, x, ChartPoint{3, 0.4});
  auto b = connect_seeded(sp, x, ChartPoint{3.01, 0.41}, a);
  auto c = connect(sp, x, ChartPoint{3.01, 0.41});
  EXPECT_NEAR(b.d, c.d, 1e-10);
  EXPECT_EQ(b.multiplicity(), c.multiplicity());
}

#include <gtest/gtest.h>

#include "lorkam/geodesic.hpp"
#include "lorkam/testing/oracles.hpp"

using namespace lorkam;

TEST(Geodesic, MinkowskiStraightLine) {
  auto mk = Spacetime::minkowski(2);
  auto g = integrate_geodesic(mk, ChartPoint{0, 0}, TangentVector{1, 0.5}, {0, 4});
  auto p = g.position(4);
  EXPECT_NEAR(p[0], 4, 1e-12);
  EXPECT_NEAR(p[1], 2, 1e-12);
  EXPECT_EQ(g.terminated_by, Termination::Horizon);
}

TEST(Geodesic, WarpedConservedQuantities) {
  // g(u,u) and the momentum a^2 u_θ are not used by the integrator
  auto sp = spacetime_from_name("warped-2cos");
  ChartPoint x{0.3, 0.1};
  TangentVector v{1.2, 0.25};
  auto g = integrate_geodesic(sp, x, v, {-5, 12}, 1e-11);
  const double E0 = g_dot(sp, x.t(), v.components, v.components);
  const double L0 = sp.a(x.t()) * sp.a(x.t()) * v[1];
  for (double t : {-4.0, -1.0, 2.0, 7.5, 12.0}) {
    auto p = g.position(t);
    auto u = g.velocity(t);
    EXPECT_NEAR(g_dot(sp, p.t(), u.components, u.components), E0, 1e-9 * std::abs(E0));
    EXPECT_NEAR(sp.a(p.t()) * sp.a(p.t()) * u[1], L0, 1e-9 * std::abs(L0));
  }
  EXPECT_LT(g.energy_drift, 1e-8);
}

TEST(Geodesic, CoshNullGeodesicClosedForm) {
  // dθ/dt = 1/cosh t integrates to the Gudermannian 2 atan(tanh(t/2))
  auto sp = spacetime_from_name("warped-cosh");
  auto g = integrate_geodesic(sp, ChartPoint{0, 0}, TangentVector{1, 1}, {0, 3}, 1e-12);
  for (double s : {0.5, 1.0, 2.0, 3.0}) {
    auto p = g.position(s);
    EXPECT_NEAR(p[1], 2 * std::atan(std::tanh(p[0] / 2)), 1e-9);
  }
}

TEST(Geodesic, DenseOutputMatchesRestartedIntegration) {
  auto sp = spacetime_from_name("warped-cosh");
  ChartPoint x{0, 0};
  TangentVector v{1, 0.5};
  auto g = integrate_geodesic(sp, x, v, {0, 2}, 1e-12);
  auto mid = g.position(1.0);
  auto g2 = integrate_geodesic(sp, mid, g.velocity(1.0), {0, 1}, 1e-12);
  EXPECT_LT((g2.position(1.0).coords - g.position(2.0).coords).norm(), 1e-9);
}

TEST(Geodesic, BackwardBranch) {
  auto sp = spacetime_from_name("warped-2cos");
  auto g = integrate_geodesic(sp, ChartPoint{1, 0}, TangentVector{1, 0.2}, {-2, 2}, 1e-12);
  auto gr = integrate_geodesic(sp, g.position(-2), g.velocity(-2), {0, 4}, 1e-12);
  EXPECT_LT((gr.position(4).coords - g.position(2).coords).norm(), 1e-8);
  EXPECT_THROW(g.position(2.5), DomainExceeded);
}

TEST(Geodesic, SlabBoundaryStopsIntegration) {
  auto slab = spacetime_from_name("warped-2cos-slab");
  auto g = integrate_geodesic(slab, ChartPoint{0, 0}, TangentVector{1, 0}, {0, 50});
  EXPECT_EQ(g.terminated_by, Termination::DomainBoundary);
  EXPECT_NEAR(g.t_max, 10.0, 1e-6);
  try {
    exp_map(slab, ChartPoint{0, 0}, TangentVector{1, 0}, 12.0);
    FAIL() << "expected DomainExceeded";
  } catch (const DomainExceeded& e) {
    EXPECT_NEAR(e.t_reach(), 10.0, 1e-6);
  }
}

TEST(Geodesic, ExpMapOnCylinderWindsInCover) {
  auto cyl = Spacetime::cylinder();
  auto p = exp_map(cyl, ChartPoint{0, 0}, TangentVector{1, 1}, 10.0);
  EXPECT_NEAR(p[1], 10.0, 1e-12);  // unwrapped
}

TEST(Geodesic, JacobiCoshAxisIsTanh) {
  auto sp = spacetime_from_name("warped-cosh");
  auto g = integrate_geodesic(sp, ChartPoint{0, 0}, TangentVector{1, 0}, {0, 5}, 1e-12);
  auto J = jacobi_transport(sp, g, TangentVector{0, 0}, TangentVector{0, 1});
  for (double t : {0.5, 1.5, 3.0, 5.0}) EXPECT_NEAR(J.J(t)(1, 0), std::tanh(t), 1e-9);
}

TEST(Geodesic, JacobiMatchesFiniteDifferenceOfExp) {
  auto sp = spacetime_from_name("warped-2cos");
  ChartPoint x{0.2, 0};
  TangentVector v{1.0, 0.3}, dv{0.1, -0.2};
  auto g = integrate_geodesic(sp, x, v, {0, 3}, 1e-12);
  // J(0)=0, J'(0)=dv gives d/dε exp_x(t(v + ε dv)) / t
  auto J = jacobi_transport(sp, g, TangentVector{0, 0}, dv);
  const double eps = 1e-6, t = 3.0;
  TangentVector vp(Vec(v.components + eps * dv.components)), vm(Vec(v.components - eps * dv.components));
  Vec fd = (exp_map(sp, x, vp, t, 1e-13).coords - exp_map(sp, x, vm, t, 1e-13).coords) / (2 * eps);
  EXPECT_LT((J.J(t).col(0) - fd).norm(), 1e-6);
}

TEST(Geodesic, NoConjugatePointsOnWarpedAxes) {
  for (const char* name : {"warped-2cos", "warped-cosh", "cylinder"}) {
    auto sp = spacetime_from_name(name);
    EXPECT_FALSE(first_conjugate_time(sp, ChartPoint{0, 0}, TangentVector{1, 0}, 20.0).has_value()) << name;
    auto ref = oracle::scalar_jacobi(sp.profile, 0.0, 20.0);
    EXPECT_FALSE(ref.first_zero.has_value()) << name;
  }
}

TEST(Geodesic, ConjugateScanHitsDomainEnd) {
  auto slab = spacetime_from_name("warped-2cos-slab");
  EXPECT_THROW(first_conjugate_time(slab, ChartPoint{0, 0}, TangentVector{1, 0}, 30.0), DomainExceeded);
}

TEST(Geodesic, RejectsBadArguments) {
  auto cyl = Spacetime::cylinder();
  EXPECT_THROW(integrate_geodesic(cyl, ChartPoint{0, 0}, TangentVector{1, 0}, {0, 1}, 0.0), ConfigError);
  EXPECT_THROW(integrate_geodesic(cyl, ChartPoint{0, 0}, TangentVector{1, 0, 0}, {0, 1}), DomainError);
}

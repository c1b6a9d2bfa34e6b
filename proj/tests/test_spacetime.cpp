#include <gtest/gtest.h>

#include <random>

#include "lorkam/spacetime.hpp"

using namespace lorkam;

namespace {

// Γ from finite differences of the metric, independent of the closed form.
Christoffel christoffel_fd(const Spacetime& sp, const ChartPoint& x) {
  const int n = sp.dim;
  const double h = 1e-5;
  std::vector<Mat> dg(static_cast<size_t>(n), Mat::Zero(n, n));
  ChartPoint xp = x, xm = x;
  xp[0] += h;
  xm[0] -= h;
  dg[0] = (metric_tensor(sp, xp) - metric_tensor(sp, xm)) / (2 * h);  // only t-derivatives are non-zero
  Mat ginv = metric_tensor(sp, x).inverse();
  Christoffel G(static_cast<size_t>(n), Mat::Zero(n, n));
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double s = 0;
        for (int l = 0; l < n; ++l)
          s += ginv(k, l) * (dg[i](j, l) + dg[j](i, l) - dg[l](i, j));
        G[k](i, j) = 0.5 * s;
      }
  return G;
}

}  // namespace

TEST(Spacetime, CausalClassExamples) {
  auto cyl = Spacetime::cylinder();
  ChartPoint x{0, 0};
  EXPECT_EQ(causal_class(cyl, x, TangentVector{1, 0.5}), CausalityClass::FutureTimelike);
  EXPECT_EQ(causal_class(cyl, x, TangentVector{1, 1}), CausalityClass::FutureNull);
  EXPECT_EQ(causal_class(cyl, x, TangentVector{-1, 0.2}), CausalityClass::PastTimelike);
  EXPECT_EQ(causal_class(cyl, x, TangentVector{0.5, 1}), CausalityClass::Spacelike);
  EXPECT_EQ(causal_class(cyl, x, TangentVector{0, 0}), CausalityClass::Zero);
  auto w = spacetime_from_name("warped-cosh");
  // at t=1 the light cone is dθ/dt = ±1/cosh 1
  EXPECT_EQ(causal_class(w, ChartPoint{1, 0}, TangentVector{1, 1.0 / std::cosh(1.0)}),
            CausalityClass::FutureNull);
}

TEST(Spacetime, LagrangianValues) {
  auto mk = Spacetime::minkowski(2);
  EXPECT_NEAR(lagrangian(mk, ChartPoint{0, 0}, TangentVector{5, 3}), -2.0, 1e-15);
  EXPECT_EQ(lagrangian(mk, ChartPoint{0, 0}, TangentVector{1, 2}), kInf);
  EXPECT_EQ(lagrangian(mk, ChartPoint{0, 0}, TangentVector{1, 1}), 0.0);
}

TEST(Spacetime, LegendreRoundTripAndHamiltonian) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(0, 1);
  for (const char* name : {"cylinder", "warped-cosh", "warped-2cos", "minkowski3"}) {
    auto sp = spacetime_from_name(name);
    for (int i = 0; i < 50; ++i) {
      ChartPoint x = sp.dim == 2 ? ChartPoint{2 * U(rng) - 1, U(rng)} : ChartPoint{U(rng), U(rng), U(rng)};
      const double a = sp.a(x.t());
      TangentVector v = sp.dim == 2 ? TangentVector{1 + U(rng), 0.9 * (2 * U(rng) - 1) / a}
                                    : TangentVector{2, 0.9 * U(rng), -0.9 * U(rng)};
      auto p = legendre(sp, x, v);
      EXPECT_TRUE(in_dual_cone_interior(sp, x, p));
      auto back = legendre_inverse(sp, x, p);
      EXPECT_LT((back.components - v.components).norm(), 1e-12 * v.components.norm());
      EXPECT_NEAR(hamiltonian(sp, x, p), 0.5 * std::sqrt(lorentz_norm(sp, x, v)), 1e-13);
    }
  }
}

TEST(Spacetime, LegendreRejectsNull) {
  auto cyl = Spacetime::cylinder();
  EXPECT_THROW(legendre(cyl, ChartPoint{0, 0}, TangentVector{1, 1}), NotTimelike);
  EXPECT_THROW(legendre_inverse(cyl, ChartPoint{0, 0}, Covector{1, 0}), NotTimelike);
}

TEST(Spacetime, ChristoffelMatchesMetricDerivatives) {
  for (const char* name : {"warped-cosh", "warped-2cos", "cylinder"}) {
    auto sp = spacetime_from_name(name);
    for (double t : {-1.3, 0.0, 0.7, 2.5}) {
      ChartPoint x{t, 0.4};
      auto G = christoffel(sp, x);
      auto F = christoffel_fd(sp, x);
      for (int k = 0; k < 2; ++k) EXPECT_LT((G[static_cast<size_t>(k)] - F[static_cast<size_t>(k)]).norm(), 1e-8) << name;
    }
  }
}

TEST(Spacetime, ProfileDerivatives) {
  std::vector<double> samples;
  for (int i = 0; i <= 200; ++i) samples.push_back(2 + std::cos(-5 + 0.05 * i));
  auto tab = Profile::tabulated(samples, -5, 0.05);
  for (double t : {-2.0, 0.3, 1.7}) {
    EXPECT_NEAR(tab.a(t), 2 + std::cos(t), 1e-6);
    EXPECT_NEAR(tab.da(t), -std::sin(t), 1e-4);
  }
  auto c = Profile::cosh();
  const double h = 1e-5;
  EXPECT_NEAR(c.da(0.8), (c.a(0.8 + h) - c.a(0.8 - h)) / (2 * h), 1e-8);
  EXPECT_NEAR(c.dda(0.8), (c.da(0.8 + h) - c.da(0.8 - h)) / (2 * h), 1e-8);
}

TEST(Spacetime, JsonRoundTrip) {
  for (const char* name : {"minkowski3", "cylinder", "warped-cosh", "warped-2cos-slab"}) {
    auto sp = spacetime_from_name(name);
    auto j = spacetime_to_json(sp);
    auto back = spacetime_from_json(j);
    EXPECT_EQ(spacetime_to_json(back), j) << name;
    EXPECT_EQ(back.name(), sp.name());
  }
  EXPECT_THROW(spacetime_from_json(nlohmann::json{{"kind", "torus"}}), ConfigError);
  EXPECT_THROW(spacetime_from_json(nlohmann::json{{"kind", "warped"}}), ConfigError);
  EXPECT_THROW(spacetime_from_name("nope"), ConfigError);
}

TEST(Spacetime, DomainChecks) {
  auto slab = spacetime_from_name("warped-2cos-slab");
  EXPECT_THROW(check_point(slab, ChartPoint{10.5, 0}), DomainError);
  EXPECT_NO_THROW(check_point(slab, ChartPoint{9.5, 0}));
  EXPECT_THROW(check_point(Spacetime::cylinder(), ChartPoint{0, 0, 0}), DomainError);
}

TEST(Spacetime, TimeReversalReflectsProfile) {
  auto w = Spacetime::warped(Profile::cosh(), -1, 3);
  auto r = w.time_reversed();
  EXPECT_DOUBLE_EQ(r.t_lo, -3);
  EXPECT_DOUBLE_EQ(r.t_hi, 1);
  for (double t : {-0.5, 0.2, 2.0}) {
    EXPECT_DOUBLE_EQ(r.a(-t), w.a(t));
    EXPECT_DOUBLE_EQ(r.da(-t), -w.da(t));
  }
}

TEST(Spacetime, ReferenceDistanceWrapsAngles) {
  auto cyl = Spacetime::cylinder();
  EXPECT_NEAR(reference_distance(cyl, ChartPoint{0, 3.0}, ChartPoint{0, -3.0}), kTwoPi - 6.0, 1e-14);
}

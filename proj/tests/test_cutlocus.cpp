#include <gtest/gtest.h>

#include "lorkam/cutlocus.hpp"
#include "lorkam/testing/oracles.hpp"

using namespace lorkam;

TEST(CutLocus, CylinderCutTimeLaw) {
  auto cyl = Spacetime::cylinder();
  for (double w : {0.1, 0.25, 0.5, 0.8, 0.97}) {
    TangentVector v{1, w};
    auto a = cut_time(cyl, ChartPoint{0.3, -1.0}, v, 1e3);
    ASSERT_TRUE(a.finite());
    EXPECT_NEAR(a.value, *oracle::cylinder_cut_parameter(v), 1e-8) << w;
  }
  // scaling v scales α inversely
  auto a2 = cut_time(cyl, ChartPoint{0, 0}, TangentVector{2, 1}, 1e3);
  EXPECT_NEAR(a2.value, kPi, 1e-8);
}

TEST(CutLocus, CylinderNullDirection) {
  auto a = cut_time(Spacetime::cylinder(), ChartPoint{0, 0}, TangentVector{1, -1}, 1e3);
  ASSERT_TRUE(a.finite());
  EXPECT_NEAR(a.value, kPi, 1e-6);
}

TEST(CutLocus, AxisAndMinkowskiReachHorizon) {
  EXPECT_EQ(cut_time(Spacetime::cylinder(), ChartPoint{0, 0}, TangentVector{1, 0}, 1e3).kind,
            CutTime::Kind::AtHorizon);
  EXPECT_EQ(cut_time(Spacetime::minkowski(2), ChartPoint{0, 0}, TangentVector{1, 0.6}, 1e3).kind,
            CutTime::Kind::AtHorizon);
}

TEST(CutLocus, SlabAxisHitsDomainBoundary) {
  auto slab = spacetime_from_name("warped-2cos-slab");
  EXPECT_EQ(cut_time(slab, ChartPoint{0, 0}, TangentVector{1, 0}, 1e3).kind,
            CutTime::Kind::AtDomainBoundary);
}

TEST(CutLocus, RejectsNonCausalDirection) {
  EXPECT_THROW(cut_time(Spacetime::cylinder(), ChartPoint{0, 0}, TangentVector{0.5, 1}, 1e3), DomainError);
  EXPECT_THROW(cut_time(Spacetime::cylinder(), ChartPoint{0, 0}, TangentVector{-1, 0}, 1e3), DomainError);
}

TEST(CutLocus, CylinderRecordsAreMultiGeodesic) {
  auto recs = cut_locus_sample(Spacetime::cylinder(), ChartPoint{0, 0}, 9, 1e3);
  ASSERT_EQ(recs.size(), 9u);
  for (const auto& r : recs) {
    ASSERT_TRUE(r.error.empty()) << r.error;
    if (r.direction == 0.0) {
      EXPECT_EQ(r.alpha.kind, CutTime::Kind::AtHorizon);
      continue;
    }
    ASSERT_TRUE(r.alpha.finite());
    EXPECT_TRUE(r.multi_geodesic);
    EXPECT_FALSE(r.conjugate);
    EXPECT_NEAR(std::abs(wrap_angle((*r.cut_point)[1])), kPi, 1e-6);
  }
}

TEST(CutLocus, WarpedCutPointsAreClassified) {
  auto sp = spacetime_from_name("warped-2cos");
  for (double w : {0.3, -0.6}) {
    auto rec = cut_record(sp, ChartPoint{0, 0}, TangentVector{1, w / sp.a(0)}, 1e3);
    ASSERT_TRUE(rec.alpha.finite());
    EXPECT_TRUE(rec.classified());
    // past the cut point the geodesic is beaten by a competitor
    auto q = exp_map(sp, ChartPoint{0, 0}, rec.v, rec.alpha.value * 1.05);
    auto own = 1.05 * rec.alpha.value * lorentz_norm(sp, ChartPoint{0, 0}, rec.v);
    EXPECT_GT(lorentz_distance(sp, ChartPoint{0, 0}, q), own + 1e-6);
  }
}

TEST(CutLocus, CutPointsLieOutsideAubry) {
  auto cyl = Spacetime::cylinder();
  auto rec = cut_record(cyl, ChartPoint{0, 0}, TangentVector{1, 0.5}, 1e3);
  auto v = in_future_aubry(cyl, ChartPoint{0, 0}, *rec.cut_point, 1e3);
  EXPECT_EQ(v.kind, AubryVerdict::Kind::NotInAubry);
}

TEST(CutLocus, AubryVerdicts) {
  auto cyl = Spacetime::cylinder();
  EXPECT_EQ(in_future_aubry(cyl, ChartPoint{0, 0}, ChartPoint{3, 0}, 1e3).kind,
            AubryVerdict::Kind::InAubryUpToHorizon);
  auto off = in_future_aubry(cyl, ChartPoint{0, 0}, ChartPoint{3, 1}, 1e3);
  ASSERT_EQ(off.kind, AubryVerdict::Kind::NotInAubry);
  ASSERT_TRUE(off.witness.has_value());
  EXPECT_GT(off.witness->margin(), 0.0);
  EXPECT_NEAR(oracle::flat_distance(cyl, off.witness->from, off.witness->to).d,
              off.witness->competitor_length, 1e-8);
  EXPECT_EQ(in_future_aubry(Spacetime::minkowski(3), ChartPoint{0, 0, 0}, ChartPoint{3, 1, 1}, 1e3).kind,
            AubryVerdict::Kind::InAubryUpToHorizon);
  auto slab = in_future_aubry(spacetime_from_name("warped-2cos-slab"), ChartPoint{0, 0}, ChartPoint{2, 0}, 1e3);
  EXPECT_EQ(slab.kind, AubryVerdict::Kind::DomainIncomplete);
  // affine reach of the maximizer v = (2, 0): coordinate time 10
  EXPECT_NEAR(slab.t_reach, 5.0, 1e-6);
}

TEST(CutLocus, PairAubryNeedsBothEnds) {
  auto cyl = Spacetime::cylinder();
  EXPECT_EQ(in_pair_aubry(cyl, ChartPoint{0, 0}, ChartPoint{3, 0}, 1e3).kind,
            AubryVerdict::Kind::InAubryUpToHorizon);
  EXPECT_EQ(in_pair_aubry(cyl, ChartPoint{0, 0}, ChartPoint{3, 1}, 1e3).kind,
            AubryVerdict::Kind::NotInAubry);
}

TEST(CutLocus, InCutMembership) {
  auto cyl = Spacetime::cylinder();
  auto c = in_cut(cyl, ChartPoint{0, 0}, ChartPoint{4, kPi}, 1e3);
  EXPECT_TRUE(c.in_cut);
  EXPECT_TRUE(c.multi);
  EXPECT_FALSE(in_cut(cyl, ChartPoint{0, 0}, ChartPoint{4, 1}, 1e3).in_cut);
}

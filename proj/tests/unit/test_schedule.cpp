#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "ratelab/errors.hpp"
#include "ratelab/schedule.hpp"

using namespace ratelab;

namespace {

VolumeGrowthModel plane() { return VolumeGrowthModel::from_manifold(ModelManifold::euclidean(2)); }

}  // namespace

TEST(Schedule, DyadicRadiiAndReferenceIncrement) {
  const auto s = build_schedule(plane(), 3, 12);
  EXPECT_EQ(s.R_at(3), 8.0);
  EXPECT_EQ(s.r_at(3), 4.0);
  EXPECT_NEAR(s.t_at(3), 0.0793195905970630, 1e-14);
  for (int n = 3; n <= 12; ++n) {
    EXPECT_EQ(s.R_at(n), std::ldexp(1.0, n));
    EXPECT_EQ(s.r_at(n), std::ldexp(1.0, n - 1));
    if (n > 3) EXPECT_EQ(s.T_at(n) - s.T_at(n - 1), s.t_at(n));
  }
  EXPECT_THROW(s.index(2), IndexError);
  EXPECT_THROW(s.index(13), IndexError);
}

TEST(Schedule, Clamps) {
  // ln|B| = ln 1 = 0 is clamped to 1, and h(8) = max(ln ln 8, 1) = 1.
  const auto s = build_schedule(VolumeGrowthModel::finite_volume(1.0), 3, 4);
  EXPECT_DOUBLE_EQ(s.t_at(3), 16.0 / (32.0 * 2.0));
  EXPECT_EQ(schedule_h(8.0), 1.0);
  EXPECT_NEAR(schedule_h(1e6), std::log(std::log(1e6)), 1e-15);
}

TEST(Schedule, Preconditions) {
  EXPECT_THROW(build_schedule(plane(), 2, 5), DomainError);
  EXPECT_THROW(build_schedule(plane(), 6, 5), DomainError);
  EXPECT_THROW(build_schedule(plane(), 3, 1001), DomainError);
}

TEST(Schedule, Deterministic) {
  const auto a = build_schedule(plane(), 3, 25);
  const auto b = build_schedule(plane(), 3, 25);
  EXPECT_EQ(a.t, b.t);
  EXPECT_EQ(a.T, b.T);
}

TEST(TailBound, ReferenceValue) {
  const auto s = build_schedule(plane(), 3, 8);
  EXPECT_NEAR(log_tail_bound(s, 3, 1.0), -25.6676575270174, 1e-10);
  // The same chain written out by hand.
  const double L = std::log(64.0 * std::numbers::pi) + 1.0;
  const double manual = std::log(64.0 * std::numbers::pi) - std::log(4.0 * std::numbers::pi) -
                        0.5 * std::log(std::numbers::pi * s.t_at(3)) + std::log(s.T_at(3) / 4.0) - 4.0 * L;
  EXPECT_NEAR(log_tail_bound(s, 3, 1.0), manual, 1e-12);
  EXPECT_NEAR(log_tail_bound(s, 3, 10.0) - log_tail_bound(s, 3, 1.0), std::log(10.0), 1e-12);
  EXPECT_EQ(tail_bound(s, 3, 1.0), std::exp(log_tail_bound(s, 3, 1.0)));
}

TEST(TailBound, Errors) {
  const auto s = build_schedule(plane(), 3, 8);
  EXPECT_THROW(log_tail_bound(s, 9, 1.0), IndexError);
  EXPECT_THROW(log_tail_bound(s, 2, 1.0), IndexError);
  EXPECT_THROW(log_tail_bound(s, 4, 0.0), DomainError);
}

TEST(TailBound, DecaysGeometricallyForPowerVolumes) {
  for (double D : {1.0, 2.0, 5.0}) {
    const auto s = build_schedule(VolumeGrowthModel::power(1.0, D), 3, 40);
    for (int n = 6; n < 40; ++n) {
      EXPECT_LE(log_tail_bound(s, n + 1, 1.0) - log_tail_bound(s, n, 1.0), std::log(0.5)) << "D " << D << " n " << n;
    }
  }
}

TEST(AccumulatedTime, PlaneHoldsAndRatio) {
  const auto s = build_schedule(plane(), 3, 20);
  for (int n = 3; n <= 20; ++n) {
    const auto b = accumulated_time_lower_bound(plane(), s, n);
    EXPECT_TRUE(b.holds) << n;
    EXPECT_EQ(b.accumulated, s.T_at(n));
  }
  for (double D : {2.0, 4.0}) {
    const auto m = VolumeGrowthModel::power(1.0, D);
    const auto sp = build_schedule(m, 3, 40);
    for (int n = 25; n <= 40; ++n) {
      const auto b = accumulated_time_lower_bound(m, sp, n);
      EXPECT_GE(b.accumulated / b.bound, 1.0);
      EXPECT_LE(b.accumulated / b.bound, 4.0);
    }
  }
}

TEST(ScaleIncrements, RescalesPrefixSums) {
  const auto s = build_schedule(plane(), 3, 10);
  const auto z = scale_time_increments(s, 0.0);
  for (double t : z.T) EXPECT_EQ(t, 0.0);
  const auto d = scale_time_increments(s, 2.0);
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_NEAR(d.T[i], 2.0 * s.T[i], 1e-15 * d.T[i]);
  EXPECT_THROW(scale_time_increments(s, -1.0), DomainError);
}

TEST(HSeries, PartialSumsAreCauchy) {
  const auto sums = h_series_partial_sums(2000);
  ASSERT_EQ(sums.size(), 2000u);
  for (std::size_t i = 1; i < sums.size(); ++i) {
    EXPECT_GT(sums[i], sums[i - 1]);
    EXPECT_TRUE(std::isfinite(sums[i]));
  }
  // Tail of Σ 1/(n ln 2)^2 beyond 1000 is about 1/(1000 ln^2 2).
  EXPECT_LT(sums[1999] - sums[999], 1.0 / (1000.0 * std::log(2.0) * std::log(2.0)));
  EXPECT_LT(sums[1999] - sums[1499], sums[999] - sums[499]);
}

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "ratelab/errors.hpp"
#include "ratelab/schedule.hpp"
#include "ratelab/statistics.hpp"
#include "ratelab/verify.hpp"

using namespace ratelab;

namespace {

const ModelManifold kPlane = ModelManifold::euclidean(2);

PathEnsemble plane_ensemble(std::size_t paths, double horizon, const CrossingSchedule* s = nullptr) {
  SimConfig c;
  c.dt = 1e-2;
  c.step_policy = StepPolicy::ScaleInvariant;
  c.horizon = horizon;
  c.r0 = 1.0;
  c.paths = paths;
  c.seed = 31;
  if (s != nullptr) c.passage_levels = schedule_levels(*s);
  return run_ensemble(kPlane, c);
}

}  // namespace

TEST(Statistics, Wilson) {
  const auto half = wilson_interval(50, 100);
  EXPECT_EQ(half.estimate, 0.5);
  EXPECT_NEAR(half.lower + half.upper, 1.0, 1e-15);
  EXPECT_NEAR(half.upper - half.lower, 0.19, 0.01);
  const auto none = wilson_interval(0, 1000);
  EXPECT_EQ(none.lower, 0.0);
  EXPECT_NEAR(none.upper, 0.00382675848556, 1e-12);
  EXPECT_EQ(wilson_interval(7, 7).upper, 1.0);
  EXPECT_THROW(wilson_interval(3, 2), DomainError);
}

TEST(Statistics, Normal) {
  EXPECT_NEAR(normal_survival(1.0), 0.158655253931457, 1e-15);
  EXPECT_NEAR(normal_cdf(0.0), 0.5, 1e-16);
  EXPECT_GT(normal_survival(30.0), 0.0);
}

TEST(Statistics, KsAndDkw) {
  std::vector<double> grid;
  for (int i = 0; i < 1000; ++i) grid.push_back((i + 0.5) / 1000.0);
  EXPECT_NEAR(ks_statistic_sorted(grid, [](double x) { return x; }), 0.0005, 1e-12);
  EXPECT_NEAR(dkw_halfwidth(10000), std::sqrt(std::log(2.0 / 0.05) / 20000.0), 1e-15);
}

TEST(Statistics, ConfidenceIntervalsShrinkAsRootN) {
  double previous = 0.0;
  for (std::uint64_t n : {1000u, 10000u, 100000u}) {
    const auto p = wilson_interval(n * 3173 / 10000, n);
    const double width = p.upper - p.lower;
    if (previous > 0.0) {
      const double ratio = previous / width;
      EXPECT_GT(ratio, std::sqrt(10.0) / 1.5);
      EXPECT_LT(ratio, std::sqrt(10.0) * 1.5);
    }
    previous = width;
  }
}

TEST(CrossingTail, ZeroDeadlineGivesZero) {
  const auto s = build_schedule(VolumeGrowthModel::from_manifold(kPlane), 3, 5);
  const auto ens = plane_ensemble(300, 500.0, &s);
  const auto est = empirical_crossing_tail(ens, scale_time_increments(s, 0.0));
  for (const auto& row : est.rows) EXPECT_EQ(row.p.estimate, 0.0);
  EXPECT_EQ(est.fitted_constant, 0.0);
  EXPECT_TRUE(est.bound_holds);
}

TEST(CrossingTail, LongDeadlinesAreNonzeroAndFitted) {
  const auto s = build_schedule(VolumeGrowthModel::from_manifold(kPlane), 3, 5);
  const auto ens = plane_ensemble(2000, 2000.0, &s);
  const auto est = empirical_crossing_tail(ens, scale_time_increments(s, 30.0));
  ASSERT_GT(est.rows[0].p.estimate, 0.0);
  const auto stretched = scale_time_increments(s, 30.0);
  for (const auto& row : est.rows) {
    EXPECT_TRUE(row.eligible);
    EXPECT_NEAR(row.contributing_fraction, static_cast<double>(row.contributors) / 2000.0, 1e-15);
    if (row.p.estimate > 0.0) EXPECT_LE(row.p.estimate, tail_bound(stretched, row.n, est.fitted_constant) * (1 + 1e-12));
  }
}

TEST(CrossingTail, InsufficientData) {
  const auto s = build_schedule(VolumeGrowthModel::from_manifold(kPlane), 3, 5);
  const auto ens = plane_ensemble(10, 500.0, &s);
  EXPECT_THROW(empirical_crossing_tail(ens, s), InsufficientDataError);
}

TEST(RateViolation, MonotoneInConstantAndStart) {
  const auto ens = plane_ensemble(500, 300.0);
  const RateFunction rate(VolumeGrowthModel::from_manifold(kPlane));
  double prev = 1.0;
  for (double C : {1e-3, 0.01, 0.1, 1.0, 10.0, 512.0}) {
    const double v = rate_violation_fraction(ens, rate, C, 1.0).estimate;
    EXPECT_LE(v, prev) << C;
    prev = v;
  }
  EXPECT_EQ(rate_violation_fraction(ens, rate, 1e-3, 1.0).estimate, 1.0);
  prev = 1.0;
  for (double t_min : {1.0, 10.0, 100.0, 300.0}) {
    const double v = rate_violation_fraction(ens, rate, 0.1, t_min).estimate;
    EXPECT_LE(v, prev);
    prev = v;
  }
  EXPECT_THROW(rate_violation_fraction(ens, rate, 1.0, 1e4), PreconditionError);
  EXPECT_THROW(rate_violation_fraction(ens, rate, 0.0, 1.0), DomainError);
}

TEST(StationaryKs, PermutationInvariantAndThresholds) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> s;
  for (int i = 0; i < 20000; ++i) s.push_back(std::sqrt(u(rng)));  // density 2r on [0, 1]
  const auto a = stationary_ks_test(s, kPlane, 1.0);
  std::shuffle(s.begin(), s.end(), rng);
  const auto b = stationary_ks_test(s, kPlane, 1.0);
  EXPECT_EQ(a.statistic, b.statistic);
  EXPECT_TRUE(a.passed);
  EXPECT_LE(a.ci_lower, a.statistic);
  for (double& x : s) x = u(rng);  // uniform is the wrong law
  EXPECT_FALSE(stationary_ks_test(s, kPlane, 1.0).passed);
  s.resize(100);
  EXPECT_THROW(stationary_ks_test(s, kPlane, 1.0), InsufficientDataError);
}

TEST(Report, RenderingIsSortedAndDeterministic) {
  VerificationReport r;
  r.add(make_check("zeta", 0.5, 1.0, "<=", 0.4, 0.6, 10));
  r.add(make_check("alpha", 0.1234567890123456, 0.2, ">=", 0.0, 1.0, 20));
  r.references["rate.const"] = "512";
  const auto csv = render_report(r, ReportFormat::Csv);
  EXPECT_EQ(csv,
            "name,statistic,threshold,comparison,passed,ci_lower,ci_upper,sample_size\n"
            "alpha,0.123456789012,0.2,>=,false,0,1,20\n"
            "zeta,0.5,1,<=,true,0.4,0.6,10\n");
  const auto txt = render_report(r, ReportFormat::StructuredText);
  EXPECT_EQ(txt, render_report(r, ReportFormat::StructuredText));
  EXPECT_NE(txt.find("ref.rate.const = 512\n"), std::string::npos);
  EXPECT_NE(txt.find("summary.all_passed = false\n"), std::string::npos);
  EXPECT_LT(txt.find("check.alpha"), txt.find("check.zeta"));
  EXPECT_FALSE(r.all_passed());
  for (const auto& c : r.checks) EXPECT_EQ(c.recompute(), c.passed);
}

TEST(Report, Errors) {
  EXPECT_THROW(render_report(VerificationReport{}, ReportFormat::Csv), PreconditionError);
  VerificationReport r;
  r.add(make_check("a", 0.0, 1.0, "<=", 0.0, 0.0, 1));
  EXPECT_THROW(emit_report(r, ReportFormat::Csv, "/nonexistent-dir/report.csv"), IOError);
  EXPECT_THROW(make_check("a", 0.0, 1.0, "<", 0.0, 0.0, 1), DomainError);
}

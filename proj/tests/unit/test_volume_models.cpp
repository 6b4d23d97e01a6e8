#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <thread>

#include "ratelab/errors.hpp"
#include "ratelab/model_spec.hpp"
#include "ratelab/volume_models.hpp"

using namespace ratelab;

TEST(VolumeModels, ClosedFormValues) {
  EXPECT_NEAR(VolumeGrowthModel::power(1.0, 3.0).log_ball_volume(10.0), 3.0 * std::log(10.0), 1e-14);
  EXPECT_NEAR(VolumeGrowthModel::exp_quad(1.0).log_ball_volume(100.0), 1e4, 1e-10);
  EXPECT_NEAR(VolumeGrowthModel::exp_power(2.0, 0.5).log_ball_volume(16.0), 8.0, 1e-14);
  EXPECT_NEAR(VolumeGrowthModel::exp_quad_log(1.0).log_ball_volume(std::numbers::e), std::exp(2.0), 1e-12);
  EXPECT_NEAR(VolumeGrowthModel::finite_volume(5.0).log_ball_volume(1e9), std::log(5.0), 1e-15);
}

TEST(VolumeModels, FromManifoldReferenceValues) {
  const auto plane = VolumeGrowthModel::from_manifold(ModelManifold::euclidean(2));
  EXPECT_NEAR(plane.log_ball_volume(2.0), 2.53102424696929, 1e-12);
  const auto hyp = VolumeGrowthModel::from_manifold(ModelManifold::hyperbolic(2, 1.0));
  EXPECT_NEAR(hyp.log_ball_volume(1.0), 1.22737959507524, 1e-12);
  // 2π(cosh r - 1) far outside double range.
  EXPECT_NEAR(hyp.log_ball_volume(1000.0), std::log(std::numbers::pi) + 1000.0, 1e-9);
  const auto ball3 = VolumeGrowthModel::from_manifold(ModelManifold::euclidean(3));
  EXPECT_NEAR(ball3.log_ball_volume(2.0), std::log(4.0 / 3.0 * std::numbers::pi * 8.0), 1e-12);
  const auto line = VolumeGrowthModel::from_manifold(ModelManifold::flat(1));
  EXPECT_NEAR(line.log_ball_volume(3.0), std::log(6.0), 1e-14);
}

TEST(VolumeModels, PlaneAgreesWithPowerLaw) {
  const auto plane = VolumeGrowthModel::from_manifold(ModelManifold::euclidean(2));
  const auto power = VolumeGrowthModel::power(std::numbers::pi, 2.0);
  for (double r = 0.1; r <= 1000.0; r *= 1.37) {
    const double a = plane.log_ball_volume(r);
    const double b = power.log_ball_volume(r);
    EXPECT_LT(std::abs(std::exp(a - b) - 1.0), 1e-10) << "r = " << r;
  }
}

TEST(VolumeModels, MonotoneInRadiusForEveryFamily) {
  std::vector<VolumeGrowthModel> models = {
      VolumeGrowthModel::power(2.0, 3.0),
      VolumeGrowthModel::exp_power(1.0, 1.2),
      VolumeGrowthModel::exp_quad(0.5),
      VolumeGrowthModel::exp_quad_log(1.0),
      VolumeGrowthModel::finite_volume(2.0),
      VolumeGrowthModel::tabulated({1.0, 2.0, 5.0, 10.0}, {0.0, 1.0, 1.0, 4.0}),
      VolumeGrowthModel::from_manifold(ModelManifold::hyperbolic(3, 0.5)),
      VolumeGrowthModel::from_manifold(ModelManifold::cusp(2, 1.0)),
  };
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const auto& m : models) {
    for (int i = 0; i < 300; ++i) {
      double r1 = std::max(m.domain_min(), 1.0) * std::exp(8.0 * u(rng));
      double r2 = std::max(m.domain_min(), 1.0) * std::exp(8.0 * u(rng));
      if (r1 > r2) std::swap(r1, r2);
      ASSERT_LE(m.log_ball_volume(r1), m.log_ball_volume(r2)) << m.describe() << " " << r1 << " " << r2;
    }
  }
}

TEST(VolumeModels, DomainErrors) {
  EXPECT_THROW(VolumeGrowthModel::power(-1.0, 2.0), DomainError);
  EXPECT_THROW(VolumeGrowthModel::exp_power(1.0, 2.0), DomainError);
  EXPECT_THROW(VolumeGrowthModel::finite_volume(0.0), DomainError);
  EXPECT_THROW(VolumeGrowthModel::exp_quad_log(1.0).log_ball_volume(0.5), DomainError);
  EXPECT_THROW(VolumeGrowthModel::power(1.0, 2.0).log_ball_volume(0.0), DomainError);
}

TEST(VolumeModels, TabulatedGridValidation) {
  EXPECT_THROW(VolumeGrowthModel::tabulated({1.0, 1.0, 2.0}, {0.0, 1.0, 2.0}), MonotonicityError);
  EXPECT_THROW(VolumeGrowthModel::tabulated({1.0, 2.0, 3.0}, {0.0, 2.0, 1.0}), MonotonicityError);
  const auto t = VolumeGrowthModel::tabulated({1.0, 2.0, 4.0}, {0.0, 2.0 * std::log(2.0), 2.0 * std::log(4.0)});
  EXPECT_FALSE(t.extrapolated(3.0));
  EXPECT_TRUE(t.extrapolated(8.0));
  // Linear in ln r beyond the last knot continues the r^2 law.
  EXPECT_NEAR(t.log_ball_volume(8.0), 2.0 * std::log(8.0), 1e-9);
  EXPECT_THROW(t.log_ball_volume(0.5), DomainError);
}

TEST(VolumeModels, ParametersAndDescribe) {
  const auto m = VolumeGrowthModel::power(2.0, 5.0);
  EXPECT_EQ(m.parameter("D"), 5.0);
  EXPECT_EQ(m.family(), GrowthFamily::Power);
  EXPECT_THROW(m.parameter("alpha"), DomainError);
  const auto again = parse_model_spec(m.describe());
  EXPECT_EQ(again.describe(), m.describe());
}

TEST(VolumeModels, ConcurrentTableReadsAgree) {
  const auto hyp = VolumeGrowthModel::from_manifold(ModelManifold::hyperbolic(2, 1.0));
  std::vector<double> radii;
  for (double r = 0.5; r < 5000.0; r *= 1.5) radii.push_back(r);
  std::vector<std::vector<double>> seen(4);
  {
    std::vector<std::jthread> pool;
    for (int w = 0; w < 4; ++w) {
      pool.emplace_back([&, w] {
        for (double r : radii) seen[w].push_back(hyp.log_ball_volume(r));
      });
    }
  }
  for (int w = 1; w < 4; ++w) EXPECT_EQ(seen[w], seen[0]);
}

TEST(Manifold, RadialDrift) {
  EXPECT_DOUBLE_EQ(radial_drift(ModelManifold::euclidean(3), 2.0), 0.5);
  for (int n = 1; n <= 6; ++n) {
    for (double r : {0.01, 0.7, 3.0, 1e4}) {
      EXPECT_DOUBLE_EQ(radial_drift(ModelManifold::euclidean(n), r), (n - 1) / (2.0 * r));
    }
  }
  EXPECT_NEAR(radial_drift(ModelManifold::hyperbolic(2, 1.0), 5.0), 0.500045401991010, 1e-14);
  EXPECT_DOUBLE_EQ(radial_drift(ModelManifold::hyperbolic(2, 1.0), 800.0), 0.5);
  EXPECT_EQ(radial_drift(ModelManifold::flat(3), 2.0), 0.0);
  EXPECT_THROW(radial_drift(ModelManifold::euclidean(2), 0.0), DomainError);
  EXPECT_THROW(radial_drift(ModelManifold::euclidean(2), -1.0), DomainError);
}

TEST(Manifold, PoleRegularDriftNearPole) {
  for (const auto& m : {ModelManifold::hyperbolic(3, 2.0), ModelManifold::cusp(3, 1.0)}) {
    ASSERT_TRUE(m.pole_regular());
    const double r = 1e-6;
    EXPECT_NEAR(radial_drift(m, r) * r, 1.0, 1e-5) << m.describe();
  }
  EXPECT_FALSE(ModelManifold::flat(2).pole_regular());
}

TEST(Manifold, CuspCapIsSmooth) {
  const auto m = ModelManifold::cusp(2, 1.5, 2.0);
  const double h = 1e-7;
  EXPECT_NEAR(m.log_warp(2.0 - h), m.log_warp(2.0 + h), 1e-6);
  EXPECT_NEAR(m.warp_log_derivative(2.0 - h), m.warp_log_derivative(2.0 + h), 1e-5);
  EXPECT_DOUBLE_EQ(m.log_warp(5.0), -1.5 * 5.0);
}

TEST(Manifold, UnitSphereArea) {
  EXPECT_NEAR(ModelManifold::euclidean(2).log_unit_sphere_area(), std::log(2.0 * std::numbers::pi), 1e-15);
  EXPECT_NEAR(ModelManifold::euclidean(3).log_unit_sphere_area(), std::log(4.0 * std::numbers::pi), 1e-14);
  EXPECT_NEAR(ModelManifold::euclidean(1).log_unit_sphere_area(), std::log(2.0), 1e-15);
}

TEST(ModelSpec, ParsesFamilies) {
  EXPECT_EQ(parse_model_spec("power:C=1,D=2").family(), GrowthFamily::Power);
  EXPECT_EQ(parse_model_spec("exppower:C=1,alpha=0.5").parameter("alpha"), 0.5);
  EXPECT_EQ(parse_model_spec("expquad").parameter("C"), 1.0);
  EXPECT_EQ(parse_model_spec("finite:V=3").parameter("V"), 3.0);
  const auto hyp = parse_model_spec("manifold:hyperbolic,n=3,kappa=1");
  EXPECT_EQ(hyp.family(), GrowthFamily::FromManifold);
  EXPECT_EQ(hyp.manifold()->dimension(), 3);
  EXPECT_EQ(parse_manifold_spec("euclidean,n=2").describe(), "manifold:euclidean,n=2");
  EXPECT_EQ(parse_manifold_spec("manifold:hyperbolic,n=3,kappa=1").describe(), "manifold:hyperbolic,n=3,kappa=1");
}

TEST(ModelSpec, RejectsMalformedSpecs) {
  EXPECT_THROW(parse_model_spec("banana:C=1"), ParseError);
  EXPECT_THROW(parse_model_spec("power:C"), ParseError);
  EXPECT_THROW(parse_model_spec("power:E=3"), ParseError);
  EXPECT_THROW(parse_model_spec("power:C=x"), ParseError);
  EXPECT_THROW(parse_model_spec("exppower:alpha=3"), DomainError);
  EXPECT_THROW(parse_manifold_spec("hyperbolic,n=0"), DomainError);
}

TEST(ModelSpec, TabulatedFile) {
  const auto path = std::filesystem::temp_directory_path() / "ratelab_tab_test.txt";
  {
    std::ofstream out(path);
    out << "# r ln_volume\n1 0\n2 1.3862943611198906\n\n4 2.772588722239781\n";
  }
  const auto m = parse_model_spec("tabulated:path=" + path.string());
  EXPECT_EQ(m.family(), GrowthFamily::Tabulated);
  EXPECT_NEAR(m.log_ball_volume(2.0), 1.3862943611198906, 1e-15);
  {
    std::ofstream out(path);
    out << "1 0\n2 oops\n";
  }
  try {
    parse_model_spec("tabulated:path=" + path.string());
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2);
  }
  std::filesystem::remove(path);
  EXPECT_THROW(parse_model_spec("tabulated:path=/nonexistent/ratelab"), Error);
}

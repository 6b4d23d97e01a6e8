#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ratelab/interpolation.hpp"

namespace ratelab {

// ---------------------------------------------------------------------------
// Warp functions of rotationally symmetric model manifolds, metric dr^2 + f(r)^2 dθ^2.
// Each warp exposes ln f and the logarithmic derivative f'/f so that very
// large warps (sinh at radius 10^3) never leave floating-point range.
// ---------------------------------------------------------------------------

struct EuclideanWarp {};

struct HyperbolicWarp {
  double kappa = 1.0;
};

/// f(r) = exp(-a r) for r >= r0; below r0 the profile r * exp(b1 r + b2 r^2)
/// matches value and slope at r0 and keeps the pole regular.
struct CuspWarp {
  double a = 1.0;
  double r0 = 1.0;
  double b1 = 0.0;
  double b2 = 0.0;
};

/// f = 1. Not pole-regular; for dimension 1 every warp reduces to this.
struct FlatWarp {};

struct TabulatedWarp {
  MonotoneCubic log_f;  // ln f as a function of r
  bool pole_regular = false;
};

using Warp = std::variant<EuclideanWarp, HyperbolicWarp, CuspWarp, FlatWarp, TabulatedWarp>;

class ModelManifold {
 public:
  ModelManifold(int dimension, Warp warp);

  static ModelManifold euclidean(int dimension);
  static ModelManifold hyperbolic(int dimension, double kappa);
  static ModelManifold cusp(int dimension, double a, double r0 = 1.0);
  static ModelManifold flat(int dimension);
  /// Warp values f(r_i) > 0 at strictly increasing radii r_i > 0.
  static ModelManifold tabulated(int dimension, std::vector<double> r, std::vector<double> f,
                                 bool pole_regular);

  int dimension() const { return dimension_; }
  const Warp& warp() const { return warp_; }
  bool pole_regular() const;

  double log_warp(double r) const;
  /// f'(r) / f(r).
  double warp_log_derivative(double r) const;
  /// ln of the (n-1)-volume of the unit sphere S^{n-1}.
  double log_unit_sphere_area() const;

  /// Canonical spec string, e.g. "manifold:hyperbolic,n=3,kappa=1".
  std::string describe() const;

 private:
  int dimension_;
  Warp warp_;
};

/// Drift (n-1) f'(r) / (2 f(r)) of the radial diffusion with generator ½Δ.
/// Throws DomainError for r <= 0.
double radial_drift(const ModelManifold& manifold, double r);

// ---------------------------------------------------------------------------
// Volume growth laws r -> |B(r)|, always handled as ln|B(r)|.
// ---------------------------------------------------------------------------

enum class GrowthFamily { Power, ExpPower, ExpQuad, ExpQuadLog, FiniteVolume, Tabulated, FromManifold };

std::string to_string(GrowthFamily family);

class CumulativeVolumeTable;

class VolumeGrowthModel {
 public:
  /// |B(r)| = C r^D.
  static VolumeGrowthModel power(double C, double D);
  /// |B(r)| = exp(C r^alpha), 0 < alpha < 2.
  static VolumeGrowthModel exp_power(double C, double alpha);
  /// |B(r)| = exp(C r^2).
  static VolumeGrowthModel exp_quad(double C);
  /// |B(r)| = exp(C r^2 ln r), defined for r >= 1.
  static VolumeGrowthModel exp_quad_log(double C);
  /// |B(r)| = V_total for every radius.
  static VolumeGrowthModel finite_volume(double V_total);
  /// Knots (r_i, ln|B(r_i)|): r strictly increasing and positive, values nondecreasing.
  static VolumeGrowthModel tabulated(std::vector<double> r, std::vector<double> log_volume);
  /// Exact ball volumes omega_{n-1} ∫_0^r f^{n-1} of a model manifold.
  static VolumeGrowthModel from_manifold(ModelManifold manifold);

  GrowthFamily family() const;
  double domain_min() const { return domain_min_; }

  /// ln|B(r)|. Throws DomainError for r below domain_min().
  double log_ball_volume(double r) const;

  /// True when r lies past the last knot of a tabulated law (linear
  /// extrapolation in ln r was used).
  bool extrapolated(double r) const;

  /// Family parameters by name ("C", "D", "alpha", "V").
  double parameter(const std::string& name) const;
  const ModelManifold* manifold() const;

  /// Builds cached volume tables out to r_max so that later concurrent reads
  /// never trigger a rebuild. No-op for closed-form families.
  void prepare(double r_max) const;

  /// Canonical spec string ("power:C=1,D=2", ...). Tabulated laws built from a
  /// file keep the path they were loaded from.
  std::string describe() const;
  void set_source(std::string source) { source_ = std::move(source); }

 private:
  struct Power { double C, D; };
  struct ExpPower { double C, alpha; };
  struct ExpQuad { double C; };
  struct ExpQuadLog { double C; };
  struct Finite { double V; };
  struct Table {
    MonotoneCubic log_volume_vs_log_r;
    double tail_slope;  // d ln|B| / d ln r past the last knot
  };
  struct Manifold {
    std::shared_ptr<CumulativeVolumeTable> table;
  };
  using Law = std::variant<Power, ExpPower, ExpQuad, ExpQuadLog, Finite, Table, Manifold>;

  VolumeGrowthModel(Law law, double domain_min) : law_(std::move(law)), domain_min_(domain_min) {}

  Law law_;
  double domain_min_;
  std::string source_;
};

inline double log_ball_volume(const VolumeGrowthModel& model, double r) {
  return model.log_ball_volume(r);
}

/// Cumulative table of ln ∫_0^{r_k} f(s)^{n-1} ds on a geometric radius grid.
///
/// Queries between knots integrate the remaining piece from the nearest knot
/// below, so values do not depend on how far the table has been extended.
/// Reads take a shared lock; growing the grid takes an exclusive one.
class CumulativeVolumeTable {
 public:
  explicit CumulativeVolumeTable(ModelManifold manifold);
  ~CumulativeVolumeTable();

  const ModelManifold& manifold() const { return manifold_; }
  /// ln of the n-volume of the ball of radius r > 0.
  double log_volume(double r) const;
  void extend_to(double r) const;
  double cached_radius() const;

 private:
  struct State;
  double log_partial(double a, double b) const;

  ModelManifold manifold_;
  std::unique_ptr<State> state_;
};

}  // namespace ratelab

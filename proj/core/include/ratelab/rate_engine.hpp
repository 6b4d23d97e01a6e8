#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ratelab/volume_models.hpp"

namespace ratelab {

inline constexpr double kDefaultLowerLimit = 6.0;
/// Outer/inner constant of the rate C ψ(C t) guaranteed by the crossing argument.
inline constexpr double kDefaultRateConstant = 512.0;

/// r / (max(ln|B(r)|, 0) + ln ln r), the density whose integral defines φ.
double phi_integrand(const VolumeGrowthModel& model, double r);

/// φ(R) = ∫_lower^R r dr / (max(ln|B(r)|, 0) + ln ln r), by adaptive
/// Gauss-Kronrod quadrature at relative tolerance 1e-9.
///
/// Throws DomainError if lower <= e or R < lower, QuadratureError if the
/// tolerance is not met within the subdivision budget.
double phi(const VolumeGrowthModel& model, double R, double lower = kDefaultLowerLimit);

struct RateOptions {
  double lower = kDefaultLowerLimit;
  double rel_tol = 1e-9;
  double abs_tol = 1e-14;
  /// Relative tolerance on R when inverting φ.
  double inversion_tol = 1e-10;
  /// Knots are placed at lower * 2^{k/4}; the table starts out to this radius.
  double initial_radius = 1e3;
  /// ψ gives up (RangeError) once the bracket would pass this radius.
  double max_radius = 1e100;
};

/// Tabulated φ with its inverse ψ.
///
/// φ is stored at geometrically spaced knots as a cumulative sum of positive
/// panel integrals, so the tabulated values are strictly increasing. Values
/// between knots add a single adaptive integral from the knot below. The
/// knot table grows on demand under an exclusive lock; evaluation otherwise
/// only reads and may run concurrently.
class RateFunction {
 public:
  explicit RateFunction(VolumeGrowthModel model, RateOptions options = {});
  ~RateFunction();
  RateFunction(RateFunction&&) noexcept;
  RateFunction& operator=(RateFunction&&) noexcept;

  double phi(double R) const;
  /// The unique R >= lower with φ(R) = t. ψ(0) = lower.
  double psi(double t) const;
  /// C ψ(C t).
  double scaled_rate(double t, double C) const { return C * psi(C * t); }

  const VolumeGrowthModel& model() const { return model_; }
  const RateOptions& options() const { return options_; }
  double lower_limit() const { return options_.lower; }
  double tolerance() const { return options_.rel_tol; }

  /// Snapshot of the (radius, φ) knot table.
  std::vector<std::pair<double, double>> knots() const;
  void extend_to_radius(double R) const;

 private:
  struct Table;
  double segment_integral(double a, double b) const;
  /// Extends until the last knot's φ reaches t; returns false if max_radius is hit first.
  bool extend_to_time(double t) const;

  VolumeGrowthModel model_;
  RateOptions options_;
  std::unique_ptr<Table> table_;
};

// ---------------------------------------------------------------------------
// Closed-form rates for the classical volume growth regimes.

enum class RateCase {
  Power,        // |B| <= C r^D:              sqrt(t ln t)
  ExpPower,     // |B| <= exp(C r^alpha):     t^{1/(2-alpha)}
  ExpQuad,      // |B| <= exp(C r^2):         exp(t^2 ln t)
  ExpQuadLog,   // |B| <= exp(C r^2 ln r):    exp(exp(t))
  VolumeBound,  // |B| <= v(r):               R(t) with R^2 / ln v(R) = t
  FiniteVolume  // finite total volume:       sqrt(t ln ln t)
};

struct ClosedFormParams {
  /// Outer multiplier; every case's output scales linearly in it.
  double multiplier = 1.0;
  double alpha = 1.0;
  /// The bounding law v for RateCase::VolumeBound.
  std::optional<VolumeGrowthModel> volume_bound;
  /// Smallest radius searched for RateCase::VolumeBound.
  double search_from = kDefaultLowerLimit;
};

double closed_form_rate(RateCase which, const ClosedFormParams& params, double t);

// ---------------------------------------------------------------------------
// Divergence diagnostics for stochastic completeness.

enum class Completeness { DivergentComplete, Inconclusive };

std::string to_string(Completeness c);

struct CompletenessReport {
  Completeness verdict = Completeness::Inconclusive;
  bool symbolic = false;  // verdict taken from the closed-form family table
  std::vector<double> radii;              // 10, 100, ..., <= R_max
  std::vector<double> partial_integrals;  // ∫_1^R r dr / max(ln|B|, eps)
  std::vector<double> increments;         // I(10^{k+1}) - I(10^k)
  std::string reason;
};

/// Volume-growth integral test. Divergent-Complete is a sufficient
/// condition for stochastic completeness; Inconclusive never claims the
/// opposite. Throws DomainError if R_max < 100 or the model is undefined on
/// [1, R_max].
CompletenessReport completeness_diagnostic(const VolumeGrowthModel& model, double R_max, double floor = 1e-3);

struct AugmentedDivergenceReport {
  std::vector<double> probes;
  std::vector<double> unaugmented;  // ∫_3^p r / f
  std::vector<double> augmented;    // ∫_3^p r / (f + ln ln r)
  bool unaugmented_unbounded = false;
  bool augmented_unbounded = false;
  /// ½ (n0 - 1) / (n0 + 1) with n0 = floor(first probe).
  double proof_factor = 0.0;
  /// Every augmented increment is at least ½ ∫ r / max(f, ln ln r) over its interval,
  /// and at least proof_factor times the unaugmented increment where f >= ln ln r.
  bool increment_bounds_hold = true;
  /// Unbounded unaugmented growth implies unbounded augmented growth over the probes.
  bool assertion_holds = true;
  std::string note;
};

/// Partial integrals with and without the ln ln r term, f = max(ln|B|, floor).
/// Probes must be increasing with the first >= 3.
AugmentedDivergenceReport augmented_divergence_check(const VolumeGrowthModel& model,
                                                     std::span<const double> probes, double floor = 1e-3);

/// Growth heuristic on finite data: successive increments never shrink
/// (up to a relative slack).
bool increments_nondecreasing(std::span<const double> increments, double rel_slack = 1e-9);

}  // namespace ratelab

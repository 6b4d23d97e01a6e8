#include "ratelab/rate_engine.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <mutex>
#include <numbers>
#include <shared_mutex>

#include "ratelab/errors.hpp"
#include "ratelab/quadrature.hpp"

namespace ratelab {

namespace {

constexpr int kKnotsPerOctave = 4;
constexpr std::array<double, kKnotsPerOctave> kOctaveFractions = {
    1.0, 1.189207115002721066717, 1.414213562373095048802, 1.681792830507429086062};

double rate_knot(double lower, std::size_t k) {
  return lower * std::ldexp(kOctaveFractions[k % kKnotsPerOctave], static_cast<int>(k / kKnotsPerOctave));
}

void check_lower(const VolumeGrowthModel& model, double lower) {
  if (!(lower > std::numbers::e)) {
    throw DomainError(fmt::format("lower limit must exceed e so that ln ln r > 0, got lower = {}", lower));
  }
  if (model.domain_min() > lower) {
    throw DomainError(fmt::format("model {} is undefined below r = {}, above the lower limit {}", model.describe(),
                                  model.domain_min(), lower));
  }
}

}  // namespace

double phi_integrand(const VolumeGrowthModel& model, double r) {
  const double log_volume = std::max(model.log_ball_volume(r), 0.0);
  return r / (log_volume + std::log(std::log(r)));
}

double phi(const VolumeGrowthModel& model, double R, double lower) {
  check_lower(model, lower);
  if (!(R >= lower)) throw DomainError(fmt::format("phi needs R >= lower = {}, got R = {}", lower, R));
  QuadratureOptions opts;
  opts.rel_tol = 1e-9;
  opts.abs_tol = 1e-14;
  return integrate([&](double r) { return phi_integrand(model, r); }, lower, R, opts).value;
}

// ---------------------------------------------------------------------------

struct RateFunction::Table {
  mutable std::shared_mutex mutex;
  std::vector<double> radii;
  std::vector<double> values;
};

RateFunction::RateFunction(VolumeGrowthModel model, RateOptions options)
    : model_(std::move(model)), options_(options), table_(std::make_unique<Table>()) {
  check_lower(model_, options_.lower);
  table_->radii.push_back(options_.lower);
  table_->values.push_back(0.0);
  extend_to_radius(options_.initial_radius);
}

RateFunction::~RateFunction() = default;
RateFunction::RateFunction(RateFunction&&) noexcept = default;
RateFunction& RateFunction::operator=(RateFunction&&) noexcept = default;

double RateFunction::segment_integral(double a, double b) const {
  QuadratureOptions opts;
  opts.rel_tol = options_.rel_tol;
  opts.abs_tol = options_.abs_tol;
  return integrate([&](double r) { return phi_integrand(model_, r); }, a, b, opts).value;
}

void RateFunction::extend_to_radius(double R) const {
  std::unique_lock lock(table_->mutex);
  auto& radii = table_->radii;
  auto& values = table_->values;
  while (radii.back() < R) {
    const double next = rate_knot(options_.lower, radii.size());
    values.push_back(values.back() + segment_integral(radii.back(), next));
    radii.push_back(next);
  }
}

bool RateFunction::extend_to_time(double t) const {
  std::unique_lock lock(table_->mutex);
  auto& radii = table_->radii;
  auto& values = table_->values;
  while (values.back() < t) {
    if (radii.back() >= options_.max_radius) return false;
    const double next = rate_knot(options_.lower, radii.size());
    values.push_back(values.back() + segment_integral(radii.back(), next));
    radii.push_back(next);
  }
  return true;
}

std::vector<std::pair<double, double>> RateFunction::knots() const {
  std::shared_lock lock(table_->mutex);
  std::vector<std::pair<double, double>> out;
  out.reserve(table_->radii.size());
  for (std::size_t i = 0; i < table_->radii.size(); ++i) out.emplace_back(table_->radii[i], table_->values[i]);
  return out;
}

double RateFunction::phi(double R) const {
  if (!(R >= options_.lower)) {
    throw DomainError(fmt::format("phi needs R >= lower = {}, got R = {}", options_.lower, R));
  }
  double knot = 0.0;
  double base = 0.0;
  for (;;) {
    {
      std::shared_lock lock(table_->mutex);
      const auto& radii = table_->radii;
      if (radii.back() >= R) {
        const auto k = static_cast<std::size_t>(std::upper_bound(radii.begin(), radii.end(), R) - radii.begin()) - 1;
        knot = radii[k];
        base = table_->values[k];
        break;
      }
    }
    extend_to_radius(R);
  }
  return R > knot ? base + segment_integral(knot, R) : base;
}

double RateFunction::psi(double t) const {
  if (!(t >= 0.0)) throw DomainError(fmt::format("psi needs t >= 0, got t = {}", t));
  if (t == 0.0) return options_.lower;
  double lo = 0.0;
  double hi = 0.0;
  double phi_lo = 0.0;
  double phi_hi = 0.0;
  for (;;) {
    {
      std::shared_lock lock(table_->mutex);
      const auto& values = table_->values;
      if (values.back() >= t) {
        const auto k = static_cast<std::size_t>(std::lower_bound(values.begin(), values.end(), t) - values.begin());
        if (values[k] == t) return table_->radii[k];
        lo = table_->radii[k - 1];
        hi = table_->radii[k];
        phi_lo = values[k - 1];
        phi_hi = values[k];
        break;
      }
    }
    if (!extend_to_time(t)) {
      throw RangeError(fmt::format("t = {} exceeds phi over the explored range [{}, {}] for {}", t, options_.lower,
                                   options_.max_radius, model_.describe()));
    }
  }
  // Newton on φ(R) - t with φ' = integrand, falling back to bisection whenever
  // a step leaves the bracket.
  const double base_radius = lo;
  const double base_value = phi_lo;
  double x = lo + (hi - lo) * (t - phi_lo) / (phi_hi - phi_lo);
  for (int iter = 0; iter < 200; ++iter) {
    const double fx = base_value + (x > base_radius ? segment_integral(base_radius, x) : 0.0) - t;
    if (fx == 0.0) return x;
    if (fx < 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    double next = x - fx / phi_integrand(model_, x);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= options_.inversion_tol * x || (hi - lo) <= options_.inversion_tol * x) return next;
    x = next;
  }
  return x;
}

// ---------------------------------------------------------------------------

double closed_form_rate(RateCase which, const ClosedFormParams& params, double t) {
  const double m = params.multiplier;
  auto need_log_positive = [&](double threshold, const char* what) {
    if (!(t > threshold)) throw DomainError(fmt::format("{} needs t > {}, got t = {}", what, threshold, t));
  };
  double value = 0.0;
  switch (which) {
    case RateCase::Power:
      need_log_positive(1.0, "sqrt(t ln t)");
      value = std::sqrt(t * std::log(t));
      break;
    case RateCase::ExpPower:
      if (!(params.alpha > 0.0 && params.alpha < 2.0)) {
        throw DomainError(fmt::format("t^(1/(2-alpha)) needs 0 < alpha < 2, got alpha = {}", params.alpha));
      }
      if (!(t >= 0.0)) throw DomainError(fmt::format("t^(1/(2-alpha)) needs t >= 0, got t = {}", t));
      value = std::pow(t, 1.0 / (2.0 - params.alpha));
      break;
    case RateCase::ExpQuad:
      need_log_positive(1.0, "exp(t^2 ln t)");
      value = std::exp(t * t * std::log(t));
      break;
    case RateCase::ExpQuadLog:
      value = std::exp(std::exp(t));
      break;
    case RateCase::FiniteVolume:
      need_log_positive(std::numbers::e, "sqrt(t ln ln t)");
      value = std::sqrt(t * std::log(std::log(t)));
      break;
    case RateCase::VolumeBound: {
      if (!params.volume_bound) throw DomainError("the volume-bound rate needs a bounding volume law v");
      const auto& v = *params.volume_bound;
      auto ratio = [&](double R) {
        const double log_v = v.log_ball_volume(R);
        if (!(log_v > 0.0)) {
          throw DomainError(fmt::format("ln v(R) must be positive on the search range, got {} at R = {}", log_v, R));
        }
        return R * R / log_v;
      };
      double lo = params.search_from;
      if (!(t >= ratio(lo))) {
        throw DomainError(fmt::format("t = {} is below R^2/ln v(R) = {} at the search start R = {}", t, ratio(lo), lo));
      }
      double hi = lo;
      while (ratio(hi) < t) {
        lo = hi;
        hi *= 2.0;
        if (!std::isfinite(hi) || hi > 1e150) throw RangeError(fmt::format("no root of R^2/ln v(R) = {} found", t));
      }
      for (int iter = 0; iter < 400 && hi - lo > 1e-14 * hi; ++iter) {
        const double mid = 0.5 * (lo + hi);
        (ratio(mid) < t ? lo : hi) = mid;
      }
      value = 0.5 * (lo + hi);
      break;
    }
  }
  if (!std::isfinite(value)) throw RangeError(fmt::format("closed-form rate overflows at t = {}", t));
  return m * value;
}

// ---------------------------------------------------------------------------

std::string to_string(Completeness c) {
  return c == Completeness::DivergentComplete ? "Divergent-Complete" : "Inconclusive";
}

bool increments_nondecreasing(std::span<const double> increments, double rel_slack) {
  for (std::size_t i = 1; i < increments.size(); ++i) {
    if (increments[i] < increments[i - 1] * (1.0 - rel_slack)) return false;
  }
  return !increments.empty() && increments.front() > 0.0;
}

namespace {

double floored_integral(const VolumeGrowthModel& model, double a, double b, double floor, bool with_loglog) {
  QuadratureOptions opts;
  opts.rel_tol = 1e-9;
  opts.abs_tol = 1e-12;
  opts.max_subdivisions = 20000;
  auto f = [&](double r) {
    const double base = std::max(model.log_ball_volume(r), floor);
    return r / (with_loglog ? base + std::log(std::log(r)) : base);
  };
  return integrate(f, a, b, opts).value;
}

}  // namespace

CompletenessReport completeness_diagnostic(const VolumeGrowthModel& model, double R_max, double floor) {
  if (!(R_max >= 100.0)) throw DomainError(fmt::format("completeness diagnostic needs R_max >= 100, got {}", R_max));
  if (model.domain_min() > 1.0) {
    throw DomainError(fmt::format("model {} is undefined on [1, {}]", model.describe(), R_max));
  }
  CompletenessReport report;
  double running = 0.0;
  double previous = 1.0;
  for (double R = 10.0; R <= R_max * (1.0 + 1e-12); R *= 10.0) {
    const double piece = floored_integral(model, previous, R, floor, false);
    running += piece;
    report.radii.push_back(R);
    report.partial_integrals.push_back(running);
    previous = R;
  }
  for (std::size_t i = 1; i < report.partial_integrals.size(); ++i) {
    report.increments.push_back(report.partial_integrals[i] - report.partial_integrals[i - 1]);
  }

  switch (model.family()) {
    case GrowthFamily::Power:
    case GrowthFamily::ExpPower:
    case GrowthFamily::ExpQuad:
    case GrowthFamily::ExpQuadLog:
    case GrowthFamily::FiniteVolume:
      report.symbolic = true;
      report.verdict = Completeness::DivergentComplete;
      report.reason = fmt::format("{} growth is at most exp(C r^2 ln r); the integral of r / ln|B(r)| diverges",
                                  to_string(model.family()));
      return report;
    case GrowthFamily::Tabulated:
    case GrowthFamily::FromManifold:
      break;
  }
  if (increments_nondecreasing(report.increments)) {
    report.verdict = Completeness::DivergentComplete;
    report.reason = "decade increments of the integral of r / ln|B(r)| do not shrink over the probed range";
  } else {
    report.verdict = Completeness::Inconclusive;
    report.reason = "decade increments shrink; the sufficient criterion is silent";
  }
  return report;
}

AugmentedDivergenceReport augmented_divergence_check(const VolumeGrowthModel& model, std::span<const double> probes,
                                                     double floor) {
  if (probes.empty() || !(probes.front() >= 3.0)) throw DomainError("probe radii must start at or above 3");
  for (std::size_t i = 1; i < probes.size(); ++i) {
    if (!(probes[i] > probes[i - 1])) throw DomainError("probe radii must be strictly increasing");
  }
  if (model.domain_min() > 3.0) throw DomainError(fmt::format("model {} is undefined at r = 3", model.describe()));

  AugmentedDivergenceReport report;
  report.probes.assign(probes.begin(), probes.end());
  const double n0 = std::floor(probes.front());
  report.proof_factor = 0.5 * (n0 - 1.0) / (n0 + 1.0);

  auto f = [&](double r) { return std::max(model.log_ball_volume(r), floor); };
  double plain = 0.0;
  double aug = 0.0;
  double previous = 3.0;
  std::vector<double> plain_inc;
  std::vector<double> aug_inc;
  for (double p : probes) {
    const double dp = floored_integral(model, previous, p, floor, false);
    const double da = floored_integral(model, previous, p, floor, true);
    plain += dp;
    aug += da;
    report.unaugmented.push_back(plain);
    report.augmented.push_back(aug);
    if (previous < p && previous != 3.0) {
      plain_inc.push_back(dp);
      aug_inc.push_back(da);
      QuadratureOptions opts;
      opts.rel_tol = 1e-9;
      opts.max_subdivisions = 20000;
      const double half_bound =
          0.5 * integrate([&](double r) { return r / std::max(f(r), std::log(std::log(r))); }, previous, p, opts).value;
      const double slack = 1e-8 * std::max(1.0, da);
      if (da + slack < half_bound) report.increment_bounds_hold = false;
      const bool dominated = f(previous) >= std::log(std::log(previous)) && f(p) >= std::log(std::log(p));
      if (dominated && da + slack < report.proof_factor * dp) report.increment_bounds_hold = false;
    }
    previous = p;
  }
  report.unaugmented_unbounded = increments_nondecreasing(plain_inc);
  report.augmented_unbounded = increments_nondecreasing(aug_inc);
  report.assertion_holds = !report.unaugmented_unbounded || report.augmented_unbounded;
  if (!report.unaugmented_unbounded) {
    report.note = "unaugmented bounded: increments shrink over the probes, no assertion made";
  } else if (report.assertion_holds) {
    report.note = "unaugmented and augmented partial integrals both grow without shrinking increments";
  } else {
    report.note = "augmented increments shrink although the unaugmented ones do not";
  }
  return report;
}

}  // namespace ratelab

#include "ratelab/schedule.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ratelab/errors.hpp"
#include "ratelab/quadrature.hpp"

namespace ratelab {

std::size_t CrossingSchedule::index(int n) const {
  if (!contains(n)) throw IndexError(fmt::format("schedule index {} outside [{}, {}]", n, n_min, n_max));
  return static_cast<std::size_t>(n - n_min);
}

double schedule_h(double R) { return std::max(std::log(std::log(R)), 1.0); }

CrossingSchedule build_schedule(const VolumeGrowthModel& model, int n_min, int n_max) {
  if (n_min < 3) throw DomainError(fmt::format("schedule needs 2^n_min >= 6, got n_min = {}", n_min));
  if (n_max < n_min || n_max > 1000) {
    throw DomainError(fmt::format("schedule needs n_min <= n_max <= 1000, got [{}, {}]", n_min, n_max));
  }
  CrossingSchedule s;
  s.n_min = n_min;
  s.n_max = n_max;
  double accumulated = 0.0;
  for (int n = n_min; n <= n_max; ++n) {
    const double R = std::ldexp(1.0, n);
    const double r = std::ldexp(1.0, n - 1);
    if (R < model.domain_min()) {
      throw DomainError(fmt::format("model {} is undefined at R_{} = {}", model.describe(), n, R));
    }
    const double log_volume = model.log_ball_volume(R);
    const double h = schedule_h(R);
    const double t = r * r / (32.0 * (std::max(log_volume, 1.0) + h));
    accumulated += t;
    s.R.push_back(R);
    s.r.push_back(r);
    s.log_volume.push_back(log_volume);
    s.h.push_back(h);
    s.t.push_back(t);
    s.T.push_back(accumulated);
  }
  s.reference_radius = model.domain_min() <= 2.0 ? 2.0 : s.R.front();
  s.reference_log_volume = model.log_ball_volume(s.reference_radius);
  return s;
}

CrossingSchedule scale_time_increments(const CrossingSchedule& s, double factor) {
  if (!(factor >= 0.0)) throw DomainError(fmt::format("time scale factor must be >= 0, got {}", factor));
  CrossingSchedule out = s;
  double accumulated = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out.t[i] *= factor;
    accumulated += out.t[i];
    out.T[i] = accumulated;
  }
  return out;
}

double log_tail_bound(const CrossingSchedule& s, int n, double C) {
  if (n < 2) throw IndexError(fmt::format("tail bound needs n >= 2, got {}", n));
  if (!(C > 0.0)) throw DomainError(fmt::format("tail bound constant must be positive, got C = {}", C));
  const std::size_t i = s.index(n);
  const double t = s.t[i];
  const double r = s.r[i];
  return (s.log_volume[i] - s.reference_log_volume) + std::log(C) - 0.5 * std::log(std::numbers::pi * t) +
         std::log(s.T[i] / r) - r * r / (8.0 * t);
}

double tail_bound(const CrossingSchedule& s, int n, double C) { return std::exp(log_tail_bound(s, n, C)); }

AccumulatedTimeBound accumulated_time_lower_bound(const VolumeGrowthModel& model, const CrossingSchedule& s, int n) {
  const std::size_t i = s.index(n);
  const double lo = s.R.front();
  const double hi = std::ldexp(1.0, n + 1);
  QuadratureOptions opts;
  opts.rel_tol = 1e-10;
  auto integrand = [&](double r) { return r / (std::max(model.log_ball_volume(r), 1.0) + schedule_h(r)); };
  AccumulatedTimeBound out;
  out.bound = integrate(integrand, lo, hi, opts).value / 256.0;
  out.accumulated = s.T[i];
  out.holds = out.accumulated >= out.bound;
  return out;
}

std::vector<double> h_series_partial_sums(int n_max) {
  std::vector<double> sums;
  double acc = 0.0;
  for (int n = 1; n <= n_max; ++n) {
    // ln ln 2^n without forming 2^n
    acc += std::exp(-2.0 * std::max(std::log(n * std::numbers::ln2), 1.0));
    sums.push_back(acc);
  }
  return sums;
}

}  // namespace ratelab

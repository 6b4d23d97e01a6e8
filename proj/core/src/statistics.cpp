#include "ratelab/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ratelab/errors.hpp"

namespace ratelab {

Proportion wilson_interval(std::uint64_t successes, std::uint64_t trials, double z) {
  if (successes > trials) throw DomainError("successes exceed trials");
  Proportion p;
  p.successes = successes;
  p.trials = trials;
  if (trials == 0) return p;
  const double n = static_cast<double>(trials);
  const double phat = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (phat + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n)) / denom;
  p.estimate = phat;
  p.lower = successes == 0 ? 0.0 : std::max(0.0, center - half);
  p.upper = successes == trials ? 1.0 : std::min(1.0, center + half);
  return p;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_survival(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double ks_statistic_sorted(std::span<const double> sorted, const std::function<double(double)>& cdf) {
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(sorted[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double dkw_halfwidth(std::size_t n, double alpha) {
  return std::sqrt(std::log(2.0 / alpha) / (2.0 * static_cast<double>(n)));
}

}  // namespace ratelab

#pragma once

#include <cstdint>
#include <functional>
#include <span>

namespace ratelab {

/// Binomial proportion with its Wilson score interval.
struct Proportion {
  std::uint64_t successes = 0;
  std::uint64_t trials = 0;
  double estimate = 0.0;
  double lower = 0.0;
  double upper = 1.0;
};

inline constexpr double kZ95 = 1.959963984540054;

Proportion wilson_interval(std::uint64_t successes, std::uint64_t trials, double z = kZ95);

double normal_cdf(double x);
/// 1 - Φ(x), accurate in the upper tail.
double normal_survival(double x);

/// sup |F_n - F| for samples sorted ascending.
double ks_statistic_sorted(std::span<const double> sorted, const std::function<double(double)>& cdf);

/// Dvoretzky-Kiefer-Wolfowitz band half-width at level 1 - alpha.
double dkw_halfwidth(std::size_t n, double alpha = 0.05);

}  // namespace ratelab

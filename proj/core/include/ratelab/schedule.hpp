#pragma once

#include <vector>

#include "ratelab/volume_models.hpp"

namespace ratelab {

/// Borel-Cantelli crossing schedule on the dyadic radii R_n = 2^n.
///
/// Arrays are indexed by position i = n - n_min. Time increments are
/// t_n = r_n^2 / (32 (max(ln|B(R_n)|, 1) + h(R_n))) with h(R) = max(ln ln R, 1),
/// and T_n is their prefix sum starting at n_min.
struct CrossingSchedule {
  int n_min = 0;
  int n_max = 0;
  std::vector<double> R;           // 2^n
  std::vector<double> r;           // R_n - R_{n-1} = 2^{n-1}
  std::vector<double> log_volume;  // ln|B(R_n)|, unclamped
  std::vector<double> h;           // max(ln ln R_n, 1)
  std::vector<double> t;           // time increments
  std::vector<double> T;           // accumulated time
  /// Radius of the reference ball B_1 in the tail bound: 2 when the model is
  /// defined there, otherwise R_{n_min}.
  double reference_radius = 2.0;
  double reference_log_volume = 0.0;

  std::size_t size() const { return R.size(); }
  bool contains(int n) const { return n >= n_min && n <= n_max; }
  std::size_t index(int n) const;  // throws IndexError outside [n_min, n_max]
  double R_at(int n) const { return R[index(n)]; }
  double r_at(int n) const { return r[index(n)]; }
  double t_at(int n) const { return t[index(n)]; }
  double T_at(int n) const { return T[index(n)]; }
};

/// h(R) = max(ln ln R, 1).
double schedule_h(double R);

/// Requires 2^n_min >= 6 and n_min <= n_max <= 1000. Throws DomainError when
/// the model is undefined at some R_n.
CrossingSchedule build_schedule(const VolumeGrowthModel& model, int n_min, int n_max);

/// Copy of the schedule with every t_n multiplied by factor (T_n rescaled to
/// match). Used for deadline sweeps in tail estimates.
CrossingSchedule scale_time_increments(const CrossingSchedule& s, double factor);

/// ln of (|B_n| / |B_1|) (C / sqrt(π t_n)) (T_n / r_n) exp(-r_n^2 / (8 t_n)).
/// Throws IndexError outside [max(2, n_min), n_max] and DomainError for C <= 0.
double log_tail_bound(const CrossingSchedule& s, int n, double C);

/// exp(log_tail_bound); may underflow to 0.
double tail_bound(const CrossingSchedule& s, int n, double C);

struct AccumulatedTimeBound {
  double bound = 0.0;  // (1/256) ∫_{R_{n_min}}^{R_{n+1}} r dr / (max(ln|B|, 1) + max(ln ln r, 1))
  double accumulated = 0.0;  // T_n
  bool holds = false;        // T_n >= bound
};

/// The integral lower bound on accumulated schedule time. The denominator
/// uses the same clamps as the schedule so the Riemann-sum comparison holds
/// for every model.
AccumulatedTimeBound accumulated_time_lower_bound(const VolumeGrowthModel& model, const CrossingSchedule& s, int n);

/// Partial sums of e^{-2 h(2^n)} for n = 1..n_max.
std::vector<double> h_series_partial_sums(int n_max);

}  // namespace ratelab

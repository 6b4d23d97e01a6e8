#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "ratelab/rate_engine.hpp"
#include "ratelab/schedule.hpp"
#include "ratelab/sde_sim.hpp"
#include "ratelab/statistics.hpp"

namespace ratelab {

/// Calibration bar for the fitted tail constant.
inline constexpr double kMaxTailConstant = 100.0;
inline constexpr std::uint64_t kMinTailContributors = 30;
inline constexpr std::size_t kMinStationarySamples = 10000;
inline constexpr double kStationaryKsThreshold = 0.02;

struct CrossingTailRow {
  int n = 0;
  /// Paths with finite τ_n inside the horizon.
  std::uint64_t contributors = 0;
  double contributing_fraction = 0.0;
  Proportion p;  // P{τ_n - τ_{n-1} <= t_n}
  double log_bound_unit_constant = 0.0;  // log_tail_bound(s, n, 1)
  bool eligible = false;  // contributors >= kMinTailContributors
};

struct CrossingTailEstimate {
  std::vector<CrossingTailRow> rows;
  /// Least C with p_n <= tail_bound(n, C) for every eligible n (0 when all p_n = 0).
  double fitted_constant = 0.0;
  bool bound_holds = false;  // fitted_constant <= kMaxTailConstant
};

/// Per-index tail probabilities, conditioned on τ_n being finite. Throws
/// InsufficientDataError when no index has 30 or more contributors.
CrossingTailEstimate empirical_crossing_tail(const PathEnsemble& ens, const CrossingSchedule& s);

/// Paths whose running supremum exceeds C ψ(C t) at some checkpoint t >= t_min.
/// Throws PreconditionError when no checkpoint reaches t_min and RangeError
/// when ψ is undefined at C times the largest checkpoint.
Proportion rate_violation_fraction(const PathEnsemble& ens, const RateFunction& rate, double C, double t_min);

struct KsResult {
  double statistic = 0.0;
  double threshold = kStationaryKsThreshold;
  bool passed = false;
  std::size_t samples = 0;
  double ci_lower = 0.0;
  double ci_upper = 0.0;
};

/// KS distance between the sample radii and the normalized volume density
/// f^{n-1} on [0, R]. Throws InsufficientDataError below 10^4 samples.
KsResult stationary_ks_test(std::span<const double> samples, const ModelManifold& manifold, double R,
                            double threshold = kStationaryKsThreshold);

// ---------------------------------------------------------------------------

struct CheckRecord {
  std::string name;
  double statistic = 0.0;
  double threshold = 0.0;
  /// "<=" when passing means statistic <= threshold, ">=" otherwise.
  std::string comparison = "<=";
  bool passed = false;
  double ci_lower = 0.0;
  double ci_upper = 0.0;
  std::uint64_t sample_size = 0;

  /// Pass/fail recomputed from the stored statistic.
  bool recompute() const;
};

struct VerificationReport {
  std::vector<CheckRecord> checks;
  std::map<std::string, std::string> references;

  void add(CheckRecord record);
  bool all_passed() const;
};

CheckRecord make_check(std::string name, double statistic, double threshold, std::string comparison,
                       double ci_lower, double ci_upper, std::uint64_t sample_size);

enum class ReportFormat { Csv, StructuredText };

/// Deterministic rendering: checks sorted by name, references by key, numbers
/// with 12 significant digits. Throws PreconditionError for an empty report.
std::string render_report(const VerificationReport& report, ReportFormat format);

/// Writes render_report to path. Throws IOError on failure.
void emit_report(const VerificationReport& report, ReportFormat format, const std::string& path);

}  // namespace ratelab

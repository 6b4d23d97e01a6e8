#include "ratelab/verify.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>

#include "ratelab/errors.hpp"

namespace ratelab {

namespace {

std::string num(double v) { return fmt::format("{:.12g}", v); }

}  // namespace

CrossingTailEstimate empirical_crossing_tail(const PathEnsemble& ens, const CrossingSchedule& s) {
  const std::size_t m = s.size();
  std::vector<std::uint64_t> contributors(m, 0);
  std::vector<std::uint64_t> hits(m, 0);
  for (const auto& path : ens.paths) {
    for (const auto& c : crossing_times(path, s)) {
      if (!(c.tau > 0.0)) continue;  // level already inside the starting ball
      const std::size_t i = s.index(c.n);
      ++contributors[i];
      if (c.duration <= s.t[i]) ++hits[i];
    }
  }

  CrossingTailEstimate out;
  bool any_eligible = false;
  double log_fit = -std::numeric_limits<double>::infinity();
  const double total = static_cast<double>(ens.paths.size());
  for (int n = s.n_min; n <= s.n_max; ++n) {
    const std::size_t i = s.index(n);
    CrossingTailRow row;
    row.n = n;
    row.contributors = contributors[i];
    row.contributing_fraction = total > 0 ? static_cast<double>(contributors[i]) / total : 0.0;
    row.p = wilson_interval(hits[i], contributors[i]);
    row.log_bound_unit_constant = log_tail_bound(s, n, 1.0);
    row.eligible = contributors[i] >= kMinTailContributors;
    if (row.eligible) {
      any_eligible = true;
      if (row.p.estimate > 0.0) log_fit = std::max(log_fit, std::log(row.p.estimate) - row.log_bound_unit_constant);
    }
    out.rows.push_back(row);
  }
  if (!any_eligible) {
    throw InsufficientDataError(fmt::format("no schedule index has {} or more paths with a finite crossing time",
                                            kMinTailContributors));
  }
  out.fitted_constant = std::exp(log_fit);
  out.bound_holds = out.fitted_constant <= kMaxTailConstant;
  return out;
}

Proportion rate_violation_fraction(const PathEnsemble& ens, const RateFunction& rate, double C, double t_min) {
  if (!(C > 0.0)) throw DomainError(fmt::format("rate constant must be positive, got C = {}", C));
  std::map<double, double> envelope;
  double latest = -1.0;
  for (const auto& p : ens.paths) {
    for (double t : p.times) {
      if (t >= t_min) latest = std::max(latest, t);
    }
  }
  if (latest < 0.0) throw PreconditionError(fmt::format("no checkpoint at or beyond t_min = {}", t_min));
  // Evaluating the largest time first surfaces RangeError before any work.
  envelope[latest] = rate.scaled_rate(latest, C);

  std::uint64_t violations = 0;
  for (const auto& p : ens.paths) {
    for (std::size_t k = 0; k < p.times.size(); ++k) {
      const double t = p.times[k];
      if (t < t_min) continue;
      auto it = envelope.find(t);
      if (it == envelope.end()) it = envelope.emplace(t, rate.scaled_rate(t, C)).first;
      if (p.running_sup[k] > it->second) {
        ++violations;
        break;
      }
    }
  }
  return wilson_interval(violations, ens.paths.size());
}

KsResult stationary_ks_test(std::span<const double> samples, const ModelManifold& manifold, double R,
                            double threshold) {
  if (samples.size() < kMinStationarySamples) {
    throw InsufficientDataError(
        fmt::format("stationary KS test needs at least {} samples, got {}", kMinStationarySamples, samples.size()));
  }
  if (!(R > 0.0)) throw DomainError(fmt::format("ball radius must be positive, got {}", R));
  const auto volume = VolumeGrowthModel::from_manifold(manifold);
  const double log_total = volume.log_ball_volume(R);
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  auto cdf = [&](double r) {
    if (r <= 0.0) return 0.0;
    if (r >= R) return 1.0;
    return std::exp(volume.log_ball_volume(r) - log_total);
  };
  KsResult out;
  out.statistic = ks_statistic_sorted(sorted, cdf);
  out.threshold = threshold;
  out.passed = out.statistic < threshold;
  out.samples = sorted.size();
  const double band = dkw_halfwidth(sorted.size());
  out.ci_lower = std::max(0.0, out.statistic - band);
  out.ci_upper = out.statistic + band;
  return out;
}

// ---------------------------------------------------------------------------

bool CheckRecord::recompute() const {
  return comparison == ">=" ? statistic >= threshold : statistic <= threshold;
}

CheckRecord make_check(std::string name, double statistic, double threshold, std::string comparison,
                       double ci_lower, double ci_upper, std::uint64_t sample_size) {
  if (comparison != "<=" && comparison != ">=") throw DomainError("comparison must be '<=' or '>='");
  CheckRecord c{std::move(name), statistic, threshold, std::move(comparison), false, ci_lower, ci_upper, sample_size};
  c.passed = c.recompute();
  return c;
}

void VerificationReport::add(CheckRecord record) { checks.push_back(std::move(record)); }

bool VerificationReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckRecord& c) { return c.passed; });
}

std::string render_report(const VerificationReport& report, ReportFormat format) {
  if (report.checks.empty()) throw PreconditionError("cannot emit an empty verification report");
  std::vector<CheckRecord> sorted = report.checks;
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
  std::string out;
  if (format == ReportFormat::Csv) {
    out += "name,statistic,threshold,comparison,passed,ci_lower,ci_upper,sample_size\n";
    for (const auto& c : sorted) {
      out += fmt::format("{},{},{},{},{},{},{},{}\n", c.name, num(c.statistic), num(c.threshold), c.comparison,
                         c.passed ? "true" : "false", num(c.ci_lower), num(c.ci_upper), c.sample_size);
    }
    return out;
  }
  std::map<std::string, std::string> lines;
  for (const auto& c : sorted) {
    const std::string prefix = "check." + c.name + ".";
    lines[prefix + "ci_lower"] = num(c.ci_lower);
    lines[prefix + "ci_upper"] = num(c.ci_upper);
    lines[prefix + "comparison"] = c.comparison;
    lines[prefix + "passed"] = c.passed ? "true" : "false";
    lines[prefix + "sample_size"] = std::to_string(c.sample_size);
    lines[prefix + "statistic"] = num(c.statistic);
    lines[prefix + "threshold"] = num(c.threshold);
  }
  for (const auto& [k, v] : report.references) lines["ref." + k] = v;
  lines["summary.all_passed"] = report.all_passed() ? "true" : "false";
  lines["summary.checks"] = std::to_string(sorted.size());
  for (const auto& [k, v] : lines) out += k + " = " + v + "\n";
  return out;
}

void emit_report(const VerificationReport& report, ReportFormat format, const std::string& path) {
  const std::string text = render_report(report, format);
  std::ofstream outf(path, std::ios::binary | std::ios::trunc);
  if (!outf) throw IOError(fmt::format("cannot open '{}' for writing", path));
  outf << text;
  outf.flush();
  if (!outf) throw IOError(fmt::format("write to '{}' failed", path));
}

}  // namespace ratelab

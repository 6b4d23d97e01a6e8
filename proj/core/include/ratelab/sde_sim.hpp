#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ratelab/schedule.hpp"
#include "ratelab/volume_models.hpp"

namespace ratelab {

inline constexpr double kNeverReached = std::numeric_limits<double>::infinity();

enum class BoundaryMode { Free, Reflect };

/// How the step size follows the current radius r (dt is the base step):
///   Fixed          dt
///   PoleRefined    dt * min(1, r^2)   (finer near the pole, e.g. cusps)
///   ScaleInvariant dt * max(1, r^2)   (Brownian scaling; long escapes)
enum class StepPolicy { Fixed, PoleRefined, ScaleInvariant };

struct SimConfig {
  double dt = 1e-3;
  StepPolicy step_policy = StepPolicy::Fixed;
  double horizon = 1.0;
  double r0 = 1.0;
  BoundaryMode boundary = BoundaryMode::Free;
  double reflect_radius = std::numeric_limits<double>::infinity();
  /// Near the pole the drift increment per step is capped at this fraction of r.
  double drift_cap = 0.5;
  bool bridge_correction = true;
  /// End a path once every passage level is crossed (truncates its checkpoints).
  bool stop_after_last_level = false;
  std::uint64_t seed = 0;
  std::size_t paths = 1;
  /// Explicit checkpoint times; when empty a geometric grid is used.
  std::vector<double> checkpoints;
  double first_checkpoint = 1.0;
  int checkpoints_per_decade = 10;
  /// Radii whose first-passage times are recorded; strictly increasing.
  std::vector<double> passage_levels;

  /// Throws ConfigError for invalid or incompatible settings.
  void validate() const;
  /// Checkpoint times in (0, horizon]; the horizon itself is always last.
  std::vector<double> checkpoint_times() const;
};

/// Levels 2^lo, ..., 2^hi.
std::vector<double> dyadic_levels(int lo, int hi);
/// Levels R_{n_min - 1}, ..., R_{n_max} needed for the schedule's crossings.
std::vector<double> schedule_levels(const CrossingSchedule& s);

/// Seed of the independent substream used by one path.
std::uint64_t path_stream_seed(std::uint64_t base_seed, std::uint64_t path_index);

struct IntegratorDiagnostics {
  std::uint64_t steps = 0;
  std::uint64_t pole_reflections = 0;
  std::uint64_t boundary_reflections = 0;
  std::uint64_t drift_caps = 0;
  std::uint64_t bridge_crossings = 0;
  double final_time = 0.0;
  double final_radius = 0.0;
};

struct PathRecord {
  std::uint64_t path_index = 0;
  std::uint64_t seed = 0;
  /// Sample times: 0 followed by the checkpoints reached.
  std::vector<double> times;
  std::vector<double> radii;
  /// sup_{s <= times[k]} r_s over the discrete path.
  std::vector<double> running_sup;
  /// One entry per passage level; kNeverReached when not crossed.
  std::vector<double> passage_times;
  /// Radius at the end of the step that detected each passage.
  std::vector<double> passage_step_radius;
  std::shared_ptr<const std::vector<double>> levels;
  IntegratorDiagnostics diagnostics;
};

/// Euler-Maruyama for dr = (n-1) f'/(2f) dt + dW with reflection at the pole
/// (and at reflect_radius in Reflect mode). First passages combine discrete
/// detection with the Brownian-bridge crossing probability
/// exp(-2 (a - x)(a - y) / dt) between sampled endpoints x, y < a.
PathRecord simulate_radial_path(const ModelManifold& manifold, const SimConfig& cfg, std::uint64_t path_index);

struct Crossing {
  int n = 0;
  double tau = 0.0;
  double duration = 0.0;  // τ_n - τ_{n-1}
};

/// Consecutive crossing durations for every schedule index with finite τ_n.
/// Throws ScheduleMismatchError when a needed radius was not recorded.
std::vector<Crossing> crossing_times(const PathRecord& path, const CrossingSchedule& s);

struct EnsembleAggregates {
  std::vector<std::uint64_t> level_reached;  // per passage level
  std::vector<double> mean_passage_time;     // over paths that reached the level; NaN if none
  std::vector<double> checkpoint_times;
  std::vector<std::uint64_t> checkpoint_count;
  std::vector<double> mean_running_sup;
  std::vector<double> mean_radius;
  /// Histogram of log2 crossing durations between consecutive levels:
  /// row per level (from the second), bins [2^k, 2^{k+1}) for k in [-16, 16).
  std::vector<std::vector<std::uint64_t>> duration_histogram;

  bool operator==(const EnsembleAggregates&) const = default;
};

inline constexpr int kHistogramMinExponent = -16;
inline constexpr int kHistogramBins = 32;

struct EnsembleProvenance {
  std::string version;
  std::string manifold_spec;
  std::string created_utc;
};

struct PathEnsemble {
  SimConfig config;
  ModelManifold manifold;
  std::vector<PathRecord> paths;
  EnsembleAggregates aggregates;
  EnsembleProvenance provenance;
};

/// Fixed-order pairwise summation.
double pairwise_sum(std::span<const double> values);

EnsembleAggregates compute_aggregates(std::span<const PathRecord> paths, std::span<const double> levels,
                                      std::span<const double> checkpoints);

/// Runs cfg.paths independent paths on `workers` threads. Path i always uses
/// the substream path_stream_seed(cfg.seed, i), so the ensemble does not depend
/// on the worker count or execution order. A failing path aborts the run with
/// an IntegratorError naming the lowest failing path index.
PathEnsemble run_ensemble(const ModelManifold& manifold, const SimConfig& cfg, unsigned workers = 1);

struct StationaryOptions {
  double burn_in = 1.0;
  double interval = 0.5;
  int samples_per_path = 50;
};

/// Post-burn-in radii of reflecting radial diffusions on B(R): each of
/// cfg.paths paths contributes samples_per_path radii spaced by interval.
/// cfg.boundary must be Reflect at R.
std::vector<double> stationary_sample(const ModelManifold& manifold, double R, const SimConfig& cfg,
                                      const StationaryOptions& opts, unsigned workers = 1);

}  // namespace ratelab

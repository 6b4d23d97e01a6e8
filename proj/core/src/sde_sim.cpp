#include "ratelab/sde_sim.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <random>
#include <thread>

#include "ratelab/errors.hpp"
#include "ratelab/version.hpp"

namespace ratelab {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double base_step(const SimConfig& cfg, double r) {
  switch (cfg.step_policy) {
    case StepPolicy::Fixed: return cfg.dt;
    case StepPolicy::PoleRefined: return cfg.dt * std::min(1.0, r * r);
    case StepPolicy::ScaleInvariant: return cfg.dt * std::max(1.0, r * r);
  }
  return cfg.dt;
}

PathRecord simulate_path(const ModelManifold& manifold, const SimConfig& cfg, std::span<const double> checkpoints,
                         std::shared_ptr<const std::vector<double>> levels_ptr, std::uint64_t path_index) {
  PathRecord rec;
  rec.path_index = path_index;
  rec.seed = path_stream_seed(cfg.seed, path_index);
  rec.levels = std::move(levels_ptr);
  const auto& levels = *rec.levels;
  const std::size_t level_count = levels.size();

  std::mt19937_64 engine(rec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  double t = 0.0;
  double r = cfg.r0;
  double sup = r;
  rec.times.reserve(checkpoints.size() + 1);
  rec.radii.reserve(checkpoints.size() + 1);
  rec.running_sup.reserve(checkpoints.size() + 1);
  rec.times.push_back(t);
  rec.radii.push_back(r);
  rec.running_sup.push_back(sup);
  rec.passage_times.assign(level_count, kNeverReached);
  rec.passage_step_radius.assign(level_count, kNeverReached);

  std::size_t next_level = 0;
  while (next_level < level_count && levels[next_level] <= r) {
    rec.passage_times[next_level] = 0.0;
    rec.passage_step_radius[next_level] = r;
    ++next_level;
  }

  const bool has_drift = manifold.dimension() > 1;
  const bool reflect = cfg.boundary == BoundaryMode::Reflect;
  const double outer = cfg.reflect_radius;
  auto& diag = rec.diagnostics;

  std::size_t cp = 0;
  while (cp < checkpoints.size()) {
    if (cfg.stop_after_last_level && next_level == level_count) break;
    double h = base_step(cfg, r);
    const double remaining = checkpoints[cp] - t;
    const bool lands_on_checkpoint = h >= remaining;
    if (lands_on_checkpoint) h = remaining;

    double increment = has_drift ? radial_drift(manifold, r) * h : 0.0;
    if (std::abs(increment) > cfg.drift_cap * r) {
      increment = std::copysign(cfg.drift_cap * r, increment);
      ++diag.drift_caps;
    }
    double y = r + increment + std::sqrt(h) * normal(engine);
    if (y < 0.0) {
      y = -y;
      ++diag.pole_reflections;
    }
    if (reflect) {
      while (y > outer) {
        y = 2.0 * outer - y;
        ++diag.boundary_reflections;
        if (y < 0.0) {
          y = -y;
          ++diag.pole_reflections;
        }
      }
    }
    if (has_drift && !(y > 0.0)) {
      throw IntegratorError(fmt::format("path {} reached radius {} at t = {} after pole handling", path_index, y, t));
    }

    if (next_level < level_count) {
      double last_fraction = 0.0;
      while (next_level < level_count && y >= levels[next_level]) {
        const double fraction = (levels[next_level] - r) / (y - r);
        rec.passage_times[next_level] = t + h * fraction;
        rec.passage_step_radius[next_level] = y;
        last_fraction = fraction;
        ++next_level;
      }
      if (cfg.bridge_correction && next_level < level_count && !(reflect && levels[next_level] > outer)) {
        const double a = levels[next_level];
        const double exponent = -2.0 * (a - r) * (a - y) / h;
        if (exponent > -40.0 && uniform(engine) < std::exp(exponent)) {
          rec.passage_times[next_level] = t + 0.5 * h * (1.0 + last_fraction);
          rec.passage_step_radius[next_level] = y;
          ++diag.bridge_crossings;
          ++next_level;
        }
      }
    }

    sup = std::max(sup, y);
    r = y;
    ++diag.steps;
    if (lands_on_checkpoint) {
      t = checkpoints[cp];
      rec.times.push_back(t);
      rec.radii.push_back(r);
      rec.running_sup.push_back(sup);
      ++cp;
    } else {
      t += h;
    }
  }
  diag.final_time = t;
  diag.final_radius = r;
  return rec;
}

}  // namespace

void SimConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError(fmt::format("dt must be positive, got {}", dt));
  if (!(horizon >= 0.0) || !std::isfinite(horizon)) {
    throw ConfigError(fmt::format("horizon must be finite and >= 0, got {}", horizon));
  }
  if (!(r0 > 0.0)) throw ConfigError(fmt::format("start radius r0 must be positive, got {}", r0));
  if (paths < 1) throw ConfigError("path count must be at least 1");
  if (!(drift_cap > 0.0 && drift_cap < 1.0)) throw ConfigError(fmt::format("drift cap must lie in (0, 1), got {}", drift_cap));
  if (checkpoints_per_decade < 1) throw ConfigError("checkpoints_per_decade must be >= 1");
  if (!(first_checkpoint > 0.0)) throw ConfigError("first_checkpoint must be positive");
  if (boundary == BoundaryMode::Reflect) {
    if (!(reflect_radius > 0.0) || !std::isfinite(reflect_radius)) {
      throw ConfigError(fmt::format("reflect mode needs a finite positive radius, got {}", reflect_radius));
    }
    if (r0 > reflect_radius) {
      throw ConfigError(fmt::format("start radius {} lies outside the reflecting ball of radius {}", r0, reflect_radius));
    }
  }
  for (std::size_t i = 0; i < passage_levels.size(); ++i) {
    if (!(passage_levels[i] > 0.0) || (i > 0 && !(passage_levels[i] > passage_levels[i - 1]))) {
      throw ConfigError("passage levels must be positive and strictly increasing");
    }
  }
  if (stop_after_last_level && passage_levels.empty()) {
    throw ConfigError("stop_after_last_level needs at least one passage level");
  }
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    if (!(checkpoints[i] > 0.0) || checkpoints[i] > horizon || (i > 0 && !(checkpoints[i] > checkpoints[i - 1]))) {
      throw ConfigError("explicit checkpoints must be increasing and lie in (0, horizon]");
    }
  }
}

std::vector<double> SimConfig::checkpoint_times() const {
  std::vector<double> out;
  if (horizon <= 0.0) return out;
  if (!checkpoints.empty()) {
    out = checkpoints;
  } else {
    const double start = std::min(first_checkpoint, horizon);
    for (int k = 0;; ++k) {
      const double tk = start * std::pow(10.0, static_cast<double>(k) / checkpoints_per_decade);
      if (tk >= horizon * (1.0 - 1e-12)) break;
      out.push_back(tk);
    }
  }
  if (out.empty() || out.back() < horizon) out.push_back(horizon);
  return out;
}

std::vector<double> dyadic_levels(int lo, int hi) {
  std::vector<double> out;
  for (int n = lo; n <= hi; ++n) out.push_back(std::ldexp(1.0, n));
  return out;
}

std::vector<double> schedule_levels(const CrossingSchedule& s) { return dyadic_levels(s.n_min - 1, s.n_max); }

std::uint64_t path_stream_seed(std::uint64_t base_seed, std::uint64_t path_index) {
  return splitmix64(base_seed ^ splitmix64(path_index));
}

PathRecord simulate_radial_path(const ModelManifold& manifold, const SimConfig& cfg, std::uint64_t path_index) {
  cfg.validate();
  const auto checkpoints = cfg.checkpoint_times();
  return simulate_path(manifold, cfg, checkpoints, std::make_shared<const std::vector<double>>(cfg.passage_levels),
                       path_index);
}

std::vector<Crossing> crossing_times(const PathRecord& path, const CrossingSchedule& s) {
  const std::vector<double> empty;
  const auto& levels = path.levels ? *path.levels : empty;
  auto find_level = [&](double radius) {
    auto it = std::find(levels.begin(), levels.end(), radius);
    if (it == levels.end()) {
      throw ScheduleMismatchError(fmt::format("radius {} was not recorded as a passage level", radius));
    }
    return static_cast<std::size_t>(it - levels.begin());
  };
  std::vector<Crossing> out;
  for (int n = s.n_min; n <= s.n_max; ++n) {
    const std::size_t hi = find_level(s.R_at(n));
    const std::size_t lo = find_level(0.5 * s.R_at(n));
    const double tau = path.passage_times[hi];
    if (!std::isfinite(tau)) continue;
    out.push_back({n, tau, tau - path.passage_times[lo]});
  }
  return out;
}

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double acc = 0.0;
    for (double v : values) acc += v;
    return acc;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

EnsembleAggregates compute_aggregates(std::span<const PathRecord> paths, std::span<const double> levels,
                                      std::span<const double> checkpoints) {
  EnsembleAggregates agg;
  const std::size_t L = levels.size();
  agg.level_reached.assign(L, 0);
  agg.mean_passage_time.assign(L, std::nan(""));
  std::vector<double> scratch;
  for (std::size_t j = 0; j < L; ++j) {
    scratch.clear();
    for (const auto& p : paths) {
      if (std::isfinite(p.passage_times[j])) scratch.push_back(p.passage_times[j]);
    }
    agg.level_reached[j] = scratch.size();
    if (!scratch.empty()) agg.mean_passage_time[j] = pairwise_sum(scratch) / static_cast<double>(scratch.size());
  }

  agg.checkpoint_times.assign(checkpoints.begin(), checkpoints.end());
  agg.checkpoint_count.assign(checkpoints.size(), 0);
  agg.mean_running_sup.assign(checkpoints.size(), std::nan(""));
  agg.mean_radius.assign(checkpoints.size(), std::nan(""));
  std::vector<double> radii;
  for (std::size_t k = 0; k < checkpoints.size(); ++k) {
    scratch.clear();
    radii.clear();
    for (const auto& p : paths) {
      if (p.times.size() > k + 1) {
        scratch.push_back(p.running_sup[k + 1]);
        radii.push_back(p.radii[k + 1]);
      }
    }
    agg.checkpoint_count[k] = scratch.size();
    if (!scratch.empty()) {
      const auto count = static_cast<double>(scratch.size());
      agg.mean_running_sup[k] = pairwise_sum(scratch) / count;
      agg.mean_radius[k] = pairwise_sum(radii) / count;
    }
  }

  agg.duration_histogram.assign(L > 0 ? L - 1 : 0, std::vector<std::uint64_t>(kHistogramBins, 0));
  for (const auto& p : paths) {
    for (std::size_t j = 1; j < L; ++j) {
      const double a = p.passage_times[j - 1];
      const double b = p.passage_times[j];
      if (!std::isfinite(a) || !std::isfinite(b)) continue;
      const double d = b - a;
      int bin = 0;
      if (d > 0.0) bin = static_cast<int>(std::floor(std::log2(d))) - kHistogramMinExponent;
      bin = std::clamp(bin, 0, kHistogramBins - 1);
      ++agg.duration_histogram[j - 1][static_cast<std::size_t>(bin)];
    }
  }
  return agg;
}

PathEnsemble run_ensemble(const ModelManifold& manifold, const SimConfig& cfg, unsigned workers) {
  cfg.validate();
  const auto checkpoints = cfg.checkpoint_times();
  auto levels = std::make_shared<const std::vector<double>>(cfg.passage_levels);
  const std::size_t count = cfg.paths;

  std::vector<PathRecord> records(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};

  auto work = [&] {
    for (;;) {
      if (failed.load(std::memory_order_relaxed)) return;
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        records[i] = simulate_path(manifold, cfg, checkpoints, levels, i);
      } catch (...) {
        errors[i] = std::current_exception();
        failed.store(true);
      }
    }
  };
  const unsigned n_workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::min<std::size_t>(count, 4096))));
  if (n_workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n_workers);
    for (unsigned w = 0; w < n_workers; ++w) pool.emplace_back(work);
  }

  for (std::size_t i = 0; i < count; ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const std::exception& e) {
      throw IntegratorError(fmt::format("path {} of {} failed: {}", i, count, e.what()));
    }
  }

  PathEnsemble ens{cfg, manifold, std::move(records), {}, {}};
  ens.aggregates = compute_aggregates(ens.paths, *levels, checkpoints);
  ens.provenance.version = kVersion;
  ens.provenance.manifold_spec = manifold.describe();
  return ens;
}

std::vector<double> stationary_sample(const ModelManifold& manifold, double R, const SimConfig& cfg,
                                      const StationaryOptions& opts, unsigned workers) {
  if (cfg.boundary != BoundaryMode::Reflect || cfg.reflect_radius != R) {
    throw ConfigError(fmt::format("stationary sampling needs reflect mode at R = {}", R));
  }
  if (!(opts.burn_in >= 0.0) || !(opts.interval > 0.0) || opts.samples_per_path < 1) {
    throw ConfigError("stationary sampling needs burn_in >= 0, interval > 0 and at least one sample per path");
  }
  SimConfig run = cfg;
  run.checkpoints.clear();
  const std::size_t first = opts.burn_in > 0.0 ? 0 : 1;
  for (int j = 0; j < opts.samples_per_path; ++j) {
    run.checkpoints.push_back(opts.burn_in + static_cast<double>(j + static_cast<int>(first)) * opts.interval);
  }
  run.horizon = run.checkpoints.back();
  run.passage_levels.clear();
  run.stop_after_last_level = false;
  const auto ens = run_ensemble(manifold, run, workers);
  std::vector<double> samples;
  samples.reserve(run.paths * static_cast<std::size_t>(opts.samples_per_path));
  for (const auto& p : ens.paths) samples.insert(samples.end(), p.radii.begin() + 1, p.radii.end());
  return samples;
}

}  // namespace ratelab

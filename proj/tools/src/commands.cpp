#include "ratelab/cli/commands.hpp"

#include <fmt/format.h>

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <thread>

#include "ratelab/cli/manifest.hpp"
#include "ratelab/errors.hpp"
#include "ratelab/model_spec.hpp"
#include "ratelab/rate_engine.hpp"
#include "ratelab/schedule.hpp"
#include "ratelab/verify.hpp"
#include "ratelab/version.hpp"

namespace ratelab::cli {

namespace fs = std::filesystem;

namespace {

using Layer = std::map<std::string, std::string>;

const std::vector<std::string> kSimKeys = {"manifold", "paths",       "horizon", "dt",        "seed",
                                           "reflect",  "schedule",    "r0",      "step_policy", "bridge",
                                           "drift_cap", "burn_in",    "interval", "samples_per_path"};

const Layer kSimDefaults = {
    {"paths", "1000"},       {"horizon", "1"},  {"dt", "0.001"},    {"seed", "0"},
    {"r0", "1"},             {"step_policy", "fixed"}, {"bridge", "true"}, {"drift_cap", "0.5"},
    {"burn_in", "1"},        {"interval", "0.5"},      {"samples_per_path", "50"},
};

Layer with_defaults(Layer extra) {
  Layer out = kSimDefaults;
  for (auto& [k, v] : extra) out[k] = std::move(v);
  return out;
}

template <class F>
auto for_option(std::string_view key, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(fmt::format("{}: {}", flag_name(key), e.what()));
  }
}

void write_text_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IOError(fmt::format("cannot create directory '{}': {}", path.parent_path().string(), ec.message()));
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IOError(fmt::format("cannot open '{}' for writing", path.string()));
  out << content;
  if (!out.flush()) throw IOError(fmt::format("write to '{}' failed", path.string()));
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IOError(fmt::format("cannot read '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path default_out_dir(const char* fallback) {
  if (const char* env = std::getenv(kOutDirEnv); env != nullptr && *env != '\0') return env;
  return fallback;
}

unsigned worker_count(const Settings& s) {
  if (!s.has("workers")) return std::max(1u, std::thread::hardware_concurrency());
  const long long w = s.integer("workers");
  if (w < 1) throw ConfigError(fmt::format("--workers: must be at least 1, got {}", w));
  return static_cast<unsigned>(w);
}

Layer pick(const Layer& all, const std::vector<std::string>& keys) {
  Layer out;
  for (const auto& k : keys) {
    if (auto it = all.find(k); it != all.end()) out.emplace(k, it->second);
  }
  return out;
}

// Options shared by the subcommand parsers: each flag writes a string into a
// map slot and is copied into the flag layer only if it appeared.
struct FlagSet {
  Layer values;
  std::vector<std::pair<std::string, CLI::Option*>> options;
  std::string config_path;
  CLI::Option* config = nullptr;

  void add(CLI::App* app, const std::string& key, const std::string& help) {
    options.emplace_back(key, app->add_option(flag_name(key), values[key], help));
  }
  void add_config(CLI::App* app) {
    config = app->add_option("--config", config_path, "flat key = value file; flags override it");
  }
  Layer given() const {
    Layer out;
    for (const auto& [k, opt] : options) {
      if (opt->count() > 0) out[k] = values.at(k);
    }
    return out;
  }
};

Settings make_settings(const FlagSet& fs, Layer defaults, std::ostream& err) {
  Layer file;
  if (fs.config != nullptr && fs.config->count() > 0) {
    auto cfg = load_config(fs.config_path);
    for (const auto& w : cfg.warnings) err << "warning: " << fs.config_path << ": " << w << "\n";
    file = std::move(cfg.values);
  }
  return Settings(fs.given(), std::move(file), std::move(defaults));
}

// ---------------------------------------------------------------------------

std::string rate_csv(const Settings& s) {
  const std::string spec = s.text("model");
  const auto model = for_option("model", [&] { return parse_model_spec(spec); });
  RateOptions opts;
  opts.lower = s.number("lower");
  const double C = s.number("const");
  if (!(C > 0.0)) throw ConfigError(fmt::format("--const: must be positive, got {}", C));
  const auto times = for_option("t", [&] { return parse_time_list(s.text("t")); });
  const RateFunction rate = for_option("lower", [&] { return RateFunction(model, opts); });

  std::string out = "t,psi,C_psi_Ct,model,lower,tolerance\n";
  for (double t : times) {
    const double psi = for_option("t", [&] { return rate.psi(t); });
    const double scaled = for_option("t", [&] { return rate.scaled_rate(t, C); });
    out += fmt::format("{},{},{},{},{},{}\n", csv_number(t), csv_number(psi), csv_number(scaled), csv_text(spec),
                       csv_number(rate.lower_limit()), csv_number(rate.tolerance()));
  }
  return out;
}

std::string schedule_csv(const Settings& s) {
  const std::string spec = s.text("model");
  const auto model = for_option("model", [&] { return parse_model_spec(spec); });
  const long long n_max = s.integer("n_max");
  const double C = s.number("const");
  const auto sched = for_option("n_max", [&] { return build_schedule(model, 3, static_cast<int>(n_max)); });
  std::string out = "n,R_n,r_n,t_n,T_n,log_tail_bound\n";
  for (int n = sched.n_min; n <= sched.n_max; ++n) {
    const double lb = for_option("const", [&] { return log_tail_bound(sched, n, C); });
    out += fmt::format("{},{},{},{},{},{}\n", n, csv_number(sched.R_at(n)), csv_number(sched.r_at(n)),
                       csv_number(sched.t_at(n)), csv_number(sched.T_at(n)), csv_number(lb));
  }
  return out;
}

// Writes csv to --out, to the default directory, or to stdout.
int emit_table(const Settings& s, const std::string& sub, const std::string& csv, std::ostream& out,
               const std::vector<std::string>& config_keys) {
  std::optional<fs::path> path;
  if (s.has("out")) {
    path = s.text("out");
  } else if (const char* env = std::getenv(kOutDirEnv); env != nullptr && *env != '\0') {
    path = fs::path(env) / (sub + ".csv");
  }
  if (!path) {
    out << csv;
    return kExitOk;
  }
  write_text_file(*path, csv);
  RunManifest m{kVersion, sub, pick(s.resolved(), config_keys), {{path->filename().string(), git_blob_sha1(csv)}},
                utc_timestamp()};
  write_manifest(m, path->string() + ".manifest");
  out << "wrote " << path->string() << "\n";
  return kExitOk;
}

struct SimulationOutputs {
  PathEnsemble ensemble;
  std::vector<double> stationary;
  std::map<std::string, std::string> files;  // name -> content
};

SimulationOutputs run_simulation(const Settings& s, unsigned workers) {
  const auto manifold = manifold_from(s);
  const auto cfg = sim_config_from(s);
  SimulationOutputs out{run_ensemble(manifold, cfg, workers), {}, {}};
  out.files["passages.csv"] = render_passages_csv(out.ensemble);
  out.files["suprema.csv"] = render_suprema_csv(out.ensemble);
  if (cfg.boundary == BoundaryMode::Reflect) {
    StationaryOptions opts;
    opts.burn_in = s.number("burn_in");
    opts.interval = s.number("interval");
    opts.samples_per_path = static_cast<int>(s.integer("samples_per_path"));
    out.stationary = stationary_sample(manifold, cfg.reflect_radius, cfg, opts, workers);
    out.files["stationary.csv"] = render_stationary_csv(out.stationary);
  }
  return out;
}

int simulate_into(const Settings& s, const fs::path& dir, std::ostream& out) {
  const auto sim = run_simulation(s, worker_count(s));
  RunManifest m{kVersion, "simulate", pick(s.resolved(), kSimKeys), {}, utc_timestamp()};
  for (const auto& [name, content] : sim.files) {
    write_text_file(dir / name, content);
    m.outputs[name] = git_blob_sha1(content);
  }
  write_manifest(m, (dir / "manifest.txt").string());
  out << fmt::format("simulated {} paths; wrote {}\n", sim.ensemble.paths.size(), (dir / "manifest.txt").string());
  return kExitOk;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

CheckRecord failed_check(const std::string& name, double threshold) {
  return make_check(name, std::numeric_limits<double>::infinity(), threshold, "<=", 0.0, 0.0, 0);
}

void add_tail_checks(VerificationReport& report, const PathEnsemble& ens, const ModelManifold& manifold,
                     int n_max) {
  const auto model = VolumeGrowthModel::from_manifold(manifold);
  const auto sched = build_schedule(model, 3, n_max);
  report.references["tail.max_constant"] = fmt::format("{:.12g}", kMaxTailConstant);
  report.references["tail.n_range"] = fmt::format("{}..{}", sched.n_min, sched.n_max);
  CrossingTailEstimate est;
  try {
    est = empirical_crossing_tail(ens, sched);
  } catch (const InsufficientDataError& e) {
    report.references["tail.note"] = e.what();
    report.add(failed_check("tail_constant", kMaxTailConstant));
    return;
  }

  double worst_rise = 0.0;
  double ci_lower = 0.0;
  double ci_upper = 0.0;
  std::uint64_t contributors = 0;
  const CrossingTailRow* prev = nullptr;
  const CrossingTailRow* last = nullptr;
  for (const auto& row : est.rows) {
    report.references[fmt::format("tail.contributing_fraction.n{:02d}", row.n)] =
        fmt::format("{:.12g}", row.contributing_fraction);
    if (!row.eligible) continue;
    contributors += row.contributors;
    if (prev != nullptr) worst_rise = std::max(worst_rise, row.p.estimate - prev->p.estimate);
    if (row.p.lower > 0.0) ci_lower = std::max(ci_lower, std::exp(std::log(row.p.lower) - row.log_bound_unit_constant));
    if (row.p.upper > 0.0) ci_upper = std::max(ci_upper, std::exp(std::log(row.p.upper) - row.log_bound_unit_constant));
    prev = &row;
    last = &row;
  }
  report.add(make_check("tail_constant", est.fitted_constant, kMaxTailConstant, "<=", ci_lower, ci_upper,
                        contributors));
  report.add(make_check("tail_monotone", worst_rise, 0.0, "<=", 0.0, 0.0, contributors));
  if (last != nullptr) {
    report.add(make_check("tail_last_index", last->p.estimate, 1e-2, "<=", last->p.lower, last->p.upper,
                          last->contributors));
  }
}

int verify_into(const Settings& s, const fs::path& dir, std::ostream& out, std::ostream& err) {
  const fs::path run_path = s.text("run");
  const std::string run_text = read_text_file(run_path);
  const auto run = parse_manifest(run_text);
  if (run.subcommand != "simulate") {
    throw ConfigError(fmt::format("--run: '{}' records a '{}' run, not a simulation", run_path.string(), run.subcommand));
  }
  const Settings sim({}, run.config, kSimDefaults);
  const auto manifold = manifold_from(sim);
  const bool reflect = sim.has("reflect");

  std::vector<std::string> checks;
  if (s.has("checks")) {
    checks = split_list(s.text("checks"));
  } else {
    if (sim.has("schedule")) checks.push_back("tail");
    checks.push_back("rate");
    if (reflect) checks.push_back("stationary");
  }
  for (const auto& c : checks) {
    if (c != "tail" && c != "rate" && c != "stationary") throw ConfigError(fmt::format("--checks: unknown check '{}'", c));
    if (c == "tail" && !sim.has("schedule")) throw ConfigError("--checks: tail needs a run simulated with --schedule");
    if (c == "stationary" && !reflect) throw ConfigError("--checks: stationary needs a run simulated with --reflect");
  }
  if (checks.empty()) throw ConfigError("--checks: no checks requested");

  const auto sim_out = run_simulation(sim, worker_count(s));
  VerificationReport report;
  report.references["run.manifest"] = run_path.string();
  report.references["run.manifest_sha1"] = git_blob_sha1(run_text);
  report.references["run.manifold"] = manifold.describe();
  report.references["run.paths"] = std::to_string(sim_out.ensemble.paths.size());

  std::uint64_t mismatched = 0;
  for (const auto& [name, hash] : run.outputs) {
    auto it = sim_out.files.find(name);
    if (it == sim_out.files.end() || git_blob_sha1(it->second) != hash) {
      ++mismatched;
      err << "warning: replayed " << name << " does not match the recorded hash\n";
    }
  }
  report.add(make_check("replay_hash", static_cast<double>(mismatched), 0.0, "<=", 0.0, 0.0, run.outputs.size()));

  for (const auto& c : checks) {
    if (c == "tail") {
      add_tail_checks(report, sim_out.ensemble, manifold, static_cast<int>(sim.integer("schedule")));
    } else if (c == "rate") {
      const double C = s.number("const");
      const double t_min = s.number("t_min");
      RateOptions opts;
      opts.lower = s.number("lower");
      const RateFunction rate(VolumeGrowthModel::from_manifold(manifold), opts);
      const auto v = for_option("const", [&] { return rate_violation_fraction(sim_out.ensemble, rate, C, t_min); });
      report.references["rate.const"] = fmt::format("{:.12g}", C);
      report.references["rate.lower"] = fmt::format("{:.12g}", rate.lower_limit());
      report.references["rate.tolerance"] = fmt::format("{:.12g}", rate.tolerance());
      report.references["rate.t_min"] = fmt::format("{:.12g}", t_min);
      report.add(make_check("rate_violation", v.estimate, 1e-3, "<=", v.lower, v.upper, v.trials));
    } else {
      const double R = sim.number("reflect");
      try {
        const auto ks = stationary_ks_test(sim_out.stationary, manifold, R);
        report.add(make_check("stationary_ks", ks.statistic, ks.threshold, "<=", ks.ci_lower, ks.ci_upper, ks.samples));
      } catch (const InsufficientDataError& e) {
        report.references["stationary.note"] = e.what();
        report.add(failed_check("stationary_ks", kStationaryKsThreshold));
      }
    }
  }

  const std::string csv = render_report(report, ReportFormat::Csv);
  const std::string txt = render_report(report, ReportFormat::StructuredText);
  write_text_file(dir / "report.csv", csv);
  write_text_file(dir / "report.txt", txt);
  Layer config = pick(s.resolved(), {"run", "checks", "const", "lower", "t_min"});
  RunManifest m{kVersion, "verify", config, {{"report.csv", git_blob_sha1(csv)}, {"report.txt", git_blob_sha1(txt)}},
                utc_timestamp()};
  write_manifest(m, (dir / "manifest.txt").string());

  for (const auto& c : report.checks) {
    out << fmt::format("{:<16} {:<4} statistic={:.6g} threshold={:.6g} n={}\n", c.name, c.passed ? "pass" : "FAIL",
                       c.statistic, c.threshold, c.sample_size);
  }
  return report.all_passed() ? kExitOk : kExitCheckFailed;
}

int demo(const std::string& name, const fs::path& dir, unsigned workers, std::ostream& out, std::ostream& err) {
  if (name != "euclidean") throw ConfigError(fmt::format("demo: unknown demo '{}' (available: euclidean)", name));
  const std::string model = "manifold:euclidean,n=2";
  const Settings sched({}, {}, {{"model", model}, {"n_max", "6"}, {"const", "1"}});
  const std::string csv = schedule_csv(sched);
  write_text_file(dir / "schedule.csv", csv);
  out << "wrote " << (dir / "schedule.csv").string() << "\n";

  const Settings sim({}, with_defaults({{"manifold", "euclidean,n=2"},
                                        {"paths", "1000"},
                                        {"horizon", "1000"},
                                        {"dt", "0.001"},
                                        {"step_policy", "scale"},
                                        {"seed", "1"},
                                        {"schedule", "6"},
                                        {"workers", std::to_string(workers)}}),
                     {});
  simulate_into(sim, dir / "run", out);
  const Settings ver({}, {{"run", (dir / "run" / "manifest.txt").string()},
                          {"checks", "tail,rate"},
                          {"const", "512"},
                          {"lower", "6"},
                          {"t_min", "1"},
                          {"workers", std::to_string(workers)}},
                     {});
  return verify_into(ver, dir / "verify", out, err);
}

}  // namespace

// ---------------------------------------------------------------------------

std::string synopsis() {
  return "usage: ratelab <subcommand> [options]\n"
         "  rate      --model <spec> --t <list|a:b:k> [--lower 6] [--const 512] [--out <csv>]\n"
         "  schedule  --model <spec> --n-max N [--const 1] [--out <csv>]\n"
         "  simulate  --manifold <spec> --paths P --horizon T --dt D --seed S [--reflect R]\n"
         "            [--schedule n_max] [--out <dir>]\n"
         "  verify    --run <manifest> [--checks tail,rate,stationary] [--const 512] [--out <dir>]\n"
         "  demo      euclidean [--out <dir>]\n"
         "every subcommand accepts --config <file> (flat key = value; flags override it)\n";
}

std::vector<double> parse_time_list(std::string_view text) {
  std::vector<double> out;
  for (const auto& item : split_list(std::string(text))) {
    const auto c1 = item.find(':');
    if (c1 == std::string::npos) {
      out.push_back(parse_double(item, "time"));
      continue;
    }
    const auto c2 = item.find(':', c1 + 1);
    if (c2 == std::string::npos) throw ParseError(fmt::format("range '{}' must be a:b:k", item));
    const double a = parse_double(item.substr(0, c1), "range start");
    const double b = parse_double(item.substr(c1 + 1, c2 - c1 - 1), "range end");
    const long long k = parse_integer(item.substr(c2 + 1), "range count");
    if (k < 2 || !(b > a)) throw ParseError(fmt::format("range '{}' needs b > a and k >= 2", item));
    for (long long j = 0; j < k; ++j) {
      const double u = static_cast<double>(j) / static_cast<double>(k - 1);
      double v = a > 0.0 ? std::pow(10.0, std::log10(a) + u * (std::log10(b) - std::log10(a))) : a + u * (b - a);
      if (j == 0) v = a;
      if (j == k - 1) v = b;
      out.push_back(v);
    }
  }
  if (out.empty()) throw ParseError("empty time list");
  for (double t : out) {
    if (!(t >= 0.0)) throw DomainError(fmt::format("times must be nonnegative, got {}", t));
  }
  return out;
}

std::string csv_number(double v) { return fmt::format("{}", v); }

std::string csv_text(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

ModelManifold manifold_from(const Settings& s) {
  const std::string spec = s.text("manifold");
  return for_option("manifold", [&] { return parse_manifold_spec(spec); });
}

SimConfig sim_config_from(const Settings& s) {
  SimConfig c;
  c.dt = s.number("dt");
  c.horizon = s.number("horizon");
  c.r0 = s.number("r0");
  c.seed = s.unsigned_integer("seed");
  const long long paths = s.integer("paths");
  if (paths < 1) throw ConfigError(fmt::format("--paths: must be at least 1, got {}", paths));
  c.paths = static_cast<std::size_t>(paths);
  const std::string policy = s.text("step_policy");
  if (policy == "fixed") {
    c.step_policy = StepPolicy::Fixed;
  } else if (policy == "pole") {
    c.step_policy = StepPolicy::PoleRefined;
  } else if (policy == "scale") {
    c.step_policy = StepPolicy::ScaleInvariant;
  } else {
    throw ConfigError(fmt::format("--step-policy: expected fixed, pole or scale, got '{}'", policy));
  }
  c.bridge_correction = s.boolean("bridge");
  c.drift_cap = s.number("drift_cap");
  if (s.has("reflect")) {
    c.boundary = BoundaryMode::Reflect;
    c.reflect_radius = s.number("reflect");
  }
  if (s.has("schedule")) {
    const auto manifold = manifold_from(s);
    const long long n_max = s.integer("schedule");
    const auto sched = for_option("schedule", [&] {
      return build_schedule(VolumeGrowthModel::from_manifold(manifold), 3, static_cast<int>(n_max));
    });
    c.passage_levels = schedule_levels(sched);
  }
  for_option("dt", [&] {
    c.validate();
    return 0;
  });
  return c;
}

std::string render_passages_csv(const PathEnsemble& ens) {
  std::string out = "path,n,tau_n\n";
  for (const auto& p : ens.paths) {
    for (std::size_t j = 0; j < p.passage_times.size(); ++j) {
      if (!std::isfinite(p.passage_times[j])) continue;
      const long n = std::lround(std::log2((*p.levels)[j]));
      out += fmt::format("{},{},{}\n", p.path_index, n, csv_number(p.passage_times[j]));
    }
  }
  return out;
}

std::string render_suprema_csv(const PathEnsemble& ens) {
  std::string out = "path,t,sup_r\n";
  for (const auto& p : ens.paths) {
    for (std::size_t k = 0; k < p.times.size(); ++k) {
      out += fmt::format("{},{},{}\n", p.path_index, csv_number(p.times[k]), csv_number(p.running_sup[k]));
    }
  }
  return out;
}

std::string render_stationary_csv(const std::vector<double>& samples) {
  std::string out = "sample,r\n";
  for (std::size_t i = 0; i < samples.size(); ++i) out += fmt::format("{},{}\n", i, csv_number(samples[i]));
  return out;
}

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"escape-rate numerical lab", "ratelab"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  FlagSet rate_flags, sched_flags, sim_flags, ver_flags, demo_flags;
  auto* rate = app.add_subcommand("rate", "tabulate psi(t) and C psi(C t)");
  rate_flags.add(rate, "model", "volume model spec");
  rate_flags.add(rate, "t", "times: comma list or a:b:k");
  rate_flags.add(rate, "lower", "lower integration limit (> e)");
  rate_flags.add(rate, "const", "rate constant C");
  rate_flags.add(rate, "out", "output CSV path");
  rate_flags.add_config(rate);

  auto* sched = app.add_subcommand("schedule", "crossing schedule and tail bounds");
  sched_flags.add(sched, "model", "volume model spec");
  sched_flags.add(sched, "n_max", "last schedule index");
  sched_flags.add(sched, "const", "tail-bound constant");
  sched_flags.add(sched, "out", "output CSV path");
  sched_flags.add_config(sched);

  auto* sim = app.add_subcommand("simulate", "radial diffusion ensemble");
  const Layer sim_help = {
      {"manifold", "euclidean,n=N | hyperbolic,n=N,kappa=K | cusp,n=N,a=A,r0=R | flat,n=N | tabulated,..."},
      {"paths", "number of paths (default 1000)"},
      {"horizon", "simulated time per path (default 1)"},
      {"dt", "base step size (default 0.001)"},
      {"seed", "base seed (default 0)"},
      {"reflect", "reflect at this radius; enables stationary.csv"},
      {"schedule", "record passages of 2^3 .. 2^N"},
      {"r0", "starting radius (default 1)"},
      {"step_policy", "fixed | pole | scale (default fixed)"},
      {"bridge", "Brownian-bridge crossing correction (default true)"},
      {"drift_cap", "drift cap as a fraction of the radius (default 0.5)"},
      {"burn_in", "stationary sampling burn-in (default 1)"},
      {"interval", "stationary sampling interval (default 0.5)"},
      {"samples_per_path", "stationary samples per path (default 50)"},
  };
  for (const auto& k : kSimKeys) sim_flags.add(sim, k, sim_help.at(k));
  sim_flags.add(sim, "workers", "worker threads");
  sim_flags.add(sim, "out", "output directory");
  sim_flags.add_config(sim);

  auto* ver = app.add_subcommand("verify", "replay a simulation and run checks");
  ver_flags.add(ver, "run", "manifest.txt written by simulate");
  ver_flags.add(ver, "checks", "comma list of tail, rate, stationary (default: all applicable)");
  ver_flags.add(ver, "const", "rate constant C (default 512)");
  ver_flags.add(ver, "lower", "rate lower integration limit (default 6)");
  ver_flags.add(ver, "t_min", "first checkpoint checked against the rate (default 1)");
  ver_flags.add(ver, "workers", "worker threads for the replay");
  ver_flags.add(ver, "out", "report directory");
  ver_flags.add_config(ver);

  auto* dem = app.add_subcommand("demo", "canned end-to-end pipeline");
  std::string demo_name;
  dem->add_option("name", demo_name, "demo name (euclidean)")->required();
  demo_flags.add(dem, "workers", "worker threads");
  demo_flags.add(dem, "out", "output directory");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << synopsis();
    return kExitUsage;
  }

  try {
    if (rate->parsed()) {
      const auto s = make_settings(rate_flags, {{"lower", "6"}, {"const", "512"}}, err);
      return emit_table(s, "rate", rate_csv(s), out, {"model", "t", "lower", "const"});
    }
    if (sched->parsed()) {
      const auto s = make_settings(sched_flags, {{"const", "1"}}, err);
      return emit_table(s, "schedule", schedule_csv(s), out, {"model", "n_max", "const"});
    }
    if (sim->parsed()) {
      const auto s = make_settings(sim_flags, kSimDefaults, err);
      const fs::path dir = s.has("out") ? fs::path(s.text("out")) : default_out_dir("ratelab-out");
      return simulate_into(s, dir, out);
    }
    if (ver->parsed()) {
      const auto s = make_settings(ver_flags, {{"const", "512"}, {"lower", "6"}, {"t_min", "1"}}, err);
      const fs::path dir = s.has("out") ? fs::path(s.text("out")) : default_out_dir("ratelab-out") / "verify";
      return verify_into(s, dir, out, err);
    }
    const auto s = make_settings(demo_flags, {}, err);
    const fs::path dir = s.has("out") ? fs::path(s.text("out")) : default_out_dir("ratelab-out") / "demo";
    return demo(demo_name, dir, worker_count(s), out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

}  // namespace ratelab::cli

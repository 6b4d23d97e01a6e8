#pragma once

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "ratelab/cli/config.hpp"
#include "ratelab/sde_sim.hpp"

namespace ratelab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitUsage = 2;

/// Environment variable naming the default output directory.
inline constexpr const char* kOutDirEnv = "RATELAB_OUT_DIR";

std::string synopsis();

/// Runs one subcommand. args excludes the program name.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Comma-separated times; an item `a:b:k` expands to k points from a to b,
/// geometric when a > 0 and linear otherwise.
std::vector<double> parse_time_list(std::string_view text);

/// Shortest decimal that reads back to the same double.
std::string csv_number(double v);
/// Quotes a field when it contains a comma, quote or newline.
std::string csv_text(std::string_view s);

SimConfig sim_config_from(const Settings& s);
ModelManifold manifold_from(const Settings& s);

std::string render_passages_csv(const PathEnsemble& ens);
std::string render_suprema_csv(const PathEnsemble& ens);
std::string render_stationary_csv(const std::vector<double>& samples);

}  // namespace ratelab::cli

#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ratelab/volume_models.hpp"

namespace ratelab {

/// Parses the model mini-language used by the CLI and config files:
///
///   power:C=1,D=2            exppower:C=1,alpha=0.5
///   expquad:C=1              expquadlog:C=1
///   finite:V=1               tabulated:path=<file>
///   manifold:hyperbolic,n=3,kappa=1
///
/// Omitted constants default to 1. Throws ParseError on malformed input and
/// DomainError on out-of-range parameters.
VolumeGrowthModel parse_model_spec(std::string_view spec);

/// Parses a manifold spec, with or without the leading "manifold:":
/// euclidean,n=2 | hyperbolic,n=3,kappa=1 | cusp,n=2,a=1,r0=1 | flat,n=1 |
/// tabulated,n=2,path=<file>,pole_regular=1 (file rows: r f).
ModelManifold parse_manifold_spec(std::string_view spec);

/// Reads whitespace-separated two-column numeric text. Blank lines and lines
/// starting with '#' are skipped.
std::pair<std::vector<double>, std::vector<double>> read_two_column_file(const std::string& path);

}  // namespace ratelab

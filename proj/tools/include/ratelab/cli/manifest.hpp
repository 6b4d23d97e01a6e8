#pragma once

#include <map>
#include <string>
#include <string_view>

namespace ratelab::cli {

/// Record of one CLI run: enough configuration to replay it and the hash of
/// every output file it wrote.
struct RunManifest {
  std::string version;
  std::string subcommand;
  std::map<std::string, std::string> config;
  /// Output file name (relative to the manifest) -> git blob SHA-1.
  std::map<std::string, std::string> outputs;
  std::string created_utc;
};

/// SHA-1 of "blob <size>\0" followed by the content, as git computes it.
std::string git_blob_sha1(std::string_view content);

/// Sorted `key = value` lines.
std::string render_manifest(const RunManifest& m);
/// Throws ParseError for malformed lines or missing version/subcommand.
RunManifest parse_manifest(std::string_view text);

RunManifest read_manifest(const std::string& path);
void write_manifest(const RunManifest& m, const std::string& path);

std::string utc_timestamp();

}  // namespace ratelab::cli

#include "ratelab/cli/manifest.hpp"

#include <fmt/format.h>
#include <openssl/evp.h>

#include <chrono>
#include <ctime>
#include <fstream>
#include <memory>
#include <sstream>

#include "ratelab/errors.hpp"

namespace ratelab::cli {

std::string git_blob_sha1(std::string_view content) {
  const std::string header = fmt::format("blob {}", content.size());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha1(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), header.data(), header.size() + 1) != 1 ||  // includes the NUL
      EVP_DigestUpdate(ctx.get(), content.data(), content.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &length) != 1) {
    throw Error("SHA-1 digest failed");
  }
  std::string out;
  out.reserve(2 * length);
  for (unsigned int i = 0; i < length; ++i) out += fmt::format("{:02x}", digest[i]);
  return out;
}

std::string render_manifest(const RunManifest& m) {
  std::map<std::string, std::string> lines;
  lines["version"] = m.version;
  lines["subcommand"] = m.subcommand;
  lines["created_utc"] = m.created_utc;
  for (const auto& [k, v] : m.config) lines["config." + k] = v;
  for (const auto& [k, v] : m.outputs) lines["output." + k] = v;
  std::string out;
  for (const auto& [k, v] : lines) out += k + " = " + v + "\n";
  return out;
}

RunManifest parse_manifest(std::string_view text) {
  RunManifest m;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  bool have_version = false;
  bool have_sub = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto sep = line.find(" = ");
    if (sep == std::string::npos) throw ParseError(fmt::format("expected 'key = value', got '{}'", line), line_no);
    const std::string key = line.substr(0, sep);
    const std::string value = line.substr(sep + 3);
    if (key == "version") {
      m.version = value;
      have_version = true;
    } else if (key == "subcommand") {
      m.subcommand = value;
      have_sub = true;
    } else if (key == "created_utc") {
      m.created_utc = value;
    } else if (key.starts_with("config.")) {
      m.config[key.substr(7)] = value;
    } else if (key.starts_with("output.")) {
      m.outputs[key.substr(7)] = value;
    } else {
      throw ParseError(fmt::format("unexpected manifest key '{}'", key), line_no);
    }
  }
  if (!have_version || !have_sub) throw ParseError("manifest lacks version or subcommand", line_no);
  return m;
}

RunManifest read_manifest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IOError(fmt::format("cannot read manifest '{}'", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_manifest(ss.str());
}

void write_manifest(const RunManifest& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IOError(fmt::format("cannot open '{}' for writing", path));
  out << render_manifest(m);
  if (!out.flush()) throw IOError(fmt::format("write to '{}' failed", path));
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace ratelab::cli

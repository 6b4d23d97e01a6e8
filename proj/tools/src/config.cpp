#include "ratelab/cli/config.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ratelab/errors.hpp"

namespace ratelab::cli {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

const std::vector<std::string>& known_config_keys() {
  static const std::vector<std::string> keys = {
      "bridge",  "burn_in",  "checks",  "const",       "drift_cap", "dt",      "horizon", "interval",
      "lower",   "manifold", "model",   "n_max",       "out",       "paths",   "r0",      "reflect",
      "run",     "samples_per_path",    "schedule",    "seed",      "step_policy",        "t",
      "t_min",   "workers",
  };
  return keys;
}

ConfigFile parse_config(std::string_view text) {
  const auto& known = known_config_keys();
  ConfigFile out;
  std::map<std::string, int> first_line;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) {
      if (end == text.size()) break;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(fmt::format("expected key = value, got '{}'", line), line_no);
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw ParseError("empty key", line_no);
    if (std::find(known.begin(), known.end(), key) == known.end()) throw UnknownKeyError(key, line_no);
    if (auto it = first_line.find(key); it != first_line.end()) {
      out.warnings.push_back(
          fmt::format("line {}: '{}' overrides the value set on line {}", line_no, key, it->second));
      it->second = line_no;
    } else {
      first_line.emplace(key, line_no);
    }
    out.values[key] = value;
    if (end == text.size()) break;
  }
  return out;
}

ConfigFile load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IOError(fmt::format("cannot read config file '{}'", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

Settings::Settings(std::map<std::string, std::string> flags, std::map<std::string, std::string> file,
                   std::map<std::string, std::string> defaults)
    : flags_(std::move(flags)), file_(std::move(file)), defaults_(std::move(defaults)) {}

std::optional<std::string> Settings::get(const std::string& key) const {
  for (const auto* layer : {&flags_, &file_, &defaults_}) {
    if (auto it = layer->find(key); it != layer->end()) return it->second;
  }
  return std::nullopt;
}

std::string Settings::text(const std::string& key) const {
  auto v = get(key);
  if (!v) throw ConfigError(fmt::format("missing required option {}", flag_name(key)));
  return *v;
}

double Settings::number(const std::string& key) const { return parse_double(text(key), flag_name(key)); }

long long Settings::integer(const std::string& key) const { return parse_integer(text(key), flag_name(key)); }

std::uint64_t Settings::unsigned_integer(const std::string& key) const {
  const std::string v = text(key);
  std::uint64_t out = 0;
  const auto* b = v.data();
  const auto* e = v.data() + v.size();
  const auto [p, ec] = std::from_chars(b, e, out);
  if (ec != std::errc{} || p != e) {
    throw ConfigError(fmt::format("{}: expected a non-negative integer, got '{}'", flag_name(key), v));
  }
  return out;
}

bool Settings::boolean(const std::string& key) const {
  const std::string v = text(key);
  if (v == "1" || v == "true" || v == "on" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "off" || v == "no") return false;
  throw ConfigError(fmt::format("{}: expected true or false, got '{}'", flag_name(key), v));
}

std::map<std::string, std::string> Settings::resolved() const {
  std::map<std::string, std::string> out = defaults_;
  for (const auto& [k, v] : file_) out[k] = v;
  for (const auto& [k, v] : flags_) out[k] = v;
  return out;
}

std::string flag_name(std::string_view key) {
  std::string out = "--";
  for (char c : key) out += c == '_' ? '-' : c;
  return out;
}

double parse_double(std::string_view text, std::string_view what) {
  const std::string_view t = trim(text);
  double out = 0.0;
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  if (t.empty() || ec != std::errc{} || p != t.data() + t.size() || !std::isfinite(out)) {
    throw ConfigError(fmt::format("{}: expected a finite number, got '{}'", what, text));
  }
  return out;
}

long long parse_integer(std::string_view text, std::string_view what) {
  const std::string_view t = trim(text);
  long long out = 0;
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  if (t.empty() || ec != std::errc{} || p != t.data() + t.size()) {
    throw ConfigError(fmt::format("{}: expected an integer, got '{}'", what, text));
  }
  return out;
}

}  // namespace ratelab::cli

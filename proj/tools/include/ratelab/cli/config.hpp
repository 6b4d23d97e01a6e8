#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ratelab::cli {

/// Keys accepted in config files. Flags use the same names with '-' for '_'.
const std::vector<std::string>& known_config_keys();

struct ConfigFile {
  std::map<std::string, std::string> values;
  /// One message per overridden duplicate key.
  std::vector<std::string> warnings;
};

/// Flat `key = value` text. '#' starts a comment, blank lines are skipped and a
/// later duplicate replaces the earlier value. Throws ParseError for a line
/// without '=' or with an empty key, UnknownKeyError for keys outside
/// known_config_keys().
ConfigFile parse_config(std::string_view text);

/// parse_config on the file contents; IOError if unreadable.
ConfigFile load_config(const std::string& path);

/// Flag > config file > default lookup.
class Settings {
 public:
  Settings() = default;
  Settings(std::map<std::string, std::string> flags, std::map<std::string, std::string> file,
           std::map<std::string, std::string> defaults);

  std::optional<std::string> get(const std::string& key) const;
  bool has(const std::string& key) const { return get(key).has_value(); }
  /// ConfigError naming the flag when no layer sets the key.
  std::string text(const std::string& key) const;
  double number(const std::string& key) const;
  long long integer(const std::string& key) const;
  std::uint64_t unsigned_integer(const std::string& key) const;
  bool boolean(const std::string& key) const;

  /// Every key set by some layer, with its winning value.
  std::map<std::string, std::string> resolved() const;

 private:
  std::map<std::string, std::string> flags_;
  std::map<std::string, std::string> file_;
  std::map<std::string, std::string> defaults_;
};

std::string flag_name(std::string_view key);

double parse_double(std::string_view text, std::string_view what);
long long parse_integer(std::string_view text, std::string_view what);

}  // namespace ratelab::cli

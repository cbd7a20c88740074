#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace shellflow {

/// Raised for any malformed, missing or unknown configuration key; the
/// message always names the offending key.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Flat "key = value" text config ('#' comments, blank lines ignored).
/// Every language can parse it without a schema library.
class Config {
 public:
  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text);

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& dflt) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double dflt) const;
  long get_int(const std::string& key) const;
  long get_int(const std::string& key, long dflt) const;
  std::vector<int> get_int_list(const std::string& key) const;  // comma-separated

  void set(const std::string& key, const std::string& value);
  const std::map<std::string, std::string>& entries() const { return kv_; }

  /// Throws ConfigError naming the first key outside `known`.
  void require_known(const std::vector<std::string>& known) const;

 private:
  std::map<std::string, std::string> kv_;
};

}  // namespace shellflow

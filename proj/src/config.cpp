#include "shellflow/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace shellflow {

namespace {
std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}
}  // namespace

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str());
}

Config Config::parse_string(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: line " + std::to_string(lineno) +
                        " is not 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config: empty key on line " + std::to_string(lineno));
    cfg.kv_[key] = val;
  }
  return cfg;
}

bool Config::has(const std::string& key) const { return kv_.count(key) > 0; }

std::string Config::get_string(const std::string& key) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) throw ConfigError("config: missing key '" + key + "'");
  return it->second;
}

std::string Config::get_string(const std::string& key,
                               const std::string& dflt) const {
  const auto it = kv_.find(key);
  return it == kv_.end() ? dflt : it->second;
}

double Config::get_double(const std::string& key) const {
  const std::string s = get_string(key);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0')
    throw ConfigError("config: key '" + key + "' is not a number: '" + s + "'");
  return v;
}

double Config::get_double(const std::string& key, double dflt) const {
  return has(key) ? get_double(key) : dflt;
}

long Config::get_int(const std::string& key) const {
  const std::string s = get_string(key);
  char* end = nullptr;
  const long v = std::strtol(s.c_str(), &end, 10);
  if (end == s.c_str() || *end != '\0')
    throw ConfigError("config: key '" + key + "' is not an integer: '" + s + "'");
  return v;
}

long Config::get_int(const std::string& key, long dflt) const {
  return has(key) ? get_int(key) : dflt;
}

std::vector<int> Config::get_int_list(const std::string& key) const {
  const std::string s = get_string(key);
  std::vector<int> out;
  std::istringstream in(s);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    tok = trim(tok);
    if (tok.empty()) continue;
    char* end = nullptr;
    const long v = std::strtol(tok.c_str(), &end, 10);
    if (end == tok.c_str() || *end != '\0')
      throw ConfigError("config: key '" + key + "' has a non-integer entry: '" +
                        tok + "'");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

void Config::set(const std::string& key, const std::string& value) {
  kv_[key] = value;
}

void Config::require_known(const std::vector<std::string>& known) const {
  for (const auto& [key, _] : kv_) {
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw ConfigError("config: unknown key '" + key + "'");
  }
}

}  // namespace shellflow

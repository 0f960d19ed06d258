#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "oann/errors.hpp"

namespace oann {

// Engine configuration files are plain `key = value` lines; '#' starts a
// comment. Unknown keys are rejected lazily (only on access), so configs can
// carry extra fields for the CLI.

class KeyValueConfig {
 public:
  KeyValueConfig() = default;

  static KeyValueConfig parse_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw UsageError("cannot read config " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return parse(ss.str());
  }

  static KeyValueConfig parse(const std::string& text) {
    KeyValueConfig cfg;
    std::istringstream is(text);
    std::string line;
    size_t lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      const size_t hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const std::string trimmed = trim(line);
      if (trimmed.empty()) continue;
      const size_t eq = trimmed.find('=');
      if (eq == std::string::npos)
        throw UsageError("config line " + std::to_string(lineno) +
                         ": expected key = value");
      const std::string key = trim(trimmed.substr(0, eq));
      const std::string value = trim(trimmed.substr(eq + 1));
      if (key.empty()) throw UsageError("config line " + std::to_string(lineno) +
                                        ": empty key");
      cfg.values_[key] = value;
    }
    return cfg;
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_str(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw UsageError("config: missing key " + key);
    return it->second;
  }

  std::string get_str(const std::string& key, const std::string& dflt) const {
    auto it = values_.find(key);
    return it == values_.end() ? dflt : it->second;
  }

  uint64_t get_u64(const std::string& key, uint64_t dflt) const {
    auto it = values_.find(key);
    return it == values_.end() ? dflt : std::stoull(it->second);
  }

  double get_double(const std::string& key, double dflt) const {
    auto it = values_.find(key);
    return it == values_.end() ? dflt : std::stod(it->second);
  }

  bool get_bool(const std::string& key, bool dflt) const {
    auto it = values_.find(key);
    if (it == values_.end()) return dflt;
    return it->second == "1" || it->second == "true" || it->second == "yes";
  }

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  static std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
  }

  std::map<std::string, std::string> values_;
};

}  // namespace oann

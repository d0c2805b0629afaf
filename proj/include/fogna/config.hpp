#pragma once

// Flat key=value experiment configuration.
//
//   # comment
//   snr_db = -7, -1, 5     # lists are comma separated
//   trials = 50
//
// Later assignments override earlier ones; command-line overrides win over
// the file. Every value remembers where it came from so type errors can point
// at the offending line.

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fogna/errors.hpp"

namespace fogna {

class ConfigError : public ParameterError {
 public:
  using ParameterError::ParameterError;
};

class Config {
 public:
  struct Entry {
    std::string value;
    std::string origin;  // "file:line" or "--flag"
  };

  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }

  void parse(std::istream& is, const std::string& name) {
    std::string line;
    for (int no = 1; std::getline(is, line); ++no) {
      if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      const std::string where = name + ":" + std::to_string(no);
      if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
      std::string key = trim(line.substr(0, eq));
      if (key.empty()) throw ConfigError(where + ": empty key");
      for (char c : key)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_'))
          throw ConfigError(where + ": invalid key '" + key + "'");
      entries_[key] = {trim(line.substr(eq + 1)), where};
    }
  }

  void load_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file '" + path + "'");
    parse(f, path);
  }

  void set(const std::string& key, const std::string& value, const std::string& origin) {
    entries_[key] = {trim(value), origin};
  }

  /// Rejects keys outside `known`, naming where each stray key was set.
  void check_known(const std::set<std::string>& known) const {
    for (const auto& [k, e] : entries_)
      if (!known.count(k)) throw ConfigError(e.origin + ": unknown key '" + k + "'");
  }

  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  const Entry& entry(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) throw ConfigError("missing required key '" + key + "'");
    return it->second;
  }

  std::string get_string(const std::string& key, const std::optional<std::string>& def = std::nullopt) const {
    if (!has(key)) {
      if (def) return *def;
      entry(key);
    }
    return entry(key).value;
  }

  std::int64_t get_int(const std::string& key, std::optional<std::int64_t> def = std::nullopt) const {
    if (!has(key) && def) return *def;
    const auto& e = entry(key);
    return parse_int(e.value, e.origin, key);
  }

  std::uint64_t get_seed(const std::string& key) const {
    const auto& e = entry(key);
    std::uint64_t v = 0;
    const auto* end = e.value.data() + e.value.size();
    auto [p, ec] = std::from_chars(e.value.data(), end, v);
    if (ec != std::errc() || p != end)
      throw ConfigError(e.origin + ": '" + key + "' must be a non-negative integer, got '" + e.value + "'");
    return v;
  }

  double get_double(const std::string& key, std::optional<double> def = std::nullopt) const {
    if (!has(key) && def) return *def;
    const auto& e = entry(key);
    return parse_double(e.value, e.origin, key);
  }

  bool get_bool(const std::string& key, bool def) const {
    if (!has(key)) return def;
    const auto& e = entry(key);
    if (e.value == "1" || e.value == "true" || e.value == "on" || e.value == "yes") return true;
    if (e.value == "0" || e.value == "false" || e.value == "off" || e.value == "no") return false;
    throw ConfigError(e.origin + ": '" + key + "' must be a boolean, got '" + e.value + "'");
  }

  std::vector<double> get_doubles(const std::string& key, std::optional<std::vector<double>> def = std::nullopt) const {
    if (!has(key) && def) return *def;
    const auto& e = entry(key);
    std::vector<double> out;
    for (const auto& item : split(e.value, e.origin, key)) out.push_back(parse_double(item, e.origin, key));
    return out;
  }

  std::vector<std::int64_t> get_ints(const std::string& key,
                                     std::optional<std::vector<std::int64_t>> def = std::nullopt) const {
    if (!has(key) && def) return *def;
    const auto& e = entry(key);
    std::vector<std::int64_t> out;
    for (const auto& item : split(e.value, e.origin, key)) out.push_back(parse_int(item, e.origin, key));
    return out;
  }

  const std::map<std::string, Entry>& entries() const { return entries_; }

 private:
  static std::vector<std::string> split(const std::string& s, const std::string& origin, const std::string& key) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
      const auto c = s.find(',', start);
      auto item = trim(s.substr(start, c == std::string::npos ? std::string::npos : c - start));
      if (item.empty()) throw ConfigError(origin + ": empty item in list '" + key + "'");
      out.push_back(item);
      if (c == std::string::npos) break;
      start = c + 1;
    }
    return out;
  }

  static std::int64_t parse_int(const std::string& s, const std::string& origin, const std::string& key) {
    std::int64_t v = 0;
    const auto* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, v);
    if (ec == std::errc() && p == end) return v;
    // accept integral scientific notation such as 1.4e4
    try {
      std::size_t used = 0;
      const double d = std::stod(s, &used);
      if (used == s.size() && std::isfinite(d) && d == std::floor(d) && std::abs(d) < 9.0e15)
        return static_cast<std::int64_t>(d);
    } catch (const std::exception&) {
    }
    throw ConfigError(origin + ": '" + key + "' expects an integer, got '" + s + "'");
  }

  static double parse_double(const std::string& s, const std::string& origin, const std::string& key) {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError(origin + ": '" + key + "' expects a number, got '" + s + "'");
  }

  std::map<std::string, Entry> entries_;
};

}  // namespace fogna

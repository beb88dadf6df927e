#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "monoroll/errors.hpp"

namespace monoroll {

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline bool parse_double(std::string_view text, double& out) {
  text = trim(text);
  if (text.empty()) return false;
  if (text.front() == '+') text.remove_prefix(1);
  const auto res = std::from_chars(text.data(), text.data() + text.size(), out);
  return res.ec == std::errc() && res.ptr == text.data() + text.size();
}

/// Shortest round-trip decimal form; used for every number written to disk.
inline std::string format_double(double v) {
  if (v == 0.0) v = 0.0; // no "-0"
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

} // namespace detail

/// Flat `key = value` configuration. `#` starts a comment. Every key read
/// through the typed getters is marked consumed so leftovers can be
/// reported as unknown.
class KeyValueConfig {
public:
  KeyValueConfig() = default;

  static KeyValueConfig parse(std::string_view text) {
    KeyValueConfig cfg;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      auto end = text.find('\n', pos);
      if (end == std::string_view::npos) end = text.size();
      std::string_view line = text.substr(pos, end - pos);
      pos = end + 1;
      ++line_no;
      if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
      line = detail::trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string_view::npos)
        throw ConfigError("", "config line " + std::to_string(line_no) + ": expected key = value");
      std::string key(detail::trim(line.substr(0, eq)));
      std::string value(detail::trim(line.substr(eq + 1)));
      if (key.empty())
        throw ConfigError("", "config line " + std::to_string(line_no) + ": empty key");
      if (cfg.values_.count(key))
        throw ConfigError(key, "duplicate key '" + key + "'");
      cfg.values_[key] = value;
    }
    return cfg;
  }

  static KeyValueConfig load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }

  double get_double(const std::string& key) const {
    const std::string& raw = require(key);
    double v = 0.0;
    if (!detail::parse_double(raw, v) || !std::isfinite(v))
      throw ConfigError(key, "key '" + key + "': not a finite number: '" + raw + "'");
    return v;
  }

  double get_double(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
  }

  long long get_int(const std::string& key, long long fallback) const {
    if (!has(key)) return fallback;
    const std::string& raw = require(key);
    long long v = 0;
    const auto text = detail::trim(raw);
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size())
      throw ConfigError(key, "key '" + key + "': not an integer: '" + raw + "'");
    return v;
  }

  bool get_bool(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string& raw = require(key);
    if (raw == "true" || raw == "1") return true;
    if (raw == "false" || raw == "0") return false;
    throw ConfigError(key, "key '" + key + "': expected true/false: '" + raw + "'");
  }

  /// Comma-separated list of numbers.
  std::vector<double> get_list(const std::string& key, std::vector<double> fallback) const {
    if (!has(key)) return fallback;
    const std::string& raw = require(key);
    std::vector<double> out;
    std::string_view rest(raw);
    while (true) {
      const auto comma = rest.find(',');
      double v = 0.0;
      if (!detail::parse_double(rest.substr(0, comma), v) || !std::isfinite(v))
        throw ConfigError(key, "key '" + key + "': bad list entry in '" + raw + "'");
      out.push_back(v);
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    return out;
  }

  const std::string& get_string(const std::string& key) const { return require(key); }

  /// Throws for the first key (alphabetical) never read by a getter.
  void reject_unknown() const {
    for (const auto& [key, value] : values_)
      if (!consumed_.count(key)) throw ConfigError(key, "unknown config key '" + key + "'");
  }

private:
  const std::string& require(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError(key, "missing required config key '" + key + "'");
    consumed_.insert(key);
    return it->second;
  }

  std::map<std::string, std::string> values_;
  mutable std::set<std::string> consumed_;
};

} // namespace monoroll

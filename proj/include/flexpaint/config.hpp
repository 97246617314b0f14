// Copyright 2026 The FlexPaint Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "flexpaint/core.hpp"

namespace flexpaint {

/// Flat `section.key = value` store read from a text file. `#` starts a
/// comment; later assignments override earlier ones. Every key read through
/// a getter is marked used so leftover keys (typos) can be reported.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::istream& in, const std::string& origin = "config") {
    KeyValueConfig cfg;
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
      ++line;
      if (auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
      if (trim(raw).empty()) continue;
      try {
        cfg.assign(raw);
      } catch (const Error& e) {
        throw Error(origin + ":" + std::to_string(line) + ": " + e.what());
      }
    }
    return cfg;
  }

  static KeyValueConfig load(const std::string& path) {
    std::ifstream in(path);
    require(static_cast<bool>(in), "cannot open config file '" + path + "'");
    return parse(in, path);
  }

  /// Applies one `key=value` assignment.
  void assign(const std::string& assignment) {
    const auto eq = assignment.find('=');
    require(eq != std::string::npos, "expected key = value, got '" + trim(assignment) + "'");
    const auto key = trim(assignment.substr(0, eq));
    require(!key.empty() && key.find('.') != std::string::npos && key.find(' ') == std::string::npos,
            "config keys look like section.name, got '" + key + "'");
    values_[key] = trim(assignment.substr(eq + 1));
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::string get(const std::string& key, const std::string& fallback) const {
    const auto* s = find(key);
    return s ? *s : fallback;
  }
  std::string get(const std::string& key, const char* fallback) const { return get(key, std::string(fallback)); }

  double get(const std::string& key, double fallback) const {
    const auto* found = find(key);
    if (!found) return fallback;
    const auto& s = *found;
    double v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    require(ec == std::errc{} && ptr == s.data() + s.size() && std::isfinite(v),
            "config key '" + key + "' expects a finite number, got '" + s + "'");
    return v;
  }

  int get(const std::string& key, int fallback) const {
    const auto* found = find(key);
    if (!found) return fallback;
    const auto& s = *found;
    int v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    require(ec == std::errc{} && ptr == s.data() + s.size(), "config key '" + key + "' expects an integer, got '" + s + "'");
    return v;
  }

  bool get(const std::string& key, bool fallback) const {
    const auto* found = find(key);
    if (!found) return fallback;
    const auto& s = *found;
    if (s == "true" || s == "on" || s == "1") return true;
    if (s == "false" || s == "off" || s == "0") return false;
    throw Error("config key '" + key + "' expects true or false, got '" + s + "'");
  }

  std::vector<std::string> unused_keys() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : values_)
      if (!used_.count(k)) out.push_back(k);
    return out;
  }

  const std::map<std::string, std::string>& values() const { return values_; }

  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
  }

 private:
  const std::string* find(const std::string& key) const {
    used_.insert(key);
    auto it = values_.find(key);
    return it == values_.end() ? nullptr : &it->second;
  }

  std::map<std::string, std::string> values_;
  mutable std::set<std::string> used_;
};

}  // namespace flexpaint

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "fault2flow/error.hpp"
#include "fault2flow/util.hpp"

namespace fault2flow {

/// `key = value` lines, `#` comments, blank lines ignored. Later keys win.
class Config {
 public:
  Config() = default;

  static Config parse(std::string_view text) {
    Config cfg;
    std::size_t line_no = 0;
    for (auto raw : util::split_lines(text)) {
      ++line_no;
      auto hash = raw.find('#');
      auto line = util::trim(hash == std::string_view::npos ? raw : raw.substr(0, hash));
      if (line.empty()) continue;
      auto eq = line.find('=');
      if (eq == std::string_view::npos) {
        throw Error(ErrorKind::ConfigError, "line " + std::to_string(line_no) + ": expected 'key = value'");
      }
      auto key = util::trim(line.substr(0, eq));
      if (key.empty()) throw Error(ErrorKind::ConfigError, "line " + std::to_string(line_no) + ": empty key");
      cfg.values_[std::string(key)] = std::string(util::trim(line.substr(eq + 1)));
    }
    return cfg;
  }

  static Config load(const std::string& path) { return parse(util::read_file(path)); }

  bool contains(const std::string& key) const { return values_.contains(key); }

  std::string get(const std::string& key, std::string fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  double get_number(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    auto v = util::parse_number(it->second);
    if (!v) throw Error(ErrorKind::ConfigError, "'" + key + "' is not a number: '" + it->second + "'");
    return *v;
  }

  std::uint64_t get_count(const std::string& key, std::uint64_t fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    const std::string& text = it->second;
    std::uint64_t out = 0;
    bool ok = !text.empty();
    for (char c : text) {
      if (c < '0' || c > '9') {
        ok = false;
        break;
      }
      out = out * 10 + static_cast<std::uint64_t>(c - '0');
    }
    if (!ok) throw Error(ErrorKind::ConfigError, "'" + key + "' is not a non-negative integer: '" + text + "'");
    return out;
  }

  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace fault2flow

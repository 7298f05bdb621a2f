#pragma once

#include <cstdint>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "snaplab/io.hpp"

namespace snap {

// Plain-text key/value config with [section] headers, the format all
// experiment files use. '#' and ';' start comments, 'key = value' pairs,
// keys before the first header live in the unnamed section "". On duplicate
// keys the last assignment wins.
class IniConfig {
 public:
  static IniConfig parse(const std::string& text, const std::string& origin = "<string>") {
    IniConfig cfg;
    cfg.origin_ = origin;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      auto cut = line.find_first_of("#;");
      if (cut != std::string::npos) line = line.substr(0, cut);
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']')
          throw std::invalid_argument(origin + ":" + std::to_string(lineno) +
                                      ": unterminated section header");
        section = trim(line.substr(1, line.size() - 2));
        cfg.sections_[section];  // an empty section is still a section
        continue;
      }
      auto eq = line.find('=');
      if (eq == std::string::npos)
        throw std::invalid_argument(origin + ":" + std::to_string(lineno) +
                                    ": expected 'key = value'");
      std::string key = trim(line.substr(0, eq));
      std::string value = trim(line.substr(eq + 1));
      if (key.empty())
        throw std::invalid_argument(origin + ":" + std::to_string(lineno) + ": empty key");
      cfg.sections_[section][key] = value;
    }
    return cfg;
  }

  static IniConfig load(const std::string& path) { return parse(read_file(path), path); }

  bool has(const std::string& section, const std::string& key) const {
    auto s = sections_.find(section);
    return s != sections_.end() && s->second.count(key) > 0;
  }

  std::string get(const std::string& section, const std::string& key) const {
    auto s = sections_.find(section);
    if (s != sections_.end()) {
      auto k = s->second.find(key);
      if (k != s->second.end()) return k->second;
    }
    throw std::invalid_argument(origin_ + ": missing key [" + section + "] " + key);
  }

  std::string get_or(const std::string& section, const std::string& key,
                     const std::string& fallback) const {
    return has(section, key) ? get(section, key) : fallback;
  }

  double get_double(const std::string& section, const std::string& key) const {
    return parse_number<double>(section, key, get(section, key));
  }
  double get_double_or(const std::string& section, const std::string& key,
                       double fallback) const {
    return has(section, key) ? get_double(section, key) : fallback;
  }

  std::int64_t get_int(const std::string& section, const std::string& key) const {
    return parse_number<std::int64_t>(section, key, get(section, key));
  }
  std::int64_t get_int_or(const std::string& section, const std::string& key,
                          std::int64_t fallback) const {
    return has(section, key) ? get_int(section, key) : fallback;
  }

  bool get_bool_or(const std::string& section, const std::string& key, bool fallback) const {
    if (!has(section, key)) return fallback;
    auto v = get(section, key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw std::invalid_argument(origin_ + ": [" + section + "] " + key +
                                " is not a boolean: " + v);
  }

  // Comma-separated unsigned list, e.g. "seeds = 1, 2, 3".
  std::vector<std::uint64_t> get_uint_list(const std::string& section,
                                           const std::string& key) const {
    std::vector<std::uint64_t> out;
    std::istringstream in(get(section, key));
    std::string tok;
    while (std::getline(in, tok, ',')) {
      tok = trim(tok);
      if (tok.empty()) continue;
      out.push_back(parse_number<std::uint64_t>(section, key, tok));
    }
    return out;
  }

  const std::map<std::string, std::map<std::string, std::string>>& sections() const {
    return sections_;
  }
  const std::string& origin() const { return origin_; }

 private:
  static std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? "" : s.substr(b, e - b + 1);
  }

  template <typename T>
  T parse_number(const std::string& section, const std::string& key,
                 const std::string& value) const {
    std::istringstream in(value);
    T out;
    in >> out;
    if (in.fail() || !in.eof())
      throw std::invalid_argument(origin_ + ": [" + section + "] " + key +
                                  " is not a number: " + value);
    return out;
  }

  std::map<std::string, std::map<std::string, std::string>> sections_;
  std::string origin_;
};

}  // namespace snap

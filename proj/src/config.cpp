// SPDX-License-Identifier: Apache-2.0
#include "dmimo/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dmimo {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) {
    return {};
  }
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split(const std::string& s, const char* separators) {
  std::vector<std::string> out;
  std::string token;
  for (char c : s) {
    if (std::string_view(separators).find(c) != std::string_view::npos) {
      if (!token.empty()) {
        out.push_back(token);
        token.clear();
      }
    } else {
      token.push_back(c);
    }
  }
  if (!token.empty()) {
    out.push_back(token);
  }
  return out;
}

Real parse_real(const std::string& text, const std::string& key) {
  char* end = nullptr;
  const Real value = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || *end != '\0') {
    throw std::invalid_argument("config: key '" + key +
                                "' is not a number: " + text);
  }
  return value;
}

}  // namespace

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("config: cannot open " + path);
  }
  return parse(in);
}

Config Config::parse(std::istream& in) {
  Config cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) {
      line.erase(hash);
    }
    const std::string trimmed = trim(line);
    if (trimmed.empty()) {
      continue;
    }
    const auto eq = trimmed.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config: line " + std::to_string(lineno) +
                                  " is not 'key = value'");
    }
    const std::string key = trim(trimmed.substr(0, eq));
    const std::string value = trim(trimmed.substr(eq + 1));
    if (key.empty()) {
      throw std::invalid_argument("config: empty key on line " +
                                  std::to_string(lineno));
    }
    cfg.values_[key] = value;
  }
  return cfg;
}

bool Config::has(const std::string& key) const {
  return values_.count(key) != 0;
}

std::string Config::get_string(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) {
    throw std::invalid_argument("config: missing key '" + key + "'");
  }
  return it->second;
}

std::string Config::get_string(const std::string& key,
                               const std::string& fallback) const {
  return has(key) ? get_string(key) : fallback;
}

Real Config::get_real(const std::string& key) const {
  return parse_real(get_string(key), key);
}

Real Config::get_real(const std::string& key, Real fallback) const {
  return has(key) ? get_real(key) : fallback;
}

int Config::get_int(const std::string& key) const {
  const Real value = get_real(key);
  const int rounded = static_cast<int>(value);
  if (static_cast<Real>(rounded) != value) {
    throw std::invalid_argument("config: key '" + key + "' must be an integer");
  }
  return rounded;
}

int Config::get_int(const std::string& key, int fallback) const {
  return has(key) ? get_int(key) : fallback;
}

std::uint64_t Config::get_u64(const std::string& key,
                              std::uint64_t fallback) const {
  if (!has(key)) {
    return fallback;
  }
  const std::string text = get_string(key);
  std::uint64_t value = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw std::invalid_argument("config: key '" + key +
                                "' is not an unsigned integer: " + text);
  }
  return value;
}

std::vector<Real> Config::get_reals(const std::string& key) const {
  std::vector<Real> out;
  for (const std::string& token : split(get_string(key), " ,\t")) {
    out.push_back(parse_real(token, key));
  }
  return out;
}

std::vector<std::string> Config::get_strings(const std::string& key) const {
  return split(get_string(key), " ,\t");
}

std::vector<Vec3> Config::get_points(const std::string& key) const {
  std::vector<Vec3> out;
  for (const std::string& group : split(get_string(key), ";")) {
    std::vector<std::string> coords = split(group, " ,\t");
    if (coords.size() != 3) {
      throw std::invalid_argument("config: key '" + key +
                                  "' needs x y z per point");
    }
    out.emplace_back(parse_real(coords[0], key), parse_real(coords[1], key),
                     parse_real(coords[2], key));
  }
  return out;
}

void Config::set(const std::string& key, const std::string& value) {
  values_[key] = value;
}

}  // namespace dmimo

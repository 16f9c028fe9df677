// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "dmimo/types.hpp"

#include <istream>
#include <map>
#include <string>
#include <vector>

namespace dmimo {

/// Flat declarative key-value configuration: one `key = value` per line,
/// `#` starts a comment. Lists are whitespace- or comma-separated; points
/// are semicolon-separated coordinate triples.
class Config {
 public:
  static Config load(const std::string& path);
  static Config parse(std::istream& in);

  bool has(const std::string& key) const;

  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key,
                         const std::string& fallback) const;
  Real get_real(const std::string& key) const;
  Real get_real(const std::string& key, Real fallback) const;
  int get_int(const std::string& key) const;
  int get_int(const std::string& key, int fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;

  std::vector<Real> get_reals(const std::string& key) const;
  std::vector<std::string> get_strings(const std::string& key) const;
  std::vector<Vec3> get_points(const std::string& key) const;

  void set(const std::string& key, const std::string& value);

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace dmimo

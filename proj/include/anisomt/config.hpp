#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "anisomt/finsler_norm.hpp"
#include "anisomt/grid.hpp"

namespace anisomt {

// Parsed experiment config. Tables are flattened to dotted keys ("moser.eps").
// Arrays of numbers become vectors; arrays of arrays become point lists.
class Config {
 public:
  using Value = std::variant<bool, std::int64_t, double, std::string, std::vector<double>,
                             std::vector<std::vector<double>>>;

  static Config parse(const std::string& text, const std::string& source = "<string>");
  static Config load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  const std::map<std::string, Value>& values() const { return values_; }
  const std::string& text() const { return text_; }

  double number(const std::string& key) const;
  double number(const std::string& key, double fallback) const;
  std::int64_t integer(const std::string& key, std::int64_t fallback) const;
  bool flag(const std::string& key, bool fallback) const;
  std::string string(const std::string& key, const std::string& fallback) const;
  std::vector<double> numbers(const std::string& key, const std::vector<double>& fallback = {}) const;
  std::vector<std::vector<double>> points(const std::string& key) const;

  // Override or add a value (used for --seed).
  void set(const std::string& key, Value v) { values_[key] = std::move(v); }

  // Normalized echo: one "key = value" line per entry, sorted by key.
  std::string echo() const;

 private:
  std::map<std::string, Value> values_;
  std::string text_;
  std::string source_;
};

// Builders; all throw Error(config_error) on bad or missing input.
FinslerNorm norm_from(const Config& c);
Domain domain_from(const Config& c, int dim);
double mesh_spacing(const Config& c, double fallback = 1.0 / 64);
std::uint64_t seed_from(const Config& c);
Vec point_from(const Config& c, const std::string& key, int dim);

// Version string of the TOML parser backend.
std::string config_backend_version();

// Ladders must be strictly monotone (either direction).
std::vector<double> ladder_from(const Config& c, const std::string& key, const std::vector<double>& fallback);

}  // namespace anisomt

#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace scanalr {

/// `key = value` settings file. Blank lines and `#` comments are ignored.
/// Every key must be consumed by a getter; check_consumed() reports leftovers.
class Config {
 public:
  Config() = default;
  static Config load(const std::filesystem::path& path);
  static Config parse(const std::string& text, std::string origin = "config");

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }

  /// Getters throw InputError naming the key when a required key is
  /// missing or a value does not parse.
  std::string text(const std::string& key) const;
  std::string text(const std::string& key, const std::string& fallback) const;
  double number(const std::string& key) const;
  double number(const std::string& key, double fallback) const;
  std::size_t count(const std::string& key, std::size_t fallback) const;
  std::vector<double> numbers(const std::string& key, std::vector<double> fallback) const;
  std::optional<double> maybe_number(const std::string& key) const;
  bool flag(const std::string& key, bool fallback) const;

  void check_consumed() const;
  const std::string& origin() const noexcept { return origin_; }
  const std::map<std::string, std::string>& values() const noexcept { return values_; }

 private:
  const std::string* find(const std::string& key) const;
  [[noreturn]] void bad_value(const std::string& key, const std::string& what) const;

  std::map<std::string, std::string> values_;
  mutable std::set<std::string> used_;
  std::string origin_ = "config";
};

}  // namespace scanalr

#include "scanalr/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "scanalr/error.hpp"

namespace scanalr {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& s, double& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return !s.empty() && ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

}  // namespace

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path.string());
}

Config Config::parse(const std::string& text, std::string origin) {
  Config cfg;
  cfg.origin_ = std::move(origin);
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InputError(cfg.origin_ + ":" + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw InputError(cfg.origin_ + ":" + std::to_string(lineno) + ": empty key");
    if (cfg.values_.count(key)) throw InputError(cfg.origin_ + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
    cfg.values_[key] = trim(line.substr(eq + 1));
  }
  return cfg;
}

const std::string* Config::find(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return nullptr;
  used_.insert(key);
  return &it->second;
}

void Config::bad_value(const std::string& key, const std::string& what) const {
  throw InputError(origin_ + ": key '" + key + "': " + what);
}

std::string Config::text(const std::string& key) const {
  const auto* v = find(key);
  if (!v) throw InputError(origin_ + ": missing required key '" + key + "'");
  return *v;
}

std::string Config::text(const std::string& key, const std::string& fallback) const {
  const auto* v = find(key);
  return v ? *v : fallback;
}

double Config::number(const std::string& key) const {
  const std::string v = text(key);
  double out = 0.0;
  if (!parse_double(v, out)) bad_value(key, "not a number: '" + v + "'");
  return out;
}

double Config::number(const std::string& key, double fallback) const {
  return has(key) ? number(key) : fallback;
}

std::optional<double> Config::maybe_number(const std::string& key) const {
  if (!has(key)) return std::nullopt;
  return number(key);
}

std::size_t Config::count(const std::string& key, std::size_t fallback) const {
  const auto* v = find(key);
  if (!v) return fallback;
  std::size_t out = 0;
  auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (v->empty() || ec != std::errc() || ptr != v->data() + v->size()) bad_value(key, "not a count: '" + *v + "'");
  return out;
}

std::vector<double> Config::numbers(const std::string& key, std::vector<double> fallback) const {
  const auto* v = find(key);
  if (!v) return fallback;
  std::vector<double> out;
  std::stringstream ss(*v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    double x = 0.0;
    item = trim(item);
    if (!parse_double(item, x)) bad_value(key, "not a number list: '" + *v + "'");
    out.push_back(x);
  }
  if (out.empty()) bad_value(key, "empty list");
  return out;
}

bool Config::flag(const std::string& key, bool fallback) const {
  const auto* v = find(key);
  if (!v) return fallback;
  if (*v == "1" || *v == "true" || *v == "on" || *v == "yes") return true;
  if (*v == "0" || *v == "false" || *v == "off" || *v == "no") return false;
  bad_value(key, "expected a boolean, got '" + *v + "'");
}

void Config::check_consumed() const {
  for (const auto& [key, value] : values_)
    if (!used_.count(key)) throw InputError(origin_ + ": unknown key '" + key + "'");
}

}  // namespace scanalr

#include "stacknet/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "stacknet/errors.hpp"

namespace stacknet {
namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(const std::string& text, const std::string& source) {
  KeyValueConfig cfg;
  cfg.source_ = source;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = source + ":" + std::to_string(line_no);
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + ": empty key");
    if (!cfg.values_.emplace(key, value).second)
      throw ConfigError(where + ": key '" + key + "' given more than once");
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path.string());
}

std::optional<std::string> KeyValueConfig::take_string(const std::string& key) {
  taken_.insert(key);
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string KeyValueConfig::require_string(const std::string& key) {
  auto v = take_string(key);
  if (!v || v->empty()) throw ConfigError(source_ + ": missing required key '" + key + "'");
  return *v;
}

std::optional<double> KeyValueConfig::take_double(const std::string& key) {
  const auto raw = take_string(key);
  if (!raw) return std::nullopt;
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(*raw, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != raw->size() || !std::isfinite(v))
    throw ConfigError(source_ + ": key '" + key + "' expects a number, got '" + *raw + "'");
  return v;
}

std::optional<std::uint64_t> KeyValueConfig::take_uint(const std::string& key) {
  const auto raw = take_string(key);
  if (!raw) return std::nullopt;
  std::uint64_t v = 0;
  const auto* end = raw->data() + raw->size();
  const auto [ptr, ec] = std::from_chars(raw->data(), end, v);
  if (raw->empty() || ec != std::errc() || ptr != end)
    throw ConfigError(source_ + ": key '" + key + "' expects a non-negative integer, got '" + *raw +
                      "'");
  return v;
}

std::optional<bool> KeyValueConfig::take_bool(const std::string& key) {
  const auto raw = take_string(key);
  if (!raw) return std::nullopt;
  if (*raw == "true" || *raw == "1" || *raw == "yes") return true;
  if (*raw == "false" || *raw == "0" || *raw == "no") return false;
  throw ConfigError(source_ + ": key '" + key + "' expects true/false, got '" + *raw + "'");
}

void KeyValueConfig::finish() const {
  std::string unknown;
  for (const auto& [key, value] : values_)
    if (!taken_.count(key)) unknown += (unknown.empty() ? "" : ", ") + ("'" + key + "'");
  if (!unknown.empty()) throw ConfigError(source_ + ": unknown key(s) " + unknown);
}

}  // namespace stacknet

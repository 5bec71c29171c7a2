#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <type_traits>

namespace stacknet {

/// Flat `key = value` document. '#' starts a comment, blank lines are
/// ignored, and a repeated key is an error.
///
/// Values are read through typed `take_*` accessors; `finish()` then rejects
/// any key that no accessor asked for, so typos surface as errors.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(const std::string& text, const std::string& source = "<string>");
  static KeyValueConfig load(const std::filesystem::path& path);

  std::optional<std::string> take_string(const std::string& key);
  std::optional<double> take_double(const std::string& key);
  std::optional<std::uint64_t> take_uint(const std::string& key);
  std::optional<bool> take_bool(const std::string& key);

  std::string require_string(const std::string& key);

  template <typename T>
  void take_into(const std::string& key, T& dst);

  /// Throws ConfigError listing every key that was never taken.
  void finish() const;

  const std::string& source() const { return source_; }
  bool contains(const std::string& key) const { return values_.count(key) != 0; }

 private:
  std::string source_;
  std::map<std::string, std::string> values_;
  std::set<std::string> taken_;
};

template <typename T>
void KeyValueConfig::take_into(const std::string& key, T& dst) {
  if constexpr (std::is_same_v<T, bool>) {
    if (auto v = take_bool(key)) dst = *v;
  } else if constexpr (std::is_floating_point_v<T>) {
    if (auto v = take_double(key)) dst = static_cast<T>(*v);
  } else if constexpr (std::is_integral_v<T>) {
    if (auto v = take_uint(key)) dst = static_cast<T>(*v);
  } else {
    if (auto v = take_string(key)) dst = T(*v);
  }
}

}  // namespace stacknet

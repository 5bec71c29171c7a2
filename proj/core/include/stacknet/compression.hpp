#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace stacknet {

/// Surjection from senone ids [0, S) onto monophone ids [0, M).
class SenoneMap {
 public:
  SenoneMap() = default;
  /// M is 1 + the largest entry. Throws InputError if the mapping is empty or
  /// some monophone in [0, M) has no senone.
  explicit SenoneMap(std::vector<std::uint32_t> mapping);

  static SenoneMap identity(std::size_t n);

  std::size_t num_senones() const { return mapping_.size(); }
  std::size_t num_monophones() const { return num_monophones_; }
  std::uint32_t monophone_of(std::size_t senone) const { return mapping_.at(senone); }
  const std::vector<std::uint32_t>& mapping() const { return mapping_; }

  friend bool operator==(const SenoneMap&, const SenoneMap&) = default;

 private:
  std::vector<std::uint32_t> mapping_;
  std::size_t num_monophones_ = 0;
};

/// Sums posterior mass per monophone, visiting senones in ascending order.
/// Throws ShapeError if posterior.size() != S.
std::vector<double> compress(std::span<const double> posterior, const SenoneMap& map);
/// Writes into `out` (resized to M).
void compress_into(std::span<const double> posterior, const SenoneMap& map, std::vector<double>& out);

/// Indicator vector of the monophone owning `label`. Throws InputError if
/// label >= S.
std::vector<double> one_hot_compress(std::size_t label, const SenoneMap& map);

/// Two-column text file, one "senone_id monophone_id" line per senone, any
/// order. Distinct ParseError kinds for missing senones, duplicates, and
/// unused monophone ids.
SenoneMap load_map(const std::filesystem::path& path);
void save_map(const SenoneMap& map, const std::filesystem::path& path);

}  // namespace stacknet

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

#include "stacknet/compression.hpp"
#include "stacknet/nn.hpp"
#include "stacknet/rdsn.hpp"

namespace stacknet {

/// Serialized model. A plain baseline network has k = 0; a recurrent/bipass
/// network has k >= 1 and always carries its senone map.
///
/// Layout ("STKCKPT1", little-endian):
///   magic[8], u32 version, u32 layer count,
///   per layer: u32 rows, u32 cols, u8 activation, f64 dropout,
///              rows*cols f64 weights (row-major), rows f64 biases,
///   u32 k, u32 M, u32 S,
///   S u32 monophone ids when M > 0 (the embedded senone map).
struct Checkpoint {
  static constexpr std::uint32_t kVersion = 1;

  Mlp net;
  std::uint32_t k = 0;
  std::optional<SenoneMap> senone_map;

  static Checkpoint from_baseline(const Mlp& net, std::optional<SenoneMap> map = std::nullopt);
  static Checkpoint from_rdsn(const RdsnModel& model);

  bool is_recurrent() const { return k > 0; }
  /// Throws ShapeError for a baseline checkpoint.
  RdsnModel to_rdsn() const;

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace stacknet

#pragma once

#include <array>
#include <cstdint>

namespace stacknet {

/// Philox4x32-10 block function (Salmon et al., Random123). Maps a 128-bit
/// counter and a 64-bit key to 128 pseudo-random bits.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Named substreams. Each consumer of randomness draws from its own stream so
/// adding draws in one place never shifts the sequence seen by another.
enum class Stream : std::uint64_t {
  kInit = 1,
  kDropout = 2,
  kOrder = 3,
  kData = 4,
};

/// Counter-based, splittable generator built on Philox4x32-10.
///
/// A generator is a (key, counter) pair. `split(id)` derives a child with a
/// fresh key and a zero counter; children with distinct ids are independent
/// and the parent is not advanced. All derived values (uniforms, normals,
/// integers) are computed with portable integer arithmetic plus std::log /
/// std::sqrt / std::cos for normals.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : key_(seed) {}

  Rng split(std::uint64_t id) const;
  Rng stream(Stream s) const { return split(static_cast<std::uint64_t>(s)); }

  std::uint64_t next_u64();
  /// Uniform in [0, 1) with 53 bits of precision.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n); n must be positive. Rejection sampling, no bias.
  std::uint64_t below(std::uint64_t n);
  /// Standard normal via Box-Muller (one draw per call, no cached pair).
  double normal();
  bool bernoulli(double p) { return uniform() < p; }

  std::uint64_t key() const { return key_; }
  std::uint64_t blocks_consumed() const { return counter_; }

 private:
  Rng(std::uint64_t key, std::uint64_t counter) : key_(key), counter_(counter) {}

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int buffered_ = 0;
};

}  // namespace stacknet

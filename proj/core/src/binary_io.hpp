#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "stacknet/errors.hpp"

namespace stacknet::io {

static_assert(std::endian::native == std::endian::little,
              "on-disk formats are little-endian; add byte swapping for this target");

inline void write_u8(std::ostream& out, std::uint8_t v) {
  out.put(static_cast<char>(v));
}

inline void write_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

inline void write_f64(std::ostream& out, double v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

inline void write_f64s(std::ostream& out, const double* v, std::size_t n) {
  out.write(reinterpret_cast<const char*>(v), static_cast<std::streamsize>(n * sizeof(double)));
}

/// Reader that turns short reads into ParseError::kTruncated with context.
class Reader {
 public:
  Reader(std::istream& in, std::string source, std::uint64_t size)
      : in_(in), source_(std::move(source)), remaining_(size) {}

  /// Throws kTruncated unless at least n more bytes are available.
  void require(std::uint64_t n, const std::string& what) const {
    if (n > remaining_)
      throw ParseError(ParseError::Kind::kTruncated,
                       source_ + ": truncated while reading " + what);
  }

  void bytes(void* dst, std::size_t n, const std::string& what) {
    require(n, what);
    in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n)
      throw ParseError(ParseError::Kind::kTruncated,
                       source_ + ": truncated while reading " + what);
    remaining_ -= n;
  }
  std::uint8_t u8(const std::string& what) {
    std::uint8_t v;
    bytes(&v, 1, what);
    return v;
  }
  std::uint32_t u32(const std::string& what) {
    std::uint32_t v;
    bytes(&v, sizeof v, what);
    return v;
  }
  double f64(const std::string& what) {
    double v;
    bytes(&v, sizeof v, what);
    return v;
  }
  bool at_end() const { return remaining_ == 0; }
  const std::string& source() const { return source_; }

 private:
  std::istream& in_;
  std::string source_;
  std::uint64_t remaining_;
};

}  // namespace stacknet::io

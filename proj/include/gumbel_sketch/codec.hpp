#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "gumbel_sketch/sketch.hpp"

// Binary sketch files. Layout (all integers little-endian):
//
//   offset  size  field
//   0       4     magic "GMBL"
//   4       1     format version (1)
//   5       1     variant (0 full-replication, 1 stochastic-averaging, 2 discretized-sa)
//   6       4     k
//   10      8     seed
//   18      1     register encoding (0 = f64, 1 = i8)
//   19      k*w   registers in index order
//   19+k*w  4     CRC-32C of every preceding byte
//
// See FORMAT.md for the hash construction the registers depend on.
namespace gumbel_sketch::codec {

inline constexpr std::uint8_t kMagic[4] = {'G', 'M', 'B', 'L'};
inline constexpr std::uint8_t kFormatVersion = 1;
inline constexpr std::size_t kHeaderSize = 19;
inline constexpr std::size_t kChecksumSize = 4;

enum class RegisterEncoding : std::uint8_t { F64 = 0, I8 = 1 };

enum class FormatErrorKind {
  BadMagic,
  UnsupportedVersion,
  LengthMismatch,
  ChecksumMismatch,
  InvalidHeader,
  InvalidRegister,
};

class FormatError : public std::runtime_error {
 public:
  FormatError(FormatErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  FormatErrorKind kind() const { return kind_; }

 private:
  FormatErrorKind kind_;
};

std::uint32_t crc32c(std::span<const std::uint8_t> bytes);

std::size_t serialized_size(const SketchConfig& config);

std::vector<std::uint8_t> serialize(const Sketch& sketch);

// Throws FormatError.
Sketch deserialize(std::span<const std::uint8_t> bytes);

}  // namespace gumbel_sketch::codec

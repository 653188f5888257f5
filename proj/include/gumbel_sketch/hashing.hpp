#pragma once

#include <compare>
#include <cstdint>
#include <string_view>

// All randomness consumed by the sketches. Every function here is a pure
// function of its arguments; the exact construction is part of the sketch
// file format (see FORMAT.md), so changing anything here is a format break.
namespace gumbel_sketch {

struct HashSeed {
  std::uint64_t value = 0;

  constexpr HashSeed() = default;
  constexpr explicit HashSeed(std::uint64_t v) : value(v) {}
  friend constexpr auto operator<=>(HashSeed, HashSeed) = default;
};

// Items are opaque byte strings.
using Item = std::string_view;

namespace hashing {

// Domain tags that separate the four independent hash families.
inline constexpr std::uint64_t kLaneDomain = 0x6c616e652d766c75ULL;    // "lane-vlu"
inline constexpr std::uint64_t kBucketDomain = 0x6275636b65742d69ULL;  // "bucket-i"
inline constexpr std::uint64_t kInitDomain = 0x696e69742d756e69ULL;    // "init-uni"
inline constexpr std::uint64_t kShiftDomain = 0x73686966742d6369ULL;   // "shift-ci"

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

// SplitMix64 finalizer (a bijection on 64-bit words).
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// MurmurHash64A over the item bytes, reading 8-byte blocks little-endian.
std::uint64_t murmur64a(std::string_view bytes, std::uint64_t seed);

// Key for element `index` of hash family `domain`.
constexpr std::uint64_t family_key(HashSeed seed, std::uint64_t domain, std::uint64_t index) {
  return mix64(mix64(seed.value ^ domain) + kGolden * (index + 1));
}

// Top 53 bits scaled by 2^-53, with 0 mapped to 2^-54: strictly inside (0, 1).
constexpr double to_open_unit(std::uint64_t h) {
  const std::uint64_t top = h >> 11;
  return top == 0 ? 0x1p-54 : static_cast<double>(top) * 0x1p-53;
}

// Top 53 bits scaled by 2^-53: in [0, 1).
constexpr double to_half_open_unit(std::uint64_t h) { return static_cast<double>(h >> 11) * 0x1p-53; }

__extension__ using uint128 = unsigned __int128;

// floor(h * k / 2^64).
constexpr std::uint32_t reduce_range(std::uint64_t h, std::uint32_t k) {
  return static_cast<std::uint32_t>((static_cast<uint128>(h) * k) >> 64);
}

// Seeded digest of an item. Lanes and bucket choice are derived from it.
inline std::uint64_t item_digest(Item item, HashSeed seed) { return murmur64a(item, seed.value); }

constexpr double digest_to_unit(std::uint64_t digest, std::uint64_t lane_key) {
  return to_open_unit(mix64(digest ^ lane_key));
}

constexpr std::uint32_t digest_to_bucket(std::uint64_t digest, std::uint32_t k, HashSeed seed) {
  return reduce_range(mix64(digest ^ family_key(seed, kBucketDomain, 0)), k);
}

}  // namespace hashing

// Lane `lane` of the family of independent unit-interval hashes. Lane 0 is the
// value hash used by the stochastic-averaging sketches.
double hash_to_unit(Item item, HashSeed seed, std::uint64_t lane);

// Bucket in [0, k). Requires k >= 1.
std::uint32_t bucket_of(Item item, std::uint32_t k, HashSeed seed);

// Deterministic initial uniform of bucket i, in (0, 1).
double bucket_init_uniform(std::uint32_t i, HashSeed seed);

// Deterministic rounding shift c_i of bucket i, in [0, 1).
double bucket_shift(std::uint32_t i, HashSeed seed);

}  // namespace gumbel_sketch

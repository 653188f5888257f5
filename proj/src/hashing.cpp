#include "gumbel_sketch/hashing.hpp"

#include <stdexcept>

namespace gumbel_sketch {

namespace hashing {

namespace {

std::uint64_t load_le64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

}  // namespace

std::uint64_t murmur64a(std::string_view bytes, std::uint64_t seed) {
  constexpr std::uint64_t m = 0xc6a4a7935bd1e995ULL;
  constexpr int r = 47;

  const auto* data = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::size_t len = bytes.size();
  std::uint64_t h = seed ^ (static_cast<std::uint64_t>(len) * m);

  const std::size_t blocks = len / 8;
  for (std::size_t b = 0; b < blocks; ++b) {
    std::uint64_t k = load_le64(data + 8 * b);
    k *= m;
    k ^= k >> r;
    k *= m;
    h ^= k;
    h *= m;
  }

  const unsigned char* tail = data + 8 * blocks;
  switch (len & 7) {
    case 7: h ^= static_cast<std::uint64_t>(tail[6]) << 48; [[fallthrough]];
    case 6: h ^= static_cast<std::uint64_t>(tail[5]) << 40; [[fallthrough]];
    case 5: h ^= static_cast<std::uint64_t>(tail[4]) << 32; [[fallthrough]];
    case 4: h ^= static_cast<std::uint64_t>(tail[3]) << 24; [[fallthrough]];
    case 3: h ^= static_cast<std::uint64_t>(tail[2]) << 16; [[fallthrough]];
    case 2: h ^= static_cast<std::uint64_t>(tail[1]) << 8; [[fallthrough]];
    case 1:
      h ^= static_cast<std::uint64_t>(tail[0]);
      h *= m;
  }

  h ^= h >> r;
  h *= m;
  h ^= h >> r;
  return h;
}

}  // namespace hashing

double hash_to_unit(Item item, HashSeed seed, std::uint64_t lane) {
  return hashing::digest_to_unit(hashing::item_digest(item, seed),
                                 hashing::family_key(seed, hashing::kLaneDomain, lane));
}

std::uint32_t bucket_of(Item item, std::uint32_t k, HashSeed seed) {
  if (k == 0) throw std::invalid_argument("bucket_of: k must be positive");
  return hashing::digest_to_bucket(hashing::item_digest(item, seed), k, seed);
}

double bucket_init_uniform(std::uint32_t i, HashSeed seed) {
  return hashing::to_open_unit(hashing::family_key(seed, hashing::kInitDomain, i));
}

double bucket_shift(std::uint32_t i, HashSeed seed) {
  return hashing::to_half_open_unit(hashing::family_key(seed, hashing::kShiftDomain, i));
}

}  // namespace gumbel_sketch

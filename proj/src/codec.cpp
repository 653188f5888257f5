#include "gumbel_sketch/codec.hpp"

#include <bit>
#include <boost/crc.hpp>
#include <cmath>
#include <cstring>
#include <string>

namespace gumbel_sketch::codec {

namespace {

using Crc32c = boost::crc_optimal<32, 0x1EDC6F41, 0xFFFFFFFF, 0xFFFFFFFF, true, true>;

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
}

template <typename T>
T get_le(const std::uint8_t* p) {
  T v = 0;
  for (std::size_t i = sizeof(T); i-- > 0;) v = static_cast<T>((v << 8) | p[i]);
  return v;
}

RegisterEncoding encoding_for(Variant v) {
  return v == Variant::DiscretizedSA ? RegisterEncoding::I8 : RegisterEncoding::F64;
}

std::size_t register_width(RegisterEncoding e) { return e == RegisterEncoding::I8 ? 1 : 8; }

}  // namespace

std::uint32_t crc32c(std::span<const std::uint8_t> bytes) {
  Crc32c crc;
  crc.process_bytes(bytes.data(), bytes.size());
  return crc.checksum();
}

std::size_t serialized_size(const SketchConfig& config) {
  return kHeaderSize + std::size_t{config.k} * register_width(encoding_for(config.variant)) + kChecksumSize;
}

std::vector<std::uint8_t> serialize(const Sketch& sketch) {
  const SketchConfig& cfg = config_of(sketch);
  std::vector<std::uint8_t> out;
  out.reserve(serialized_size(cfg));
  for (std::uint8_t b : kMagic) out.push_back(b);
  out.push_back(kFormatVersion);
  out.push_back(static_cast<std::uint8_t>(cfg.variant));
  put_le<std::uint32_t>(out, cfg.k);
  put_le<std::uint64_t>(out, cfg.seed.value);
  out.push_back(static_cast<std::uint8_t>(encoding_for(cfg.variant)));

  if (const auto* d = std::get_if<DiscreteSketch>(&sketch)) {
    for (std::int8_t r : d->registers()) out.push_back(static_cast<std::uint8_t>(r));
  } else {
    for (double r : std::get<ContinuousSketch>(sketch).registers()) {
      put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(r));
    }
  }
  put_le<std::uint32_t>(out, crc32c(out));
  return out;
}

Sketch deserialize(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw FormatError(FormatErrorKind::BadMagic, "bad magic: not a sketch file");
  }
  if (bytes.size() < 5 || bytes[4] != kFormatVersion) {
    throw FormatError(FormatErrorKind::UnsupportedVersion,
                      bytes.size() < 5 ? std::string("unsupported version: header truncated")
                                       : "unsupported version " + std::to_string(bytes[4]));
  }
  if (bytes.size() < kHeaderSize + kChecksumSize) {
    throw FormatError(FormatErrorKind::LengthMismatch,
                      "length mismatch: " + std::to_string(bytes.size()) + " bytes is shorter than the header");
  }

  const std::uint8_t raw_variant = bytes[5];
  if (raw_variant > static_cast<std::uint8_t>(Variant::DiscretizedSA)) {
    throw FormatError(FormatErrorKind::InvalidHeader, "invalid header: unknown variant " + std::to_string(raw_variant));
  }
  SketchConfig cfg;
  cfg.variant = static_cast<Variant>(raw_variant);
  cfg.k = get_le<std::uint32_t>(bytes.data() + 6);
  cfg.seed = HashSeed{get_le<std::uint64_t>(bytes.data() + 10)};
  const std::uint8_t raw_encoding = bytes[18];
  if (cfg.k == 0) throw FormatError(FormatErrorKind::InvalidHeader, "invalid header: k = 0");
  if (raw_encoding != static_cast<std::uint8_t>(encoding_for(cfg.variant))) {
    throw FormatError(FormatErrorKind::InvalidHeader,
                      "invalid header: register encoding " + std::to_string(raw_encoding) + " does not match variant");
  }

  const std::size_t expected = serialized_size(cfg);
  if (bytes.size() != expected) {
    throw FormatError(FormatErrorKind::LengthMismatch, "length mismatch: expected " + std::to_string(expected) +
                                                           " bytes, got " + std::to_string(bytes.size()));
  }
  const std::size_t body = expected - kChecksumSize;
  const std::uint32_t stored = get_le<std::uint32_t>(bytes.data() + body);
  if (stored != crc32c(bytes.first(body))) {
    throw FormatError(FormatErrorKind::ChecksumMismatch, "checksum mismatch: file is corrupted");
  }

  const std::uint8_t* payload = bytes.data() + kHeaderSize;
  try {
    if (cfg.variant == Variant::DiscretizedSA) {
      std::vector<std::int8_t> regs(cfg.k);
      for (std::uint32_t i = 0; i < cfg.k; ++i) regs[i] = static_cast<std::int8_t>(payload[i]);
      return DiscreteSketch::from_registers(cfg, std::move(regs));
    }
    std::vector<double> regs(cfg.k);
    for (std::uint32_t i = 0; i < cfg.k; ++i) {
      regs[i] = std::bit_cast<double>(get_le<std::uint64_t>(payload + 8 * std::size_t{i}));
    }
    return ContinuousSketch::from_registers(cfg, std::move(regs));
  } catch (const std::invalid_argument& e) {
    throw FormatError(FormatErrorKind::InvalidRegister, std::string("invalid register: ") + e.what());
  }
}

}  // namespace gumbel_sketch::codec

#include "gumbel_sketch/sketch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "gumbel_sketch/gumbel.hpp"

namespace gumbel_sketch {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_k(const SketchConfig& config) {
  if (config.k == 0) throw std::invalid_argument("sketch config: k must be at least 1");
}

void check_compatible(const SketchConfig& a, const SketchConfig& b) {
  if (!(a == b)) {
    throw IncompatibleConfigError("incompatible config: sketches differ in variant, k or seed (" +
                                  std::string(to_string(a.variant)) + "/" + std::to_string(a.k) + "/" +
                                  std::to_string(a.seed.value) + " vs " + std::string(to_string(b.variant)) +
                                  "/" + std::to_string(b.k) + "/" + std::to_string(b.seed.value) + ")");
  }
}

double init_register(std::uint32_t i, HashSeed seed) {
  return gumbel::sample_from_uniform(bucket_init_uniform(i, seed), 0.0);
}

}  // namespace

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::FullReplication: return "full-replication";
    case Variant::StochasticAveraging: return "stochastic-averaging";
    case Variant::DiscretizedSA: return "discretized-sa";
  }
  return "unknown";
}

std::string_view to_string(Estimator e) { return e == Estimator::Geometric ? "geometric" : "harmonic"; }

Variant parse_variant(std::string_view name) {
  if (name == "full-replication" || name == "full") return Variant::FullReplication;
  if (name == "stochastic-averaging" || name == "sa") return Variant::StochasticAveraging;
  if (name == "discretized-sa" || name == "discrete") return Variant::DiscretizedSA;
  throw std::invalid_argument("unknown variant '" + std::string(name) + "'");
}

Estimator parse_estimator(std::string_view name) {
  if (name == "geometric") return Estimator::Geometric;
  if (name == "harmonic") return Estimator::Harmonic;
  throw std::invalid_argument("unknown estimator '" + std::string(name) + "'");
}

double analytic_register_offset() { return std::log(std::numbers::e - 1.0); }

DiscreteHarmonic DiscreteHarmonic::calibrated(double offset) { return {Mode::RegisterOffset, offset}; }
DiscreteHarmonic DiscreteHarmonic::calibrated() { return calibrated(analytic_register_offset()); }

double shift_round(double x, double c) { return std::floor(x + c) - c; }

// ContinuousSketch -----------------------------------------------------------

ContinuousSketch::ContinuousSketch(const SketchConfig& config, std::vector<double> registers)
    : config_(config), registers_(std::move(registers)) {
  check_k(config_);
  if (config_.variant == Variant::DiscretizedSA) {
    throw std::invalid_argument("ContinuousSketch: variant must be full-replication or stochastic-averaging");
  }
  if (registers_.size() != config_.k) throw std::invalid_argument("ContinuousSketch: register count != k");
  if (config_.variant == Variant::FullReplication) {
    lane_keys_.resize(config_.k);
    for (std::uint32_t i = 0; i < config_.k; ++i) {
      lane_keys_[i] = hashing::family_key(config_.seed, hashing::kLaneDomain, i);
    }
  }
  bucket_key_ = hashing::family_key(config_.seed, hashing::kBucketDomain, 0);
  value_key_ = hashing::family_key(config_.seed, hashing::kLaneDomain, 0);
}

ContinuousSketch::ContinuousSketch(const SketchConfig& config)
    : ContinuousSketch(config, std::vector<double>(config.k, kNegInf)) {
  if (config_.variant == Variant::StochasticAveraging) {
    for (std::uint32_t i = 0; i < config_.k; ++i) registers_[i] = init_register(i, config_.seed);
  }
}

ContinuousSketch ContinuousSketch::from_registers(const SketchConfig& config, std::vector<double> registers) {
  for (double r : registers) {
    if (std::isnan(r) || r == std::numeric_limits<double>::infinity()) {
      throw std::invalid_argument("ContinuousSketch: registers must be finite or -inf");
    }
    if (config.variant == Variant::StochasticAveraging && !std::isfinite(r)) {
      throw std::invalid_argument("ContinuousSketch: stochastic-averaging registers must be finite");
    }
  }
  return ContinuousSketch(config, std::move(registers));
}

void ContinuousSketch::update(Item item) { update_digest(hashing::item_digest(item, config_.seed)); }

void ContinuousSketch::update_digest(std::uint64_t digest) {
  if (config_.variant == Variant::FullReplication) {
    for (std::uint32_t i = 0; i < config_.k; ++i) {
      const double v = gumbel::sample_from_uniform(hashing::digest_to_unit(digest, lane_keys_[i]), 0.0);
      registers_[i] = std::max(registers_[i], v);
    }
    return;
  }
  const std::uint32_t b = hashing::reduce_range(hashing::mix64(digest ^ bucket_key_), config_.k);
  const double v = gumbel::sample_from_uniform(hashing::digest_to_unit(digest, value_key_), 0.0);
  registers_[b] = std::max(registers_[b], v);
}

void ContinuousSketch::merge(const ContinuousSketch& other) {
  check_compatible(config_, other.config_);
  for (std::size_t i = 0; i < registers_.size(); ++i) {
    registers_[i] = std::max(registers_[i], other.registers_[i]);
  }
}

bool ContinuousSketch::has_empty_register() const {
  return std::any_of(registers_.begin(), registers_.end(), [](double r) { return r == kNegInf; });
}

// DiscreteSketch -------------------------------------------------------------

DiscreteSketch::DiscreteSketch(const SketchConfig& config, std::vector<std::int8_t> registers)
    : config_(config), registers_(std::move(registers)) {
  check_k(config_);
  if (config_.variant != Variant::DiscretizedSA) {
    throw std::invalid_argument("DiscreteSketch: variant must be discretized-sa");
  }
  if (registers_.size() != config_.k) throw std::invalid_argument("DiscreteSketch: register count != k");
  shifts_.resize(config_.k);
  for (std::uint32_t i = 0; i < config_.k; ++i) shifts_[i] = bucket_shift(i, config_.seed);
  bucket_key_ = hashing::family_key(config_.seed, hashing::kBucketDomain, 0);
  value_key_ = hashing::family_key(config_.seed, hashing::kLaneDomain, 0);
}

DiscreteSketch::DiscreteSketch(const SketchConfig& config)
    : DiscreteSketch(config, std::vector<std::int8_t>(config.k, kDiscreteMin)) {
  for (std::uint32_t i = 0; i < config_.k; ++i) registers_[i] = encode(i, init_register(i, config_.seed));
}

DiscreteSketch DiscreteSketch::from_registers(const SketchConfig& config, std::vector<std::int8_t> registers) {
  for (auto r : registers) {
    if (r < kDiscreteMin || r > kDiscreteMax) {
      throw std::invalid_argument("DiscreteSketch: register outside [-32, 95]");
    }
  }
  return DiscreteSketch(config, std::move(registers));
}

std::int8_t DiscreteSketch::encode(std::uint32_t i, double x) const {
  const double m = std::floor(x + shifts_[i]);
  return static_cast<std::int8_t>(std::clamp(m, double{kDiscreteMin}, double{kDiscreteMax}));
}

void DiscreteSketch::update(Item item) { update_digest(hashing::item_digest(item, config_.seed)); }

void DiscreteSketch::update_digest(std::uint64_t digest) {
  const std::uint32_t b = hashing::reduce_range(hashing::mix64(digest ^ bucket_key_), config_.k);
  const double v = gumbel::sample_from_uniform(hashing::digest_to_unit(digest, value_key_), 0.0);
  registers_[b] = std::max(registers_[b], encode(b, v));
}

void DiscreteSketch::merge(const DiscreteSketch& other) {
  check_compatible(config_, other.config_);
  for (std::size_t i = 0; i < registers_.size(); ++i) {
    registers_[i] = std::max(registers_[i], other.registers_[i]);
  }
}

// Sketch ---------------------------------------------------------------------

Sketch make_sketch(const SketchConfig& config) {
  if (config.variant == Variant::DiscretizedSA) return DiscreteSketch(config);
  return ContinuousSketch(config);
}

const SketchConfig& config_of(const Sketch& sketch) {
  return std::visit([](const auto& s) -> const SketchConfig& { return s.config(); }, sketch);
}

void update(Sketch& sketch, Item item) {
  std::visit([item](auto& s) { s.update(item); }, sketch);
}

Sketch merge(const Sketch& a, const Sketch& b) {
  check_compatible(config_of(a), config_of(b));
  Sketch out = a;
  std::visit(
      [&b](auto& s) {
        using T = std::decay_t<decltype(s)>;
        s.merge(std::get<T>(b));
      },
      out);
  return out;
}

// Estimators -----------------------------------------------------------------

double predicted_rse(Estimator estimator, Variant variant, std::uint32_t k) {
  const double inv_sqrt_k = 1.0 / std::sqrt(static_cast<double>(k));
  const bool discrete = variant == Variant::DiscretizedSA;
  if (estimator == Estimator::Geometric) {
    // Per-register variance pi^2/6, plus 1/4 from the uniform rounding error.
    return std::sqrt(gumbel::kVariance + (discrete ? 0.25 : 0.0)) * inv_sqrt_k;
  }
  // Relative variance of exp(-X) is 1; with rounding, of exp(-X) e^U it is 2 / (e - 1).
  return (discrete ? std::sqrt(2.0 / (std::numbers::e - 1.0)) : 1.0) * inv_sqrt_k;
}

Estimate geometric_estimate(const ContinuousSketch& sketch) {
  const auto& cfg = sketch.config();
  if (sketch.has_empty_register()) throw EmptySketchError();
  double sum = 0.0;
  for (double r : sketch.registers()) sum += r;
  const double k = cfg.k;
  double z = std::exp(-gumbel::kEulerGamma + sum / k);
  if (cfg.variant == Variant::StochasticAveraging) z *= k;
  return {z, predicted_rse(Estimator::Geometric, cfg.variant, cfg.k), Estimator::Geometric};
}

Estimate geometric_estimate(const DiscreteSketch& sketch) {
  const auto& cfg = sketch.config();
  double sum = 0.0;
  for (std::uint32_t i = 0; i < cfg.k; ++i) sum += sketch.value(i);
  const double k = cfg.k;
  const double z = k * std::exp(-gumbel::kEulerGamma + 0.5 + sum / k);
  return {z, predicted_rse(Estimator::Geometric, cfg.variant, cfg.k), Estimator::Geometric};
}

Estimate harmonic_estimate(const ContinuousSketch& sketch) {
  const auto& cfg = sketch.config();
  if (sketch.has_empty_register()) throw EmptySketchError();
  double sum = 0.0;
  for (double r : sketch.registers()) sum += std::exp(-r);
  const double k = cfg.k;
  double z = 0.0;
  if (cfg.variant == Variant::FullReplication) {
    z = k / sum;
  } else {
    z = std::max(0.0, k * k / sum - 1.0);
  }
  return {z, predicted_rse(Estimator::Harmonic, cfg.variant, cfg.k), Estimator::Harmonic};
}

Estimate harmonic_estimate(const DiscreteSketch& sketch, const DiscreteHarmonic& norm) {
  const auto& cfg = sketch.config();
  const double k = cfg.k;
  double z = 0.0;
  if (norm.mode == DiscreteHarmonic::Mode::Additive) {
    double sum = 0.0;
    for (std::uint32_t i = 0; i < cfg.k; ++i) sum += std::exp(-sketch.value(i));
    z = k / (norm.constant + sum / k) - 1.0;
  } else {
    double sum = 0.0;
    for (std::uint32_t i = 0; i < cfg.k; ++i) sum += std::exp(-(sketch.value(i) + norm.constant));
    z = k * k / sum - 1.0;
  }
  return {std::max(0.0, z), predicted_rse(Estimator::Harmonic, cfg.variant, cfg.k), Estimator::Harmonic};
}

Estimate geometric_estimate(const Sketch& sketch) {
  return std::visit([](const auto& s) { return geometric_estimate(s); }, sketch);
}

Estimate harmonic_estimate(const Sketch& sketch, const DiscreteHarmonic& norm) {
  if (const auto* d = std::get_if<DiscreteSketch>(&sketch)) return harmonic_estimate(*d, norm);
  return harmonic_estimate(std::get<ContinuousSketch>(sketch));
}

Estimate estimate(const Sketch& sketch, Estimator estimator, const DiscreteHarmonic& norm) {
  return estimator == Estimator::Geometric ? geometric_estimate(sketch) : harmonic_estimate(sketch, norm);
}

ContinuousSketch round_registers(const ContinuousSketch& sketch, double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw std::invalid_argument("round_registers: eps must be positive");
  std::vector<double> out(sketch.registers().begin(), sketch.registers().end());
  for (double& r : out) {
    if (std::isfinite(r)) r = std::round(r / eps) * eps;
  }
  return ContinuousSketch::from_registers(sketch.config(), std::move(out));
}

}  // namespace gumbel_sketch

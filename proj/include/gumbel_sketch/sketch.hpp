#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "gumbel_sketch/hashing.hpp"

namespace gumbel_sketch {

enum class Variant : std::uint8_t {
  FullReplication = 0,      // k independent lanes, every update touches every register
  StochasticAveraging = 1,  // one bucket per item, continuous registers
  DiscretizedSA = 2,        // stochastic averaging with shift-rounded int8 registers
};

enum class Estimator : std::uint8_t { Geometric, Harmonic };

std::string_view to_string(Variant v);
std::string_view to_string(Estimator e);
// Accepts the to_string names plus short aliases ("full", "sa", "discrete").
Variant parse_variant(std::string_view name);
Estimator parse_estimator(std::string_view name);

struct SketchConfig {
  std::uint32_t k = 1024;
  HashSeed seed{};
  Variant variant = Variant::DiscretizedSA;

  friend bool operator==(const SketchConfig&, const SketchConfig&) = default;
};

struct Estimate {
  double value = 0.0;
  double predicted_rse = 0.0;
  Estimator estimator = Estimator::Harmonic;
};

class SketchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Estimation on a full-replication sketch that has a -inf register.
class EmptySketchError : public SketchError {
 public:
  EmptySketchError() : SketchError("empty sketch: full-replication sketch has not seen any item") {}
};

class IncompatibleConfigError : public SketchError {
 public:
  using SketchError::SketchError;
};

// Normalization of the harmonic estimator for integer registers.
//
// Additive: Z = k / (constant + (1/k) sum exp(-X'_i)) - 1, constant = 1/2 by default.
// RegisterOffset: Z = k^2 / sum exp(-(X'_i + constant)) - 1.
//
// X'_i = X_i - U_i with U_i ~ U[0, 1), so E[exp(-X'_i)] = (e - 1) exp(-mu_i). The
// additive form therefore tends to 2k as n grows; the offset form with
// constant = ln(e - 1) removes the factor exactly.
struct DiscreteHarmonic {
  enum class Mode : std::uint8_t { Additive, RegisterOffset };

  Mode mode = Mode::Additive;
  double constant = 0.5;

  static DiscreteHarmonic additive(double constant = 0.5) { return {Mode::Additive, constant}; }
  static DiscreteHarmonic calibrated(double offset);
  static DiscreteHarmonic calibrated();
};

// ln(e - 1).
double analytic_register_offset();

inline constexpr std::int8_t kDiscreteMin = -32;
inline constexpr std::int8_t kDiscreteMax = 95;

// f_c(x) = floor(x + c) - c.
double shift_round(double x, double c);

class ContinuousSketch {
 public:
  // Variant must be FullReplication or StochasticAveraging; k >= 1.
  explicit ContinuousSketch(const SketchConfig& config);

  // Rebuilds a sketch from stored registers (no monotonicity history is checked).
  static ContinuousSketch from_registers(const SketchConfig& config, std::vector<double> registers);

  void update(Item item);
  void update_digest(std::uint64_t digest);

  // Register-wise max. Throws IncompatibleConfigError on config mismatch.
  void merge(const ContinuousSketch& other);

  const SketchConfig& config() const { return config_; }
  std::span<const double> registers() const { return registers_; }
  bool has_empty_register() const;

  friend bool operator==(const ContinuousSketch& a, const ContinuousSketch& b) {
    return a.config_ == b.config_ && a.registers_ == b.registers_;
  }

 private:
  ContinuousSketch(const SketchConfig& config, std::vector<double> registers);

  SketchConfig config_;
  std::vector<double> registers_;
  std::vector<std::uint64_t> lane_keys_;  // full replication only
  std::uint64_t bucket_key_ = 0;
  std::uint64_t value_key_ = 0;
};

class DiscreteSketch {
 public:
  // Variant must be DiscretizedSA; k >= 1.
  explicit DiscreteSketch(const SketchConfig& config);

  static DiscreteSketch from_registers(const SketchConfig& config, std::vector<std::int8_t> registers);

  void update(Item item);
  void update_digest(std::uint64_t digest);
  void merge(const DiscreteSketch& other);

  const SketchConfig& config() const { return config_; }
  std::span<const std::int8_t> registers() const { return registers_; }
  std::span<const double> shifts() const { return shifts_; }
  // X'_i = m_i - c_i.
  double value(std::uint32_t i) const { return registers_[i] - shifts_[i]; }

  // floor(x + c_i) clamped to the register range.
  std::int8_t encode(std::uint32_t i, double x) const;

  friend bool operator==(const DiscreteSketch& a, const DiscreteSketch& b) {
    return a.config_ == b.config_ && a.registers_ == b.registers_;
  }

 private:
  DiscreteSketch(const SketchConfig& config, std::vector<std::int8_t> registers);

  SketchConfig config_;
  std::vector<std::int8_t> registers_;
  std::vector<double> shifts_;
  std::uint64_t bucket_key_ = 0;
  std::uint64_t value_key_ = 0;
};

using Sketch = std::variant<ContinuousSketch, DiscreteSketch>;

Sketch make_sketch(const SketchConfig& config);
const SketchConfig& config_of(const Sketch& sketch);
void update(Sketch& sketch, Item item);
Sketch merge(const Sketch& a, const Sketch& b);

// Analytic relative standard error of an estimator on k registers.
double predicted_rse(Estimator estimator, Variant variant, std::uint32_t k);

Estimate geometric_estimate(const ContinuousSketch& sketch);
Estimate geometric_estimate(const DiscreteSketch& sketch);
Estimate geometric_estimate(const Sketch& sketch);

Estimate harmonic_estimate(const ContinuousSketch& sketch);
Estimate harmonic_estimate(const DiscreteSketch& sketch, const DiscreteHarmonic& norm = {});
Estimate harmonic_estimate(const Sketch& sketch, const DiscreteHarmonic& norm = {});

Estimate estimate(const Sketch& sketch, Estimator estimator, const DiscreteHarmonic& norm = {});

// Rounds every finite register to the nearest multiple of eps (eps > 0).
ContinuousSketch round_registers(const ContinuousSketch& sketch, double eps);

}  // namespace gumbel_sketch

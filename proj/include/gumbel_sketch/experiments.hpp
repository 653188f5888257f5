#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gumbel_sketch/sketch.hpp"

// Monte Carlo experiments over synthetic streams. Trial t of an experiment
// with master seed s sketches the items 0..n-1 (8-byte little-endian) under
// HashSeed trial_seed(s, t), so results do not depend on execution order.
namespace gumbel_sketch::experiments {

inline constexpr std::uint32_t kMinTrials = 30;

HashSeed trial_seed(std::uint64_t master, std::uint64_t trial);

// Bytes of synthetic item i.
std::string synthetic_item(std::uint64_t i);

struct ExperimentSpec {
  Variant variant = Variant::StochasticAveraging;
  std::uint64_t n = 0;
  std::uint32_t k = 1024;
  std::uint32_t trials = 200;
  std::uint64_t seed = 0;
  DiscreteHarmonic norm = DiscreteHarmonic::calibrated();
};

struct TrialEstimates {
  double geometric = 0.0;
  double harmonic = 0.0;
};

// One sketch per trial; both estimators read from it. Throws
// std::invalid_argument when trials < kMinTrials or n == 0.
std::vector<TrialEstimates> simulate_trials(const ExperimentSpec& spec);
std::vector<TrialEstimates> simulate_trials_serial(const ExperimentSpec& spec);

struct ExperimentReport {
  Variant variant = Variant::StochasticAveraging;
  Estimator estimator = Estimator::Harmonic;
  std::uint64_t n = 0;
  std::uint32_t k = 0;
  std::uint32_t trials = 0;
  double empirical_rse = 0.0;        // sample sd of Z / n
  double mean_relative_error = 0.0;  // mean (Z - n) / n
  double coverage_fraction = 0.0;    // fraction with |Z - n| <= bound_value
  double bound_value = 0.0;          // multiplier * n / sqrt(k)
  double predicted_rse = 0.0;
};

// pi for the geometric estimator, 2 for the harmonic one.
double default_bound_multiplier(Estimator estimator);

ExperimentReport summarize(const ExperimentSpec& spec, Estimator estimator, std::span<const TrialEstimates> trials,
                           double bound_multiplier);

ExperimentReport run_estimator_experiment(Variant variant, Estimator estimator, std::uint64_t n, std::uint32_t k,
                                          std::uint32_t trials, std::uint64_t seed);

// Runs a stochastic-averaging sketch and its shift-rounded twin on the same
// stream and checks, after every update, that the discrete register equals
// f_c(continuous register).
struct TwinRunReport {
  std::uint64_t steps = 0;
  std::uint64_t invariant_violations = 0;
  double continuous_geometric = 0.0;
  double discrete_geometric = 0.0;
};

TwinRunReport discretization_twin_run(std::uint64_t n, std::uint32_t k, HashSeed seed);

// Maxima of n iid Gumbel(0) draws, from a seeded PRNG.
std::vector<double> sample_maxima(std::uint32_t n, std::uint32_t samples, std::uint64_t seed);
std::vector<double> sample_maxima_serial(std::uint32_t n, std::uint32_t samples, std::uint64_t seed);

// KS distance between maxima of n draws and Gumbel(location). Requires n >= 1, samples >= 1000.
double max_stability_ks(std::uint32_t n, std::uint32_t samples, std::uint64_t seed, double location);
// Location ln n.
double max_stability_ks(std::uint32_t n, std::uint32_t samples, std::uint64_t seed);

struct HistogramRow {
  double lo = 0.0;
  double hi = 0.0;
  double empirical_density = 0.0;
  double gumbel_density = 0.0;    // Gumbel(ln n) pdf at bin centre
  double geometric_max_pmf = 0.0;  // Pr[max of n Geometric(1/2) = lo] when lo is a non-negative integer, else 0
};

std::vector<HistogramRow> max_histogram(std::uint32_t n, std::uint32_t samples, std::uint64_t seed, double lo,
                                        double hi, double width);

enum class CalibrationSource { Discrete, Continuous };

struct CalibrationResult {
  double offset = 0.0;  // register offset making the median estimate equal n
  double ci_low = 0.0;  // 95% order-statistic interval
  double ci_high = 0.0;
  std::uint32_t trials = 0;
};

// Fits the RegisterOffset constant of the discrete harmonic estimator. With
// Continuous input the fitted offset is ~0 (the unrounded estimator).
CalibrationResult calibrate_harmonic_offset(std::uint32_t k, std::uint64_t n, std::uint32_t trials,
                                            std::uint64_t seed, CalibrationSource source = CalibrationSource::Discrete);

}  // namespace gumbel_sketch::experiments

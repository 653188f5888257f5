#include "gumbel_sketch/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "gumbel_sketch/gumbel.hpp"
#include "gumbel_sketch/hashing.hpp"
#include "gumbel_sketch/statistics.hpp"

namespace gumbel_sketch::experiments {

namespace {

constexpr std::uint64_t kSampleChunk = 4096;

void encode_item(std::uint64_t i, char (&buf)[8]) {
  for (int b = 0; b < 8; ++b) buf[b] = static_cast<char>((i >> (8 * b)) & 0xff);
}

template <typename SketchT>
void feed_synthetic(SketchT& sketch, std::uint64_t n) {
  char buf[8];
  const HashSeed seed = sketch.config().seed;
  for (std::uint64_t i = 0; i < n; ++i) {
    encode_item(i, buf);
    sketch.update_digest(hashing::item_digest(Item(buf, 8), seed));
  }
}

Sketch build_trial(const ExperimentSpec& spec, std::uint32_t trial) {
  Sketch sketch = make_sketch({spec.k, trial_seed(spec.seed, trial), spec.variant});
  std::visit([&](auto& s) { feed_synthetic(s, spec.n); }, sketch);
  return sketch;
}

TrialEstimates run_trial(const ExperimentSpec& spec, std::uint32_t trial) {
  const Sketch sketch = build_trial(spec, trial);
  return {geometric_estimate(sketch).value, harmonic_estimate(sketch, spec.norm).value};
}

void check_spec(const ExperimentSpec& spec) {
  if (spec.trials < kMinTrials) {
    throw std::invalid_argument("experiment: trials must be at least " + std::to_string(kMinTrials));
  }
  if (spec.n == 0) throw std::invalid_argument("experiment: n must be positive");
  if (spec.k == 0) throw std::invalid_argument("experiment: k must be positive");
}

std::vector<double> maxima_chunk(std::uint32_t n, std::uint64_t count, std::uint64_t seed, std::uint64_t chunk) {
  std::mt19937_64 rng(hashing::mix64(seed + hashing::kGolden * (chunk + 1)));
  std::vector<double> out(count);
  for (auto& x : out) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::uint32_t j = 0; j < n; ++j) {
      m = std::max(m, gumbel::sample_from_uniform(hashing::to_open_unit(rng()), 0.0));
    }
    x = m;
  }
  return out;
}

std::vector<double> maxima(std::uint32_t n, std::uint32_t samples, std::uint64_t seed, bool parallel) {
  if (n == 0) throw std::invalid_argument("sample_maxima: n must be at least 1");
  const std::uint64_t chunks = (samples + kSampleChunk - 1) / kSampleChunk;
  std::vector<std::vector<double>> parts(chunks);
  const auto count = [&](std::uint64_t c) { return std::min<std::uint64_t>(kSampleChunk, samples - c * kSampleChunk); };
  if (parallel) {
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t c = 0; c < static_cast<std::int64_t>(chunks); ++c) {
      const auto uc = static_cast<std::uint64_t>(c);
      parts[uc] = maxima_chunk(n, count(uc), seed, uc);
    }
  } else {
    for (std::uint64_t c = 0; c < chunks; ++c) parts[c] = maxima_chunk(n, count(c), seed, c);
  }
  std::vector<double> out;
  out.reserve(samples);
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

double median_sorted(const std::vector<double>& xs) {
  const std::size_t m = xs.size() / 2;
  return xs.size() % 2 ? xs[m] : 0.5 * (xs[m - 1] + xs[m]);
}

}  // namespace

HashSeed trial_seed(std::uint64_t master, std::uint64_t trial) {
  return HashSeed{hashing::mix64(master ^ hashing::mix64(trial + 0x5851f42d4c957f2dULL))};
}

std::string synthetic_item(std::uint64_t i) {
  char buf[8];
  encode_item(i, buf);
  return std::string(buf, 8);
}

std::vector<TrialEstimates> simulate_trials(const ExperimentSpec& spec) {
  check_spec(spec);
  std::vector<TrialEstimates> out(spec.trials);
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t t = 0; t < static_cast<std::int64_t>(spec.trials); ++t) {
    out[static_cast<std::size_t>(t)] = run_trial(spec, static_cast<std::uint32_t>(t));
  }
  return out;
}

std::vector<TrialEstimates> simulate_trials_serial(const ExperimentSpec& spec) {
  check_spec(spec);
  std::vector<TrialEstimates> out(spec.trials);
  for (std::uint32_t t = 0; t < spec.trials; ++t) out[t] = run_trial(spec, t);
  return out;
}

double default_bound_multiplier(Estimator estimator) {
  return estimator == Estimator::Geometric ? std::numbers::pi : 2.0;
}

ExperimentReport summarize(const ExperimentSpec& spec, Estimator estimator, std::span<const TrialEstimates> trials,
                           double bound_multiplier) {
  ExperimentReport r;
  r.variant = spec.variant;
  r.estimator = estimator;
  r.n = spec.n;
  r.k = spec.k;
  r.trials = static_cast<std::uint32_t>(trials.size());
  r.predicted_rse = predicted_rse(estimator, spec.variant, spec.k);
  const double n = static_cast<double>(spec.n);
  r.bound_value = bound_multiplier * n / std::sqrt(static_cast<double>(spec.k));

  std::vector<double> rel;
  rel.reserve(trials.size());
  std::size_t covered = 0;
  for (const auto& t : trials) {
    const double z = estimator == Estimator::Geometric ? t.geometric : t.harmonic;
    rel.push_back((z - n) / n);
    if (std::abs(z - n) <= r.bound_value) ++covered;
  }
  const auto s = stats::summarize(rel);
  r.empirical_rse = std::sqrt(s.variance);
  r.mean_relative_error = s.mean;
  r.coverage_fraction = trials.empty() ? 0.0 : static_cast<double>(covered) / static_cast<double>(trials.size());
  return r;
}

ExperimentReport run_estimator_experiment(Variant variant, Estimator estimator, std::uint64_t n, std::uint32_t k,
                                          std::uint32_t trials, std::uint64_t seed) {
  ExperimentSpec spec{variant, n, k, trials, seed, DiscreteHarmonic::calibrated()};
  const auto results = simulate_trials(spec);
  return summarize(spec, estimator, results, default_bound_multiplier(estimator));
}

TwinRunReport discretization_twin_run(std::uint64_t n, std::uint32_t k, HashSeed seed) {
  ContinuousSketch cont({k, seed, Variant::StochasticAveraging});
  DiscreteSketch disc({k, seed, Variant::DiscretizedSA});
  TwinRunReport r;
  const auto holds = [&](std::uint32_t b) { return disc.registers()[b] == disc.encode(b, cont.registers()[b]); };
  for (std::uint32_t b = 0; b < k; ++b) {
    if (!holds(b)) ++r.invariant_violations;
  }
  char buf[8];
  for (std::uint64_t i = 0; i < n; ++i) {
    encode_item(i, buf);
    const std::uint64_t digest = hashing::item_digest(Item(buf, 8), seed);
    cont.update_digest(digest);
    disc.update_digest(digest);
    const std::uint32_t b = hashing::digest_to_bucket(digest, k, seed);
    if (!holds(b)) ++r.invariant_violations;
    ++r.steps;
  }
  for (std::uint32_t b = 0; b < k; ++b) {
    if (!holds(b)) ++r.invariant_violations;
  }
  r.continuous_geometric = geometric_estimate(cont).value;
  r.discrete_geometric = geometric_estimate(disc).value;
  return r;
}

std::vector<double> sample_maxima(std::uint32_t n, std::uint32_t samples, std::uint64_t seed) {
  return maxima(n, samples, seed, true);
}

std::vector<double> sample_maxima_serial(std::uint32_t n, std::uint32_t samples, std::uint64_t seed) {
  return maxima(n, samples, seed, false);
}

double max_stability_ks(std::uint32_t n, std::uint32_t samples, std::uint64_t seed, double location) {
  if (samples < 1000) throw std::invalid_argument("max_stability_ks: at least 1000 samples required");
  return stats::ks_statistic(sample_maxima(n, samples, seed),
                             [location](double x) { return gumbel::cdf(x, location); });
}

double max_stability_ks(std::uint32_t n, std::uint32_t samples, std::uint64_t seed) {
  return max_stability_ks(n, samples, seed, std::log(static_cast<double>(n)));
}

std::vector<HistogramRow> max_histogram(std::uint32_t n, std::uint32_t samples, std::uint64_t seed, double lo,
                                        double hi, double width) {
  if (!(width > 0.0) || !(hi > lo)) throw std::invalid_argument("max_histogram: need lo < hi and width > 0");
  const auto xs = sample_maxima(n, samples, seed);
  const auto bins = static_cast<std::size_t>(std::ceil((hi - lo) / width));
  std::vector<std::uint64_t> counts(bins, 0);
  for (double x : xs) {
    if (x < lo || x >= lo + width * static_cast<double>(bins)) continue;
    counts[std::min(bins - 1, static_cast<std::size_t>((x - lo) / width))]++;
  }
  const double location = std::log(static_cast<double>(n));
  std::vector<HistogramRow> rows(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    auto& row = rows[b];
    row.lo = lo + width * static_cast<double>(b);
    row.hi = row.lo + width;
    row.empirical_density = static_cast<double>(counts[b]) / (static_cast<double>(samples) * width);
    row.gumbel_density = gumbel::pdf(0.5 * (row.lo + row.hi), location);
    if (row.lo >= 0.0 && std::floor(row.lo) == row.lo) {
      const double dn = n;
      row.geometric_max_pmf = std::pow(1.0 - std::exp2(-row.lo - 1.0), dn) - std::pow(1.0 - std::exp2(-row.lo), dn);
    }
  }
  return rows;
}

CalibrationResult calibrate_harmonic_offset(std::uint32_t k, std::uint64_t n, std::uint32_t trials,
                                            std::uint64_t seed, CalibrationSource source) {
  ExperimentSpec spec{source == CalibrationSource::Discrete ? Variant::DiscretizedSA : Variant::StochasticAveraging,
                      n, k, trials, seed, DiscreteHarmonic::calibrated()};
  check_spec(spec);
  std::vector<double> sums(trials);
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t t = 0; t < static_cast<std::int64_t>(trials); ++t) {
    const Sketch sketch = build_trial(spec, static_cast<std::uint32_t>(t));
    double s = 0.0;
    if (const auto* d = std::get_if<DiscreteSketch>(&sketch)) {
      for (std::uint32_t i = 0; i < k; ++i) s += std::exp(-d->value(i));
    } else {
      for (double r : std::get<ContinuousSketch>(sketch).registers()) s += std::exp(-r);
    }
    sums[static_cast<std::size_t>(t)] = s;
  }
  std::sort(sums.begin(), sums.end());

  const double scale = (static_cast<double>(n) + 1.0) / (static_cast<double>(k) * static_cast<double>(k));
  const auto offset_for = [scale](double s) { return std::log(scale * s); };
  const double half = 0.5 * trials;
  const double spread = 0.98 * std::sqrt(static_cast<double>(trials));
  const auto lo_rank = static_cast<std::size_t>(std::max(0.0, std::floor(half - spread)));
  const auto hi_rank = std::min<std::size_t>(trials - 1, static_cast<std::size_t>(std::ceil(half + spread)));
  return {offset_for(median_sorted(sums)), offset_for(sums[lo_rank]), offset_for(sums[hi_rank]), trials};
}

}  // namespace gumbel_sketch::experiments

#include "gumbel_sketch/multinomial.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "gumbel_sketch/hashing.hpp"

namespace gumbel_sketch::multinomial {

namespace {

constexpr std::uint64_t kChunk = 4096;

struct Accumulator {
  double weight = 0.0, v = 0.0, v2 = 0.0, w = 0.0, eny = 0.0, tail = 0.0;
  std::uint64_t count = 0;

  void add(const std::vector<std::uint32_t>& counts, double p, double tail_threshold) {
    double V = 0.0, W = 0.0, Y = 0.0;
    for (std::uint32_t c : counts) {
      const double x = c;
      V += 1.0 / (x + 1.0);
      W += 2.0 / ((x + 1.0) * (x + 2.0));
      Y += std::log1p(x);
    }
    weight += p;
    v += p * V;
    v2 += p * V * V;
    w += p * W;
    eny += p * std::exp(-Y);
    if (Y < tail_threshold) tail += p;
    ++count;
  }

  void absorb(const Accumulator& o) {
    weight += o.weight;
    v += o.v;
    v2 += o.v2;
    w += o.w;
    eny += o.eny;
    tail += o.tail;
    count += o.count;
  }
};

void enumerate(std::vector<std::uint32_t>& counts, std::uint32_t bucket, std::uint32_t remaining, double coef,
               double scale, double tail_threshold, Accumulator& acc) {
  const std::uint32_t k = static_cast<std::uint32_t>(counts.size());
  if (bucket + 1 == k) {
    counts[bucket] = remaining;
    acc.add(counts, coef * scale, tail_threshold);
    return;
  }
  double binom = 1.0;  // C(remaining, i)
  for (std::uint32_t i = 0; i <= remaining; ++i) {
    counts[bucket] = i;
    enumerate(counts, bucket + 1, remaining - i, coef * binom, scale, tail_threshold, acc);
    binom = binom * static_cast<double>(remaining - i) / static_cast<double>(i + 1);
  }
}

Accumulator monte_carlo_chunk(std::uint32_t n, std::uint32_t k, std::uint64_t seed, std::uint64_t chunk,
                              std::uint64_t trials, double tail_threshold) {
  std::mt19937_64 rng(hashing::mix64(seed + hashing::kGolden * (chunk + 1)));
  std::vector<std::uint32_t> counts(k);
  Accumulator acc;
  for (std::uint64_t t = 0; t < trials; ++t) {
    std::uint32_t remaining = n;
    for (std::uint32_t j = 0; j + 1 < k; ++j) {
      std::binomial_distribution<std::uint32_t> dist(remaining, 1.0 / static_cast<double>(k - j));
      counts[j] = remaining == 0 ? 0 : dist(rng);
      remaining -= counts[j];
    }
    counts[k - 1] = remaining;
    acc.add(counts, 1.0, tail_threshold);
  }
  return acc;
}

}  // namespace

MultinomialOracle::MultinomialOracle(std::uint32_t n, std::uint32_t k, std::variant<Exhaustive, MonteCarlo> mode)
    : n_(n), k_(k), mode_(mode) {
  if (k_ == 0) throw std::invalid_argument("MultinomialOracle: k must be at least 1");
  if (std::holds_alternative<Exhaustive>(mode_)) {
    if (std::pow(static_cast<double>(k_), static_cast<double>(n_)) > kExhaustiveStateLimit) {
      throw std::invalid_argument("MultinomialOracle: k^n exceeds the exhaustive state limit of 1e7");
    }
  } else if (std::get<MonteCarlo>(mode_).trials == 0) {
    throw std::invalid_argument("MultinomialOracle: Monte Carlo needs at least one trial");
  }
}

BucketStatistics MultinomialOracle::evaluate(double tail_threshold) const { return run(tail_threshold, true); }

BucketStatistics MultinomialOracle::evaluate_serial(double tail_threshold) const {
  return run(tail_threshold, false);
}

BucketStatistics MultinomialOracle::run(double tail_threshold, bool parallel) const {
  Accumulator acc;
  if (std::holds_alternative<Exhaustive>(mode_)) {
    std::vector<std::uint32_t> counts(k_);
    const double scale = std::pow(static_cast<double>(k_), -static_cast<double>(n_));
    enumerate(counts, 0, n_, 1.0, scale, tail_threshold, acc);
  } else {
    const auto mc = std::get<MonteCarlo>(mode_);
    const std::uint64_t chunks = (mc.trials + kChunk - 1) / kChunk;
    std::vector<Accumulator> partial(chunks);
    const auto trials_in = [&](std::uint64_t c) { return std::min(kChunk, mc.trials - c * kChunk); };
    if (parallel) {
#pragma omp parallel for schedule(dynamic)
      for (std::int64_t c = 0; c < static_cast<std::int64_t>(chunks); ++c) {
        const auto uc = static_cast<std::uint64_t>(c);
        partial[uc] = monte_carlo_chunk(n_, k_, mc.seed, uc, trials_in(uc), tail_threshold);
      }
    } else {
      for (std::uint64_t c = 0; c < chunks; ++c) {
        partial[c] = monte_carlo_chunk(n_, k_, mc.seed, c, trials_in(c), tail_threshold);
      }
    }
    for (const auto& p : partial) acc.absorb(p);
    const double t = static_cast<double>(mc.trials);
    acc.v /= t;
    acc.v2 /= t;
    acc.w /= t;
    acc.eny /= t;
    acc.tail /= t;
    acc.weight /= t;
  }
  return {acc.weight, acc.v, acc.v2, acc.w, acc.eny, acc.tail, acc.count};
}

double expected_V_closed_form(std::uint64_t n, std::uint64_t k) {
  const double dk = static_cast<double>(k), dn = static_cast<double>(n);
  return dk * dk / (dn + 1.0) * (1.0 - std::pow(1.0 - 1.0 / dk, dn + 1.0));
}

double bound_W(std::uint64_t n, std::uint64_t k) {
  const double dk = static_cast<double>(k), dn1 = static_cast<double>(n) + 1.0;
  return 2.0 * dk * dk * dk / (dn1 * dn1);
}

double bound_varV(std::uint64_t n, std::uint64_t k) {
  const double dk = static_cast<double>(k), dn1 = static_cast<double>(n) + 1.0;
  const double beta = std::pow(1.0 - 1.0 / dk, dk);
  return dk * dk * dk / (dn1 * dn1) + dk * dk * dk * dk / (dn1 * dn1) * 2.0 * std::pow(beta, dn1 / dk);
}

double bound_exp_neg_Y(std::uint64_t n, std::uint64_t k) {
  if (n == 0) return std::numeric_limits<double>::infinity();
  return std::pow(static_cast<double>(k) / static_cast<double>(n), static_cast<double>(k));
}

double expected_W_exact(std::uint64_t n, std::uint64_t k) {
  // k * sum_i Pr[Bin(n, 1/k) = i] * 2/((i+1)(i+2)), pmf in log space.
  const double dk = static_cast<double>(k), dn = static_cast<double>(n);
  const double lp = -std::log(dk);
  const double lq = k == 1 ? 0.0 : std::log1p(-1.0 / dk);
  double sum = 0.0;
  for (std::uint64_t i = 0; i <= n; ++i) {
    const double di = static_cast<double>(i);
    if (k == 1 && i != n) continue;
    const double log_pmf = std::lgamma(dn + 1) - std::lgamma(di + 1) - std::lgamma(dn - di + 1) + di * lp +
                           (dn - di) * lq;
    sum += std::exp(log_pmf) * 2.0 / ((di + 1.0) * (di + 2.0));
  }
  return dk * sum;
}

TailCheck log_count_tail_check(std::uint32_t n, std::uint32_t k, double t, std::variant<Exhaustive, MonteCarlo> mode) {
  if (k == 0 || n < k) throw std::invalid_argument("log_count_tail_check: requires n >= k >= 1");
  if (!(t > 0.0)) throw std::invalid_argument("log_count_tail_check: t must be positive");
  const double threshold = static_cast<double>(k) * std::log(static_cast<double>(n) / k) - t;
  const auto stats = MultinomialOracle(n, k, mode).evaluate(threshold);
  return {stats.tail_probability, std::exp(-t), stats.mean_exp_neg_Y, bound_exp_neg_Y(n, k)};
}

}  // namespace gumbel_sketch::multinomial

#pragma once

#include <cstdint>
#include <limits>
#include <variant>

// Bucket-count statistics under stochastic averaging: n distinct items thrown
// into k equally likely buckets, counts n_1..n_k ~ Multinomial(n; 1/k, ..., 1/k).
//
//   V = sum 1/(n_i + 1)
//   W = sum 2/((n_i + 1)(n_i + 2))
//   Y = sum ln(n_i + 1)
namespace gumbel_sketch::multinomial {

// Largest k^n the exhaustive evaluator accepts.
inline constexpr double kExhaustiveStateLimit = 1e7;

struct BucketStatistics {
  double total_probability = 0.0;  // exhaustive: sum over compositions; Monte Carlo: 1
  double mean_V = 0.0;
  double mean_V2 = 0.0;
  double mean_W = 0.0;
  double mean_exp_neg_Y = 0.0;
  double tail_probability = 0.0;  // Pr[Y < tail_threshold]
  std::uint64_t count = 0;        // compositions enumerated or trials run

  double var_V() const { return mean_V2 - mean_V * mean_V; }
};

struct Exhaustive {};
struct MonteCarlo {
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
};

class MultinomialOracle {
 public:
  // Throws std::invalid_argument for k == 0, for exhaustive mode beyond the
  // state limit, and for Monte Carlo with zero trials.
  MultinomialOracle(std::uint32_t n, std::uint32_t k, std::variant<Exhaustive, MonteCarlo> mode);

  // Monte Carlo runs in fixed chunks with per-chunk RNG streams, so both entry
  // points return bit-identical results.
  BucketStatistics evaluate(double tail_threshold = -std::numeric_limits<double>::infinity()) const;
  BucketStatistics evaluate_serial(double tail_threshold = -std::numeric_limits<double>::infinity()) const;

  std::uint32_t n() const { return n_; }
  std::uint32_t k() const { return k_; }

 private:
  BucketStatistics run(double tail_threshold, bool parallel) const;

  std::uint32_t n_;
  std::uint32_t k_;
  std::variant<Exhaustive, MonteCarlo> mode_;
};

// E[V] = k^2/(n+1) (1 - (1 - 1/k)^(n+1)).
double expected_V_closed_form(std::uint64_t n, std::uint64_t k);

// E[W] <= 2k^3/(n+1)^2.
double bound_W(std::uint64_t n, std::uint64_t k);

// Var[V] <= k^3/(n+1)^2 + k^4/(n+1)^2 * 2 beta_k^((n+1)/k), beta_k = (1 - 1/k)^k.
double bound_varV(std::uint64_t n, std::uint64_t k);

// E[exp(-Y)] <= (k/n)^k (n >= 1).
double bound_exp_neg_Y(std::uint64_t n, std::uint64_t k);

// Exact E[W] from the marginal Binomial(n, 1/k) of one bucket.
double expected_W_exact(std::uint64_t n, std::uint64_t k);

struct TailCheck {
  double failure_probability = 0.0;  // Pr[Y < k ln(n/k) - t]
  double failure_bound = 0.0;        // e^-t
  double mean_exp_neg_Y = 0.0;
  double moment_bound = 0.0;  // (k/n)^k
};

// Requires n >= k >= 1 and t > 0.
TailCheck log_count_tail_check(std::uint32_t n, std::uint32_t k, double t, std::variant<Exhaustive, MonteCarlo> mode);

}  // namespace gumbel_sketch::multinomial

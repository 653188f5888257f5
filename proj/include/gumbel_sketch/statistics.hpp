#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace gumbel_sketch::stats {

struct Summary {
  double mean = 0.0;
  double variance = 0.0;  // unbiased (n - 1)
  std::size_t count = 0;
};

Summary summarize(std::span<const double> xs);

// sup |F_n(x) - F(x)| for the empirical CDF of `samples`.
double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);

// sup |F_a(x) - F_b(x)|.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

// Asymptotic 1% critical values of the one- and two-sample KS statistics.
double ks_critical_1pct(std::size_t n);
double ks_two_sample_critical_1pct(std::size_t n, std::size_t m);

// Pearson statistic against equal cell probabilities.
double chi_square_uniform(std::span<const std::uint64_t> counts);
double chi_square_quantile(double dof, double p);

double pearson_correlation(std::span<const double> a, std::span<const double> b);

}  // namespace gumbel_sketch::stats

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace gumbel_sketch::suite {

struct CheckRow {
  std::string experiment;
  std::string parameter;
  double observed = 0.0;
  std::string target;
  bool pass = false;
};

struct SuiteOptions {
  // Stochastic-averaging estimator experiments.
  std::uint64_t n = 1'000'000;
  std::uint32_t k = 1024;
  std::uint32_t trials = 200;
  // Full-replication experiments.
  std::uint64_t full_n = 1000;
  std::uint32_t full_k = 256;
  // Discretization twin runs.
  std::uint64_t twin_n = 100'000;
  std::uint32_t twin_trials = 100;
  // Multinomial Monte Carlo and max-stability sampling.
  std::uint64_t mc_trials = 1'000'000;
  std::uint32_t ks_samples = 100'000;
  std::uint64_t seed = 0;
};

std::vector<CheckRow> run_validation_suite(const SuiteOptions& options);

}  // namespace gumbel_sketch::suite

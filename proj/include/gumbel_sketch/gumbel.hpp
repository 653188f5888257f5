#pragma once

#include <numbers>

// Unit-scale Gumbel(mu) distribution: F(x) = exp(-exp(-(x - mu))).
namespace gumbel_sketch::gumbel {

// Mean offset E[X] - mu.
inline constexpr double kEulerGamma = std::numbers::egamma;
// Var[X] = pi^2 / 6.
inline constexpr double kVariance = std::numbers::pi * std::numbers::pi / 6.0;

// Largest double strictly below 1 (1 - 2^-53).
inline constexpr double kMaxUniform = 1.0 - 0x1p-53;

double cdf(double x, double mu);
double pdf(double x, double mu);

// Inverse-CDF transform -ln(-ln t) + mu. Throws std::domain_error unless 0 < t < 1.
double sample_from_uniform(double t, double mu);

// Same transform, named for probabilities. Throws std::domain_error unless 0 < p < 1.
double quantile(double p, double mu);

}  // namespace gumbel_sketch::gumbel

#include "gumbel_sketch/gumbel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace gumbel_sketch::gumbel {

namespace {

double inverse_cdf(double t, double mu, const char* what) {
  if (!(t > 0.0 && t < 1.0)) {
    throw std::domain_error(std::string(what) + ": argument must lie in the open interval (0, 1), got " +
                            std::to_string(t));
  }
  t = std::min(t, kMaxUniform);
  return -std::log(-std::log(t)) + mu;
}

}  // namespace

double cdf(double x, double mu) { return std::exp(-std::exp(-(x - mu))); }

double pdf(double x, double mu) {
  const double z = x - mu;
  // exp(-z) overflows for very negative z; the density is 0 to double precision there.
  if (z < -700.0) return 0.0;
  const double e = std::exp(-z);
  return std::exp(-e) * e;
}

double sample_from_uniform(double t, double mu) { return inverse_cdf(t, mu, "sample_from_uniform"); }

double quantile(double p, double mu) { return inverse_cdf(p, mu, "quantile"); }

}  // namespace gumbel_sketch::gumbel

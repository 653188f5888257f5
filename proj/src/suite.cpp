#include "gumbel_sketch/suite.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "gumbel_sketch/codec.hpp"
#include "gumbel_sketch/experiments.hpp"
#include "gumbel_sketch/multinomial.hpp"
#include "gumbel_sketch/sketch.hpp"
#include "gumbel_sketch/statistics.hpp"

namespace gumbel_sketch::suite {

namespace {

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

std::string params(std::initializer_list<std::pair<const char*, double>> kv) {
  std::string out;
  for (const auto& [k, v] : kv) {
    if (!out.empty()) out += ' ';
    out += k;
    out += '=';
    out += fmt(v);
  }
  return out;
}

class Rows {
 public:
  void at_most(std::string exp, std::string param, double observed, double bound) {
    rows_.push_back({std::move(exp), std::move(param), observed, "<=" + fmt(bound), observed <= bound});
  }
  void at_least(std::string exp, std::string param, double observed, double bound) {
    rows_.push_back({std::move(exp), std::move(param), observed, ">=" + fmt(bound), observed >= bound});
  }
  void above(std::string exp, std::string param, double observed, double bound) {
    rows_.push_back({std::move(exp), std::move(param), observed, ">" + fmt(bound), observed > bound});
  }
  void within(std::string exp, std::string param, double observed, double lo, double hi) {
    rows_.push_back({std::move(exp), std::move(param), observed, "[" + fmt(lo) + "," + fmt(hi) + "]",
                     observed >= lo && observed <= hi});
  }
  std::vector<CheckRow> take() { return std::move(rows_); }

 private:
  std::vector<CheckRow> rows_;
};

void multinomial_checks(const SuiteOptions& o, Rows& rows) {
  using namespace multinomial;
  double worst_v = 0.0, worst_total = 0.0;
  double worst_w = 0.0, worst_var = 0.0, worst_y = 0.0;
  for (std::uint32_t k = 1; k <= 4; ++k) {
    for (std::uint32_t n = 0; n <= 8; ++n) {
      const auto s = MultinomialOracle(n, k, Exhaustive{}).evaluate();
      worst_total = std::max(worst_total, std::abs(s.total_probability - 1.0));
      worst_v = std::max(worst_v, std::abs(s.mean_V - expected_V_closed_form(n, k)));
      worst_w = std::max(worst_w, s.mean_W / bound_W(n, k));
      worst_var = std::max(worst_var, s.var_V() / bound_varV(n, k));
      if (n >= 1) worst_y = std::max(worst_y, s.mean_exp_neg_Y / bound_exp_neg_Y(n, k));
    }
  }
  rows.at_most("exhaustive_probability_mass", "n<=8 k<=4 max|sum-1|", worst_total, 1e-12);
  rows.at_most("expected_V_equality", "n<=8 k<=4 max|E[V]-closed|", worst_v, 1e-12);
  rows.at_most("expected_W_bound", "n<=8 k<=4 max E[W]/bound", worst_w, 1.0);
  rows.at_most("var_V_bound", "n<=8 k<=4 max Var[V]/bound", worst_var, 1.0);
  rows.at_most("exp_neg_Y_bound", "1<=n<=8 k<=4 max E[e^-Y]/bound", worst_y, 1.0);

  for (auto [n, k] : {std::pair<std::uint32_t, std::uint32_t>{100, 10}, {1000, 32}}) {
    const auto s = MultinomialOracle(n, k, MonteCarlo{o.mc_trials, o.seed ^ (n * 31 + k)}).evaluate();
    const std::string p = params({{"n", n}, {"k", k}, {"trials", static_cast<double>(o.mc_trials)}});
    rows.at_most("expected_W_bound_mc", p, s.mean_W, bound_W(n, k));
    rows.at_most("var_V_bound_mc", p, s.var_V(), bound_varV(n, k));
    rows.at_most("exp_neg_Y_bound_mc", p, s.mean_exp_neg_Y, bound_exp_neg_Y(n, k));
  }

  const auto tail = log_count_tail_check(1000, 10, 3.0, MonteCarlo{std::min<std::uint64_t>(o.mc_trials, 100'000), o.seed});
  rows.at_most("bucket_log_tail", "n=1000 k=10 t=3", tail.failure_probability, tail.failure_bound);
}

void max_stability_checks(const SuiteOptions& o, Rows& rows) {
  const double crit = stats::ks_critical_1pct(o.ks_samples);
  for (std::uint32_t n : {2u, 8u, 64u}) {
    const double d = experiments::max_stability_ks(n, o.ks_samples, o.seed + n);
    rows.at_most("max_stability_ks", params({{"n", n}, {"samples", o.ks_samples}}), d, crit);
  }
  const double wrong = experiments::max_stability_ks(64, o.ks_samples, o.seed + 64, std::log(128.0));
  rows.above("max_stability_negative_control", "n=64 location=ln(128)", wrong, crit);
}

void estimator_checks(const SuiteOptions& o, Rows& rows) {
  using experiments::ExperimentSpec;
  const double sqrt_k = std::sqrt(static_cast<double>(o.k));
  const ExperimentSpec sa{Variant::StochasticAveraging, o.n, o.k, o.trials, o.seed, DiscreteHarmonic::calibrated()};
  const auto trials = experiments::simulate_trials(sa);
  const auto geo = experiments::summarize(sa, Estimator::Geometric, trials, std::numbers::pi);
  const auto har = experiments::summarize(sa, Estimator::Harmonic, trials, 2.0);
  const std::string p = params({{"n", static_cast<double>(o.n)}, {"k", o.k}, {"trials", o.trials}});
  rows.at_least("sa_geometric_coverage", p + " bound=pi*n/sqrt(k)", geo.coverage_fraction, 2.0 / 3.0);
  rows.within("sa_geometric_rse_sqrtk", p, geo.empirical_rse * sqrt_k, 1.09, 1.47);
  rows.within("sa_harmonic_rse_sqrtk", p, har.empirical_rse * sqrt_k, 0.85, 1.15);
  rows.at_least("sa_harmonic_coverage", p + " bound=2n/sqrt(k)", har.coverage_fraction, 0.75);
  rows.at_most("harmonic_over_geometric_rse", p, har.empirical_rse / geo.empirical_rse, 0.9);

  const ExperimentSpec fr{Variant::FullReplication, o.full_n, o.full_k, o.trials, o.seed + 1,
                          DiscreteHarmonic::calibrated()};
  const auto fr_trials = experiments::simulate_trials(fr);
  const auto fr_geo = experiments::summarize(fr, Estimator::Geometric, fr_trials, std::numbers::pi);
  const auto fr_har = experiments::summarize(fr, Estimator::Harmonic, fr_trials, 2.0);
  const std::string fp = params({{"n", static_cast<double>(o.full_n)}, {"k", o.full_k}, {"trials", o.trials}});
  rows.at_least("full_geometric_coverage", fp + " bound=pi*n/sqrt(k)", fr_geo.coverage_fraction, 5.0 / 6.0);
  rows.at_least("full_harmonic_coverage", fp + " bound=2n/sqrt(k)", fr_har.coverage_fraction, 0.75);
}

void discretization_checks(const SuiteOptions& o, Rows& rows) {
  std::vector<double> cont(o.twin_trials), disc(o.twin_trials);
  std::uint64_t violations = 0;
  const double n = static_cast<double>(o.twin_n);
#pragma omp parallel for schedule(dynamic) reduction(+ : violations)
  for (std::int64_t t = 0; t < static_cast<std::int64_t>(o.twin_trials); ++t) {
    const auto r = experiments::discretization_twin_run(o.twin_n, o.k, experiments::trial_seed(o.seed + 7, t));
    violations += r.invariant_violations;
    cont[static_cast<std::size_t>(t)] = (r.continuous_geometric - n) / n;
    disc[static_cast<std::size_t>(t)] = (r.discrete_geometric - n) / n;
  }
  const std::string p = params({{"n", n}, {"k", o.k}, {"trials", o.twin_trials}});
  rows.at_most("twin_register_invariant_violations", p, static_cast<double>(violations), 0.0);
  const double ratio = std::sqrt(stats::summarize(disc).variance / stats::summarize(cont).variance);
  rows.at_most("discrete_over_continuous_geometric_rse", p, ratio, 1.15);
}

void rounding_and_merge_checks(const SuiteOptions& o, Rows& rows) {
  std::mt19937_64 rng(o.seed ^ 0xfeedULL);
  for (double eps : {0.01, 0.1}) {
    double worst = 0.0;
    for (int s = 0; s < 100; ++s) {
      ContinuousSketch sketch({o.k, HashSeed{rng()}, Variant::StochasticAveraging});
      const std::uint64_t items = 1 + rng() % 20000;
      for (std::uint64_t i = 0; i < items; ++i) sketch.update(experiments::synthetic_item(rng()));
      const double z = geometric_estimate(sketch).value;
      const double zr = geometric_estimate(round_registers(sketch, eps)).value;
      worst = std::max(worst, std::abs(std::log(zr) - std::log(z)));
    }
    rows.at_most("rounding_log_distortion", params({{"eps", eps}, {"sketches", 100}}), worst, eps);
  }

  std::uint64_t mismatches = 0, codec_failures = 0, undetected = 0;
  for (int pair = 0; pair < 100; ++pair) {
    const auto variant = static_cast<Variant>(pair % 3);
    const SketchConfig cfg{variant == Variant::FullReplication ? 64u : o.k, HashSeed{rng()}, variant};
    Sketch a = make_sketch(cfg), b = make_sketch(cfg), u = make_sketch(cfg);
    const std::uint64_t lo_a = rng() % 1000, hi_a = lo_a + 1 + rng() % 2000;
    const std::uint64_t lo_b = rng() % 2000, hi_b = lo_b + 1 + rng() % 2000;
    for (std::uint64_t i = lo_a; i < hi_a; ++i) update(a, experiments::synthetic_item(i));
    for (std::uint64_t i = lo_b; i < hi_b; ++i) update(b, experiments::synthetic_item(i));
    for (std::uint64_t i = std::min(lo_a, lo_b); i < std::max(hi_a, hi_b); ++i) {
      if ((i >= lo_a && i < hi_a) || (i >= lo_b && i < hi_b)) update(u, experiments::synthetic_item(i));
    }
    const Sketch m = merge(a, b);
    for (auto est : {Estimator::Geometric, Estimator::Harmonic}) {
      if (estimate(m, est).value != estimate(u, est).value) ++mismatches;
    }
    auto bytes = codec::serialize(m);
    if (!(codec::deserialize(bytes) == m)) ++codec_failures;
    bytes[codec::kHeaderSize + rng() % (bytes.size() - codec::kHeaderSize - codec::kChecksumSize)] ^= 0x01;
    try {
      codec::deserialize(bytes);
      ++undetected;
    } catch (const codec::FormatError&) {
    }
  }
  rows.at_most("merge_union_estimate_mismatches", "pairs=100", static_cast<double>(mismatches), 0.0);
  rows.at_most("codec_round_trip_failures", "pairs=100", static_cast<double>(codec_failures), 0.0);
  rows.at_most("codec_undetected_corruptions", "pairs=100", static_cast<double>(undetected), 0.0);
}

}  // namespace

std::vector<CheckRow> run_validation_suite(const SuiteOptions& options) {
  Rows rows;
  multinomial_checks(options, rows);
  max_stability_checks(options, rows);
  estimator_checks(options, rows);
  discretization_checks(options, rows);
  rounding_and_merge_checks(options, rows);
  return rows.take();
}

}  // namespace gumbel_sketch::suite

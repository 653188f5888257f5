#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "gumbel_sketch/experiments.hpp"
#include "gumbel_sketch/gumbel.hpp"
#include "gumbel_sketch/sketch.hpp"
#include "gumbel_sketch/statistics.hpp"

using namespace gumbel_sketch;
using experiments::synthetic_item;

namespace {

constexpr HashSeed kFixtureSeed{0x5eed};
// tests/oracles/hash_oracle.py discrete_golden().
constexpr double kDiscreteGolden = 10054.778217023499;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr Variant kAllVariants[] = {Variant::FullReplication, Variant::StochasticAveraging, Variant::DiscretizedSA};

std::uint32_t k_for(Variant v) { return v == Variant::FullReplication ? 32 : 256; }

Sketch sketch_range(const SketchConfig& cfg, std::uint64_t lo, std::uint64_t hi) {
  Sketch s = make_sketch(cfg);
  for (std::uint64_t i = lo; i < hi; ++i) update(s, synthetic_item(i));
  return s;
}

// Register values as doubles, for variant-independent comparisons.
std::vector<double> values(const Sketch& s) {
  if (const auto* d = std::get_if<DiscreteSketch>(&s)) {
    std::vector<double> out;
    for (std::uint32_t i = 0; i < d->config().k; ++i) out.push_back(d->value(i));
    return out;
  }
  const auto r = std::get<ContinuousSketch>(s).registers();
  return {r.begin(), r.end()};
}

}  // namespace

TEST_CASE("new") {
  const ContinuousSketch fr({4, kFixtureSeed, Variant::FullReplication});
  for (double r : fr.registers()) CHECK(r == kNegInf);

  for (Variant v : kAllVariants) {
    const SketchConfig cfg{64, kFixtureSeed, v};
    CHECK(make_sketch(cfg) == make_sketch(cfg));
  }
  CHECK_THROWS_AS(make_sketch({0, kFixtureSeed, Variant::StochasticAveraging}), std::invalid_argument);
  CHECK_THROWS_AS(ContinuousSketch({4, kFixtureSeed, Variant::DiscretizedSA}), std::invalid_argument);
  CHECK_THROWS_AS(DiscreteSketch({4, kFixtureSeed, Variant::StochasticAveraging}), std::invalid_argument);
}

// Initial registers from tests/oracles/hash_oracle.py.
TEST_CASE("initial registers match the reference construction") {
  const ContinuousSketch sa({4, HashSeed{7}, Variant::StochasticAveraging});
  const std::vector<double> expected{-1.0247996425944028, 1.9331888586931072, -0.46136317731172877,
                                     0.4669723720279873};
  for (std::size_t i = 0; i < 4; ++i) CHECK(sa.registers()[i] == doctest::Approx(expected[i]).epsilon(1e-15));

  const DiscreteSketch d({4, HashSeed{7}, Variant::DiscretizedSA});
  CHECK(std::vector<std::int8_t>(d.registers().begin(), d.registers().end()) == std::vector<std::int8_t>{-1, 2, -1, 1});
}

TEST_CASE("discrete init is the shift-rounded continuous init") {
  const ContinuousSketch sa({1024, kFixtureSeed, Variant::StochasticAveraging});
  const DiscreteSketch d({1024, kFixtureSeed, Variant::DiscretizedSA});
  for (std::uint32_t i = 0; i < 1024; ++i) {
    const double x = sa.registers()[i];
    REQUIRE(d.value(i) > x - 1.0);
    REQUIRE(d.value(i) <= x);
    REQUIRE(d.value(i) == shift_round(x, d.shifts()[i]));
  }
}

TEST_CASE("updates are idempotent and monotone") {
  for (Variant v : kAllVariants) {
    CAPTURE(to_string(v));
    Sketch s = make_sketch({k_for(v), kFixtureSeed, v});
    std::mt19937_64 rng(1);
    for (int step = 0; step < 2000; ++step) {
      const auto item = synthetic_item(rng() % 500);
      const auto before = values(s);
      update(s, item);
      const auto once = values(s);
      update(s, item);
      REQUIRE(values(s) == once);
      for (std::size_t i = 0; i < once.size(); ++i) REQUIRE(once[i] >= before[i]);
    }
  }
}

TEST_CASE("stochastic averaging touches one register per update") {
  Sketch s = make_sketch({256, kFixtureSeed, Variant::StochasticAveraging});
  for (std::uint64_t i = 0; i < 300; ++i) {
    const auto before = values(s);
    update(s, synthetic_item(i));
    const auto after = values(s);
    int changed = 0;
    for (std::size_t r = 0; r < after.size(); ++r) changed += after[r] != before[r];
    REQUIRE(changed <= 1);
  }
}

TEST_CASE("multiset equals its support set") {
  std::mt19937_64 rng(2);
  for (Variant v : kAllVariants) {
    for (int rep = 0; rep < 10; ++rep) {
      const SketchConfig cfg{k_for(v), HashSeed{rng()}, v};
      std::vector<std::uint64_t> multiset;
      for (int i = 0; i < 400; ++i) multiset.push_back(rng() % 150);
      std::vector<std::uint64_t> support = multiset;
      std::sort(support.begin(), support.end());
      support.erase(std::unique(support.begin(), support.end()), support.end());

      Sketch a = make_sketch(cfg), b = make_sketch(cfg);
      for (auto i : multiset) update(a, synthetic_item(i));
      for (auto i : support) update(b, synthetic_item(i));
      REQUIRE(a == b);

      std::shuffle(multiset.begin(), multiset.end(), rng);
      Sketch c = make_sketch(cfg);
      for (auto i : multiset) update(c, synthetic_item(i));
      REQUIRE(a == c);
    }
  }
}

TEST_CASE("shift-rounded twin tracks the continuous sketch") {
  ContinuousSketch cont({128, kFixtureSeed, Variant::StochasticAveraging});
  DiscreteSketch disc({128, kFixtureSeed, Variant::DiscretizedSA});
  for (std::uint64_t i = 0; i < 20000; ++i) {
    const auto item = synthetic_item(i * 7919);
    cont.update(item);
    disc.update(item);
    if (i % 997 == 0) {
      for (std::uint32_t b = 0; b < 128; ++b) {
        REQUIRE(disc.value(b) == std::floor(cont.registers()[b] + disc.shifts()[b]) - disc.shifts()[b]);
      }
    }
  }
}

TEST_CASE("geometric estimate formulas") {
  SUBCASE("stochastic averaging at gamma gives k") {
    const SketchConfig cfg{64, kFixtureSeed, Variant::StochasticAveraging};
    const auto s = ContinuousSketch::from_registers(cfg, std::vector<double>(64, gumbel::kEulerGamma));
    CHECK(geometric_estimate(s).value == doctest::Approx(64.0).epsilon(1e-14));
  }
  SUBCASE("full replication inverts E[X] = gamma + ln n") {
    const SketchConfig cfg{1, kFixtureSeed, Variant::FullReplication};
    const auto s = ContinuousSketch::from_registers(cfg, {gumbel::kEulerGamma + std::log(100.0)});
    CHECK(geometric_estimate(s).value == doctest::Approx(100.0).epsilon(1e-13));
  }
  SUBCASE("discrete adds the one-half rounding correction") {
    const SketchConfig cfg{2, kFixtureSeed, Variant::DiscretizedSA};
    const auto d = DiscreteSketch::from_registers(cfg, {3, 4});
    const double mean = (d.value(0) + d.value(1)) / 2.0;
    CHECK(geometric_estimate(d).value ==
          doctest::Approx(2.0 * std::exp(-gumbel::kEulerGamma + 0.5 + mean)).epsilon(1e-14));
  }
  SUBCASE("empty full replication is an error") {
    const ContinuousSketch s({8, kFixtureSeed, Variant::FullReplication});
    CHECK_THROWS_AS(geometric_estimate(s), EmptySketchError);
    CHECK_THROWS_AS(harmonic_estimate(s), EmptySketchError);
  }
  SUBCASE("predicted rse") {
    CHECK(geometric_estimate(make_sketch({100, kFixtureSeed, Variant::StochasticAveraging})).predicted_rse ==
          doctest::Approx(std::numbers::pi / std::sqrt(6.0) / 10.0));
    CHECK(predicted_rse(Estimator::Geometric, Variant::DiscretizedSA, 100) ==
          doctest::Approx(std::sqrt(gumbel::kVariance + 0.25) / 10.0));
    CHECK(predicted_rse(Estimator::Harmonic, Variant::FullReplication, 100) == doctest::Approx(0.1));
    CHECK(predicted_rse(Estimator::Harmonic, Variant::DiscretizedSA, 100) ==
          doctest::Approx(std::sqrt(2.0 / (std::numbers::e - 1.0)) / 10.0));
  }
}

TEST_CASE("harmonic estimate formulas") {
  CHECK(harmonic_estimate(ContinuousSketch::from_registers({16, kFixtureSeed, Variant::FullReplication},
                                                           std::vector<double>(16, 0.0)))
            .value == doctest::Approx(1.0));
  CHECK(harmonic_estimate(ContinuousSketch::from_registers({16, kFixtureSeed, Variant::StochasticAveraging},
                                                           std::vector<double>(16, 0.0)))
            .value == doctest::Approx(15.0));
  // The -1 correction is clamped at zero.
  CHECK(harmonic_estimate(ContinuousSketch::from_registers({1, kFixtureSeed, Variant::StochasticAveraging}, {-5.0}))
            .value == 0.0);

  const SketchConfig dcfg{2, kFixtureSeed, Variant::DiscretizedSA};
  const auto d = DiscreteSketch::from_registers(dcfg, {5, 6});
  const double s = std::exp(-d.value(0)) + std::exp(-d.value(1));
  CHECK(harmonic_estimate(d, DiscreteHarmonic::additive()).value == doctest::Approx(2.0 / (0.5 + s / 2.0) - 1.0));
  CHECK(harmonic_estimate(d, DiscreteHarmonic::additive(0.25)).value == doctest::Approx(2.0 / (0.25 + s / 2.0) - 1.0));
  CHECK(harmonic_estimate(d, DiscreteHarmonic::calibrated()).value ==
        doctest::Approx(4.0 * (std::numbers::e - 1.0) / s - 1.0));
  CHECK(harmonic_estimate(d, DiscreteHarmonic::calibrated(0.0)).value == doctest::Approx(4.0 / s - 1.0));
  CHECK(analytic_register_offset() == doctest::Approx(0.54132485461291810));
}

TEST_CASE("stochastic averaging harmonic estimate is accurate at scale") {
  ContinuousSketch s({1024, kFixtureSeed, Variant::StochasticAveraging});
  for (std::uint64_t i = 0; i < 1'000'000; ++i) s.update(synthetic_item(i));
  const double ratio = harmonic_estimate(s).value / 1e6;
  CHECK(std::abs(ratio - 1.0) <= 3.0 / std::sqrt(1024.0));
}

// Golden value from the reference construction; also cross-checked against the
// continuous twin, whose geometric estimate differs by a factor in (e^-1/2, e^1/2].
TEST_CASE("discretized golden stream") {
  DiscreteSketch d({256, kFixtureSeed, Variant::DiscretizedSA});
  ContinuousSketch c({256, kFixtureSeed, Variant::StochasticAveraging});
  for (std::uint64_t i = 0; i < 10000; ++i) {
    d.update(synthetic_item(i));
    c.update(synthetic_item(i));
  }
  const double zd = geometric_estimate(d).value;
  const double zc = geometric_estimate(c).value;
  CHECK(std::abs(std::log(zd / zc)) <= 0.5);
  CHECK(zd == doctest::Approx(kDiscreteGolden).epsilon(1e-3));
}

TEST_CASE("merge") {
  for (Variant v : kAllVariants) {
    CAPTURE(to_string(v));
    const SketchConfig cfg{k_for(v), kFixtureSeed, v};
    const Sketch a = sketch_range(cfg, 1, 501);
    const Sketch b = sketch_range(cfg, 300, 901);
    CHECK(merge(a, a) == a);
    CHECK(merge(a, b) == merge(b, a));
    CHECK(merge(a, b) == sketch_range(cfg, 1, 901));
    CHECK(merge(merge(a, b), make_sketch(cfg)) == merge(a, b));
  }
  const Sketch a = make_sketch({64, kFixtureSeed, Variant::StochasticAveraging});
  CHECK_THROWS_AS(merge(a, make_sketch({64, HashSeed{1}, Variant::StochasticAveraging})), IncompatibleConfigError);
  CHECK_THROWS_AS(merge(a, make_sketch({32, kFixtureSeed, Variant::StochasticAveraging})), IncompatibleConfigError);
  CHECK_THROWS_AS(merge(a, make_sketch({64, kFixtureSeed, Variant::DiscretizedSA})), IncompatibleConfigError);
  CHECK_THROWS_AS(merge(a, make_sketch({64, kFixtureSeed, Variant::FullReplication})), IncompatibleConfigError);
}

TEST_CASE("round_registers") {
  const SketchConfig cfg{1, kFixtureSeed, Variant::FullReplication};
  const auto one = ContinuousSketch::from_registers(cfg, {1.26});
  const auto rounded = round_registers(one, 0.5);
  CHECK(rounded.registers()[0] == 1.5);
  const double ratio = geometric_estimate(rounded).value / geometric_estimate(one).value;
  CHECK(ratio >= std::exp(-0.5));
  CHECK(ratio <= std::exp(0.5));

  const auto multiples =
      ContinuousSketch::from_registers({3, kFixtureSeed, Variant::FullReplication}, {-0.75, 0.25, 2.5});
  CHECK(round_registers(multiples, 0.25) == multiples);

  const ContinuousSketch empty({4, kFixtureSeed, Variant::FullReplication});
  CHECK(round_registers(empty, 0.1) == empty);
  CHECK_THROWS_AS(round_registers(empty, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(round_registers(empty, -1.0), std::invalid_argument);

  std::mt19937_64 rng(9);
  for (int rep = 0; rep < 20; ++rep) {
    ContinuousSketch s({128, HashSeed{rng()}, Variant::FullReplication});
    for (int i = 0; i < 200; ++i) s.update(synthetic_item(rng()));
    for (double eps : {0.01, 0.3}) {
      const auto r = round_registers(s, eps);
      CHECK(std::abs(std::log(geometric_estimate(r).value / geometric_estimate(s).value)) <= eps);
      CHECK(std::abs(std::log(harmonic_estimate(r).value / harmonic_estimate(s).value)) <= eps);
    }
  }
}

TEST_CASE("shift_round") {
  CHECK(shift_round(1.9, 0.25) == doctest::Approx(1.75));
  CHECK(shift_round(3.0, 0.0) == 3.0);

  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> x_dist(-20.0, 40.0), c_dist(0.0, 1.0);
  for (int i = 0; i < 10000; ++i) {
    const double x = x_dist(rng), y = x_dist(rng), c = c_dist(rng);
    REQUIRE(std::max(shift_round(x, c), shift_round(y, c)) == shift_round(std::max(x, y), c));
    REQUIRE(shift_round(x, c) <= x);
    REQUIRE(shift_round(x, c) > x - 1.0);
  }

  // For c ~ U[0, 1), f_c(x) ~ U[x - 1, x].
  const double x = 2.3;
  std::vector<double> samples(100'000);
  for (auto& s : samples) s = shift_round(x, c_dist(rng));
  const double d = stats::ks_statistic(samples, [x](double v) { return std::clamp(v - (x - 1.0), 0.0, 1.0); });
  CHECK(d < stats::ks_critical_1pct(samples.size()));
}

TEST_CASE("discrete registers stay far from saturation") {
  const std::uint32_t k = 1u << 16;
  DiscreteSketch d({k, kFixtureSeed, Variant::DiscretizedSA});
  for (std::uint64_t i = 0; i < 1'000'000; ++i) d.update(synthetic_item(i));
  const double upper = 2.0 * std::log(1e6) + 10.0;
  for (std::uint32_t i = 0; i < k; ++i) {
    REQUIRE(d.registers()[i] < kDiscreteMax);
    REQUIRE(d.registers()[i] > kDiscreteMin);
    REQUIRE(d.value(i) <= upper);
  }
}

TEST_CASE("from_registers validation") {
  CHECK_THROWS_AS(DiscreteSketch::from_registers({2, kFixtureSeed, Variant::DiscretizedSA}, {0, 96}),
                  std::invalid_argument);
  CHECK_THROWS_AS(DiscreteSketch::from_registers({2, kFixtureSeed, Variant::DiscretizedSA}, {0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(ContinuousSketch::from_registers({1, kFixtureSeed, Variant::StochasticAveraging}, {kNegInf}),
                  std::invalid_argument);
  CHECK_THROWS_AS(ContinuousSketch::from_registers({1, kFixtureSeed, Variant::FullReplication}, {std::nan("")}),
                  std::invalid_argument);
}

TEST_CASE("names round trip") {
  for (Variant v : kAllVariants) CHECK(parse_variant(to_string(v)) == v);
  CHECK(parse_variant("sa") == Variant::StochasticAveraging);
  CHECK(parse_estimator("geometric") == Estimator::Geometric);
  CHECK_THROWS_AS(parse_variant("hll"), std::invalid_argument);
}

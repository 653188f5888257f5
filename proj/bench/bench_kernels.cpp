// Times each OpenMP kernel against its serial reference and checks that both
// produce identical results.
//
//   gumbel_sketch_bench [items] [trials]

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "gumbel_sketch/experiments.hpp"
#include "gumbel_sketch/ingest.hpp"
#include "gumbel_sketch/multinomial.hpp"

namespace gs = gumbel_sketch;

namespace {

template <typename F>
double seconds(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void report(const char* name, double serial, double parallel, bool same) {
  std::printf("%-28s serial %8.3fs  parallel %8.3fs  speedup %5.2fx  %s\n", name, serial, parallel,
              serial / parallel, same ? "identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  const std::uint64_t items = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 2'000'000;
  const std::uint32_t trials = argc > 2 ? static_cast<std::uint32_t>(std::strtoul(argv[2], nullptr, 10)) : 64;
  std::printf("threads: %d\n", omp_get_max_threads());

  std::vector<std::string> storage;
  storage.reserve(items);
  for (std::uint64_t i = 0; i < items; ++i) storage.push_back(gs::experiments::synthetic_item(i));
  const std::vector<gs::Item> views(storage.begin(), storage.end());

  bool ok = true;
  for (auto variant : {gs::Variant::StochasticAveraging, gs::Variant::DiscretizedSA}) {
    const gs::SketchConfig cfg{4096, gs::HashSeed{42}, variant};
    gs::Sketch a = gs::make_sketch(cfg), b = a;
    const double ts = seconds([&] { a = gs::sketch_items_serial(cfg, views); });
    const double tp = seconds([&] { b = gs::sketch_items_parallel(cfg, views); });
    const bool same = a == b;
    ok = ok && same;
    report(("ingest " + std::string(gs::to_string(variant))).c_str(), ts, tp, same);
  }

  {
    const gs::experiments::ExperimentSpec spec{gs::Variant::StochasticAveraging, 100'000, 1024, trials, 7,
                                               gs::DiscreteHarmonic::calibrated()};
    std::vector<gs::experiments::TrialEstimates> a, b;
    const double ts = seconds([&] { a = gs::experiments::simulate_trials_serial(spec); });
    const double tp = seconds([&] { b = gs::experiments::simulate_trials(spec); });
    bool same = a.size() == b.size();
    for (std::size_t i = 0; same && i < a.size(); ++i) {
      same = a[i].geometric == b[i].geometric && a[i].harmonic == b[i].harmonic;
    }
    ok = ok && same;
    report("estimator trials", ts, tp, same);
  }

  {
    const gs::multinomial::MultinomialOracle oracle(1000, 32, gs::multinomial::MonteCarlo{200'000, 3});
    gs::multinomial::BucketStatistics a, b;
    const double ts = seconds([&] { a = oracle.evaluate_serial(); });
    const double tp = seconds([&] { b = oracle.evaluate(); });
    const bool same = a.mean_V == b.mean_V && a.mean_W == b.mean_W && a.mean_V2 == b.mean_V2;
    ok = ok && same;
    report("multinomial monte carlo", ts, tp, same);
  }

  {
    std::vector<double> a, b;
    const double ts = seconds([&] { a = gs::experiments::sample_maxima_serial(64, 200'000, 5); });
    const double tp = seconds([&] { b = gs::experiments::sample_maxima(64, 200'000, 5); });
    ok = ok && a == b;
    report("gumbel maxima", ts, tp, a == b);
  }
  return ok ? 0 : 1;
}

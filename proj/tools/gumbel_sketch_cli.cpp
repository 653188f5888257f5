// gumbel-sketch: build, estimate and merge Gumbel cardinality sketches, and
// run the statistical validation experiments.
//
// Exit status: 0 ok, 1 a validation check failed, 2 usage error, 3 I/O or format error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gumbel_sketch/codec.hpp"
#include "gumbel_sketch/experiments.hpp"
#include "gumbel_sketch/ingest.hpp"
#include "gumbel_sketch/sketch.hpp"
#include "gumbel_sketch/suite.hpp"
#include "json.hpp"

namespace gs = gumbel_sketch;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CliConfig {
  std::uint32_t k = 1024;
  std::uint64_t seed = 0;
  std::string variant = "discretized-sa";
  std::string estimator = "harmonic";
  std::string format;
  std::vector<std::string> inputs;
  std::string output;
  bool from_stream = false;
  std::string harmonic_norm = "calibrated";
  std::optional<double> norm_constant;

  // validate / simulate
  std::optional<std::uint64_t> n;
  std::optional<std::uint32_t> trials;
  std::optional<std::uint32_t> histogram_n;
  std::uint32_t samples = 100'000;
};

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path + ": cannot open for reading");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError(path + ": read error");
  return bytes;
}

gs::Sketch load_sketch(const std::string& path) {
  const auto bytes = read_file(path);
  try {
    return gs::codec::deserialize(bytes);
  } catch (const gs::codec::FormatError& e) {
    throw IoError(path + ": " + e.what());
  }
}

void write_output(const std::string& path, const std::string& data) {
  if (path.empty() || path == "-") {
    std::cout.write(data.data(), static_cast<std::streamsize>(data.size()));
    std::cout.flush();
    if (!std::cout) throw IoError("<stdout>: write error");
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path + ": cannot open for writing");
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw IoError(path + ": write error");
}

std::string to_bytes_string(const std::vector<std::uint8_t>& bytes) { return std::string(bytes.begin(), bytes.end()); }

gs::SketchConfig sketch_config(const CliConfig& cfg) { return {cfg.k, gs::HashSeed{cfg.seed}, gs::parse_variant(cfg.variant)}; }

std::uint64_t ingest_inputs(gs::Sketch& sketch, const std::vector<std::string>& inputs) {
  if (inputs.empty() || (inputs.size() == 1 && inputs[0] == "-")) return gs::ingest_lines(sketch, std::cin);
  std::uint64_t total = 0;
  for (const auto& path : inputs) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path + ": cannot open for reading");
    total += gs::ingest_lines(sketch, in);
    if (in.bad()) throw IoError(path + ": read error");
  }
  return total;
}

gs::DiscreteHarmonic harmonic_norm(const CliConfig& cfg) {
  if (cfg.harmonic_norm == "additive") return gs::DiscreteHarmonic::additive(cfg.norm_constant.value_or(0.5));
  return cfg.norm_constant ? gs::DiscreteHarmonic::calibrated(*cfg.norm_constant) : gs::DiscreteHarmonic::calibrated();
}

// sketch ---------------------------------------------------------------------

int cmd_sketch(const CliConfig& cfg) {
  gs::Sketch sketch = gs::make_sketch(sketch_config(cfg));
  const std::uint64_t count = ingest_inputs(sketch, cfg.inputs);
  write_output(cfg.output, to_bytes_string(gs::codec::serialize(sketch)));
  std::cerr << "consumed " << count << " items\n";
  return kExitOk;
}

// estimate -------------------------------------------------------------------

int cmd_estimate(const CliConfig& cfg, bool variant_given) {
  gs::Sketch sketch = gs::make_sketch({1, gs::HashSeed{}, gs::Variant::StochasticAveraging});
  if (cfg.from_stream) {
    sketch = gs::make_sketch(sketch_config(cfg));
    const auto count = ingest_inputs(sketch, cfg.inputs);
    std::cerr << "consumed " << count << " items\n";
  } else {
    sketch = load_sketch(cfg.inputs.front());
    const auto file_variant = gs::config_of(sketch).variant;
    if (variant_given && gs::parse_variant(cfg.variant) != file_variant) {
      throw UsageError("--variant " + cfg.variant + " does not match the sketch file variant " +
                       std::string(gs::to_string(file_variant)));
    }
  }

  const gs::SketchConfig& sc = gs::config_of(sketch);
  gs::Estimate est;
  try {
    est = gs::estimate(sketch, gs::parse_estimator(cfg.estimator), harmonic_norm(cfg));
  } catch (const gs::EmptySketchError& e) {
    throw IoError(e.what());
  }

  const std::string variant(gs::to_string(sc.variant));
  const std::string estimator(gs::to_string(est.estimator));
  std::ostringstream out;
  if (cfg.format == "csv") {
    out << "estimate,k,variant,estimator,predicted_rse\n"
        << format_double(est.value) << ',' << sc.k << ',' << variant << ',' << estimator << ','
        << format_double(est.predicted_rse) << '\n';
  } else if (cfg.format == "text") {
    out << "estimate: " << format_double(est.value) << "\nk: " << sc.k << "\nvariant: " << variant
        << "\nestimator: " << estimator << "\npredicted_rse: " << format_double(est.predicted_rse) << '\n';
  } else {
    json j = {{"estimate", est.value},
              {"k", sc.k},
              {"variant", variant},
              {"estimator", estimator},
              {"predicted_rse", est.predicted_rse}};
    out << j.dump() << '\n';
  }
  write_output(cfg.output, out.str());
  return kExitOk;
}

// merge ----------------------------------------------------------------------

int cmd_merge(const CliConfig& cfg) {
  std::vector<gs::Sketch> sketches;
  for (const auto& path : cfg.inputs) sketches.push_back(load_sketch(path));
  gs::Sketch acc = sketches.front();
  for (std::size_t i = 1; i < sketches.size(); ++i) {
    if (!(gs::config_of(sketches[i]) == gs::config_of(sketches.front()))) {
      throw IoError("incompatible config: " + cfg.inputs.front() + " and " + cfg.inputs[i] +
                    " differ in variant, k or seed");
    }
    acc = gs::merge(acc, sketches[i]);
  }
  write_output(cfg.output, to_bytes_string(gs::codec::serialize(acc)));
  return kExitOk;
}

// validate -------------------------------------------------------------------

int cmd_validate(const CliConfig& cfg) {
  gs::suite::SuiteOptions opt;
  opt.seed = cfg.seed;
  if (cfg.n) opt.n = *cfg.n;
  if (cfg.trials) opt.trials = *cfg.trials;
  opt.k = cfg.k;
  const auto rows = gs::suite::run_validation_suite(opt);

  bool all = true;
  std::ostringstream out;
  if (cfg.format == "json") {
    json arr = json::array();
    for (const auto& r : rows) {
      arr.push_back({{"experiment", r.experiment},
                     {"parameter", r.parameter},
                     {"observed", r.observed},
                     {"target", r.target},
                     {"pass", r.pass}});
    }
    out << arr.dump(2) << '\n';
  } else if (cfg.format == "text") {
    for (const auto& r : rows) {
      out << (r.pass ? "PASS " : "FAIL ") << r.experiment << " (" << r.parameter << "): " << format_double(r.observed)
          << " target " << r.target << '\n';
    }
  } else {
    out << "experiment,parameter,observed,target,pass\n";
    for (const auto& r : rows) {
      out << csv_field(r.experiment) << ',' << csv_field(r.parameter) << ',' << format_double(r.observed) << ','
          << csv_field(r.target) << ',' << (r.pass ? "true" : "false") << '\n';
    }
  }
  for (const auto& r : rows) all = all && r.pass;
  write_output(cfg.output, out.str());
  return all ? kExitOk : kExitCheckFailed;
}

// simulate -------------------------------------------------------------------

int cmd_simulate(const CliConfig& cfg) {
  std::ostringstream out;
  if (cfg.histogram_n) {
    const auto rows = gs::experiments::max_histogram(*cfg.histogram_n, cfg.samples, cfg.seed, -2.0, 10.0, 0.25);
    out << "bin_lo,bin_hi,empirical_density,gumbel_density,geometric_max_pmf\n";
    for (const auto& r : rows) {
      out << format_double(r.lo) << ',' << format_double(r.hi) << ',' << format_double(r.empirical_density) << ','
          << format_double(r.gumbel_density) << ',' << format_double(r.geometric_max_pmf) << '\n';
    }
    write_output(cfg.output, out.str());
    return kExitOk;
  }

  gs::experiments::ExperimentSpec spec{gs::parse_variant(cfg.variant), cfg.n.value_or(100'000), cfg.k,
                                       cfg.trials.value_or(200), cfg.seed, harmonic_norm(cfg)};
  const auto estimator = gs::parse_estimator(cfg.estimator);
  const auto trials = gs::experiments::simulate_trials(spec);
  const auto r =
      gs::experiments::summarize(spec, estimator, trials, gs::experiments::default_bound_multiplier(estimator));

  const std::string variant(gs::to_string(r.variant)), est(gs::to_string(r.estimator));
  if (cfg.format == "json") {
    json j = {{"variant", variant},
              {"estimator", est},
              {"n", r.n},
              {"k", r.k},
              {"trials", r.trials},
              {"empirical_rse", r.empirical_rse},
              {"mean_relative_error", r.mean_relative_error},
              {"coverage_fraction", r.coverage_fraction},
              {"bound_value", r.bound_value},
              {"predicted_rse", r.predicted_rse}};
    out << j.dump() << '\n';
  } else {
    out << "variant,estimator,n,k,trials,empirical_rse,mean_relative_error,coverage_fraction,bound_value,"
           "predicted_rse\n"
        << variant << ',' << est << ',' << r.n << ',' << r.k << ',' << r.trials << ',' << format_double(r.empirical_rse)
        << ',' << format_double(r.mean_relative_error) << ',' << format_double(r.coverage_fraction) << ','
        << format_double(r.bound_value) << ',' << format_double(r.predicted_rse) << '\n';
  }
  write_output(cfg.output, out.str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gumbel-distribution cardinality sketches"};
  app.require_subcommand(1);
  CliConfig cfg;

  const std::vector<std::string> variants{"full-replication", "stochastic-averaging", "discretized-sa",
                                          "full",             "sa",                   "discrete"};
  const std::vector<std::string> estimators{"geometric", "harmonic"};

  const auto add_sketch_flags = [&](CLI::App* sub) {
    sub->add_option("-k,--k", cfg.k, "Register count")->check(CLI::Range(1u, 1u << 24));
    sub->add_option("--seed", cfg.seed, "64-bit hash seed");
  };
  const auto add_variant = [&](CLI::App* sub) {
    return sub->add_option("--variant", cfg.variant, "Sketch variant")->check(CLI::IsMember(variants));
  };
  const auto add_estimator_flags = [&](CLI::App* sub) {
    sub->add_option("--estimator", cfg.estimator, "geometric or harmonic")->check(CLI::IsMember(estimators));
    sub->add_option("--harmonic-norm", cfg.harmonic_norm,
                    "Harmonic normalization for discretized-sa: calibrated or additive")
        ->check(CLI::IsMember({"calibrated", "additive"}));
    sub->add_option("--norm-constant", cfg.norm_constant,
                    "Override the normalization constant (register offset or additive term)");
  };

  auto* sketch = app.add_subcommand("sketch", "Sketch newline-delimited items into a sketch file");
  add_sketch_flags(sketch);
  add_variant(sketch);
  sketch->add_option("-i,--input", cfg.inputs, "Input files (default: standard input)");
  sketch->add_option("-o,--output", cfg.output, "Output sketch file (default: standard output)");

  auto* estimate = app.add_subcommand("estimate", "Estimate the distinct count of a sketch file or stream");
  add_sketch_flags(estimate);
  auto* estimate_variant = add_variant(estimate);
  add_estimator_flags(estimate);
  estimate->add_option("-i,--input", cfg.inputs, "Sketch file, or item files with --from-stream");
  estimate->add_flag("--from-stream", cfg.from_stream, "Treat inputs as newline-delimited items");
  estimate->add_option("--format", cfg.format, "json, csv or text")->check(CLI::IsMember({"json", "csv", "text"}));
  estimate->add_option("-o,--output", cfg.output, "Output path (default: standard output)");

  auto* merge = app.add_subcommand("merge", "Merge compatible sketch files");
  merge->add_option("-i,--input", cfg.inputs, "Sketch files (at least two)")->required();
  merge->add_option("-o,--output", cfg.output, "Output sketch file (default: standard output)");

  auto* validate = app.add_subcommand("validate", "Run the statistical validation checks");
  validate->add_option("-k,--k", cfg.k, "Register count for estimator experiments")->check(CLI::Range(16u, 1u << 20));
  validate->add_option("--seed", cfg.seed, "Master seed");
  validate->add_option("--n", cfg.n, "Distinct items per estimator trial")->check(CLI::Range(1ULL, 1ULL << 40));
  validate->add_option("--trials", cfg.trials, "Trials per estimator experiment");
  validate->add_option("--format", cfg.format, "csv, json or text")->check(CLI::IsMember({"json", "csv", "text"}));
  validate->add_option("-o,--output", cfg.output, "Output path (default: standard output)");

  auto* simulate = app.add_subcommand("simulate", "Run one estimator experiment or emit a max-of-n histogram");
  add_sketch_flags(simulate);
  add_variant(simulate);
  add_estimator_flags(simulate);
  simulate->add_option("--n", cfg.n, "Distinct items per trial")->check(CLI::Range(1ULL, 1ULL << 40));
  simulate->add_option("--trials", cfg.trials, "Number of trials");
  simulate->add_option("--emit-histogram", cfg.histogram_n, "Emit a histogram of max-of-N Gumbel(0) draws")
      ->check(CLI::Range(1u, 1u << 20));
  simulate->add_option("--samples", cfg.samples, "Histogram sample count")->check(CLI::Range(1000u, 100'000'000u));
  simulate->add_option("--format", cfg.format, "csv or json")->check(CLI::IsMember({"json", "csv"}));
  simulate->add_option("-o,--output", cfg.output, "Output path (default: standard output)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return e.get_exit_code() == 0 ? rc : kExitUsage;
  }

  try {
    // Flag-set validation happens before any input is consumed.
    const auto usage = [&](CLI::App* sub, const std::string& msg) {
      std::cerr << "error: " << msg << "\n\n" << sub->help();
      return kExitUsage;
    };
    if (*estimate) {
      if (!cfg.from_stream && cfg.inputs.size() != 1) return usage(estimate, "estimate needs exactly one sketch file");
      if (cfg.format.empty()) cfg.format = "json";
      return cmd_estimate(cfg, estimate_variant->count() > 0);
    }
    if (*merge) {
      if (cfg.inputs.size() < 2) return usage(merge, "merge needs at least two input sketch files");
      return cmd_merge(cfg);
    }
    if (*validate) {
      if (cfg.trials && *cfg.trials < gs::experiments::kMinTrials) {
        return usage(validate, "--trials must be at least " + std::to_string(gs::experiments::kMinTrials));
      }
      if (cfg.format.empty()) cfg.format = "csv";
      return cmd_validate(cfg);
    }
    if (*simulate) {
      if (cfg.histogram_n && (cfg.trials || cfg.n)) {
        return usage(simulate, "--emit-histogram cannot be combined with --n or --trials");
      }
      if (!cfg.histogram_n && cfg.trials && *cfg.trials < gs::experiments::kMinTrials) {
        return usage(simulate, "--trials must be at least " + std::to_string(gs::experiments::kMinTrials));
      }
      if (cfg.format.empty()) cfg.format = "csv";
      if (cfg.histogram_n && cfg.format != "csv") return usage(simulate, "--emit-histogram only supports csv");
      return cmd_simulate(cfg);
    }
    return cmd_sketch(cfg);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  }
}

#include <sys/resource.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "doctest.h"
#include "gumbel_sketch/codec.hpp"
#include "gumbel_sketch/sketch.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace gumbel_sketch;

namespace {

const std::string kCli = GUMBEL_SKETCH_CLI;
const fs::path kFixtures = GUMBEL_SKETCH_FIXTURES;
const std::string kItems = (kFixtures / "items_10k.txt").string();
const std::string kGolden = (kFixtures / "items_10k.gmbl").string();
constexpr const char* kFixtureFlags = " -k 256 --seed 24301";

struct Result {
  int code = -1;
  std::string out;
};

Result run(const std::string& args) {
  const std::string cmd = kCli + " " + args + " 2>/dev/null";
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  Result r;
  char buf[4096];
  std::size_t got;
  while ((got = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, got);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const fs::path& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary);
  out << data;
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("gumbel-cli-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
  static inline int counter = 0;
};

double estimate_of(const std::string& args) {
  const auto r = run("estimate " + args);
  REQUIRE(r.code == 0);
  return nlohmann::json::parse(r.out).at("estimate").get<double>();
}

}  // namespace

TEST_CASE("empty input yields the fresh sketch") {
  TempDir dir;
  spit(dir / "empty.txt", "");
  REQUIRE(run("sketch -k 64 --seed 9 -i " + (dir / "empty.txt") + " -o " + (dir / "e.gmbl")).code == 0);
  const auto bytes = codec::serialize(make_sketch({64, HashSeed{9}, Variant::DiscretizedSA}));
  CHECK(slurp(dir / "e.gmbl") == std::string(bytes.begin(), bytes.end()));
}

TEST_CASE("duplicates do not change the sketch") {
  TempDir dir;
  spit(dir / "once.txt", "x\ny\nz\n");
  spit(dir / "twice.txt", "x\ny\nx\nz\ny\nz\nz\n");
  REQUIRE(run("sketch -k 32 -i " + (dir / "once.txt") + " -o " + (dir / "a.gmbl")).code == 0);
  REQUIRE(run("sketch -k 32 -i " + (dir / "twice.txt") + " -o " + (dir / "b.gmbl")).code == 0);
  CHECK(slurp(dir / "a.gmbl") == slurp(dir / "b.gmbl"));
}

TEST_CASE("golden fixture") {
  TempDir dir;
  const auto r = run(std::string("sketch") + kFixtureFlags + " -i " + kItems);
  REQUIRE(r.code == 0);
  CHECK(r.out == slurp(kGolden));
  // Standard input gives the same bytes.
  CHECK(run(std::string("sketch") + kFixtureFlags + " < " + kItems).out == r.out);

  const double harmonic = estimate_of("-i " + kGolden);
  const double geometric = estimate_of("-i " + kGolden + " --estimator geometric");
  CHECK(harmonic == doctest::Approx(10685.02415909893).epsilon(1e-12));
  CHECK(geometric == doctest::Approx(10787.2023725318).epsilon(1e-12));
  const double rse = 0.08603537759913583;
  CHECK(std::abs(harmonic - geometric) <= 5 * rse * 10000);
  CHECK(estimate_of(std::string("--from-stream") + kFixtureFlags + " -i " + kItems) == harmonic);
}

TEST_CASE("estimate output formats") {
  const auto j = nlohmann::json::parse(run("estimate -i " + kGolden).out);
  CHECK(j.at("k") == 256);
  CHECK(j.at("variant") == "discretized-sa");
  CHECK(j.at("estimator") == "harmonic");
  CHECK(nlohmann::json::parse(j.dump()) == j);
  const auto csv = run("estimate --format csv -i " + kGolden);
  CHECK(csv.out.rfind("estimate,k,variant,estimator,predicted_rse\n", 0) == 0);
  CHECK(run("estimate --format text -i " + kGolden).out.find("k: 256") != std::string::npos);
  CHECK(run("estimate --variant sa -i " + kGolden).code == 2);
}

TEST_CASE("merge") {
  TempDir dir;
  std::vector<std::string> lines;
  {
    std::ifstream in(kItems);
    for (std::string l; std::getline(in, l);) lines.push_back(l);
  }
  std::string shard[3];
  for (std::size_t i = 0; i < lines.size(); ++i) shard[i % 3] += lines[i] + "\n";
  for (int s = 0; s < 3; ++s) {
    spit(dir / ("s" + std::to_string(s) + ".txt"), shard[s]);
    REQUIRE(run(std::string("sketch") + kFixtureFlags + " -i " + (dir / ("s" + std::to_string(s) + ".txt")) + " -o " +
                (dir / ("s" + std::to_string(s) + ".gmbl")))
                .code == 0);
  }
  const auto merged = run("merge -i " + (dir / "s0.gmbl") + " -i " + (dir / "s1.gmbl") + " -i " + (dir / "s2.gmbl"));
  REQUIRE(merged.code == 0);
  CHECK(merged.out == slurp(kGolden));
  const auto permuted = run("merge -i " + (dir / "s2.gmbl") + " -i " + (dir / "s0.gmbl") + " -i " + (dir / "s1.gmbl"));
  CHECK(permuted.out == merged.out);
  spit(dir / "m.gmbl", merged.out);
  CHECK(estimate_of("-i " + (dir / "m.gmbl")) == estimate_of("-i " + kGolden));

  CHECK(run("merge -i " + kGolden + " -i " + kGolden).out == slurp(kGolden));

  REQUIRE(run("sketch -k 128 --seed 24301 -i " + kItems + " -o " + (dir / "other.gmbl")).code == 0);
  CHECK(run("merge -i " + kGolden + " -i " + (dir / "other.gmbl")).code == 3);
  CHECK(run("merge -i " + kGolden).code == 2);
}

TEST_CASE("exit codes") {
  TempDir dir;
  CHECK(run("").code == 2);
  CHECK(run("frobnicate").code == 2);
  CHECK(run("sketch -k 0").code == 2);
  CHECK(run("sketch --variant bogus").code == 2);
  CHECK(run("estimate -i " + (dir / "missing.gmbl")).code == 3);
  spit(dir / "junk.gmbl", "not a sketch");
  CHECK(run("estimate -i " + (dir / "junk.gmbl")).code == 3);
  std::string corrupt = slurp(kGolden);
  corrupt[40] ^= 1;
  spit(dir / "corrupt.gmbl", corrupt);
  CHECK(run("estimate -i " + (dir / "corrupt.gmbl")).code == 3);
  CHECK(run("simulate --trials 1").code == 2);
  CHECK(run("simulate --emit-histogram 8 --n 100").code == 2);
  CHECK(run("validate --trials 5").code == 2);
  // A fresh full-replication sketch has no estimate.
  REQUIRE(run("sketch --variant full -k 8 -o " + (dir / "fr.gmbl") + " < /dev/null").code == 0);
  CHECK(run("estimate -i " + (dir / "fr.gmbl")).code == 3);
}

TEST_CASE("simulate") {
  const auto hist = run("simulate --emit-histogram 16 --samples 5000 --seed 3");
  REQUIRE(hist.code == 0);
  CHECK(hist.out.rfind("bin_lo,bin_hi,empirical_density,gumbel_density,geometric_max_pmf\n", 0) == 0);
  CHECK(std::count(hist.out.begin(), hist.out.end(), '\n') == 49);
  CHECK(run("simulate --emit-histogram 16 --samples 5000 --seed 3").out == hist.out);

  const auto sim = run("simulate --variant sa -k 64 --n 2000 --trials 30 --format json --seed 1");
  REQUIRE(sim.code == 0);
  const auto j = nlohmann::json::parse(sim.out);
  CHECK(j.at("trials") == 30);
  CHECK(j.at("predicted_rse").get<double>() == doctest::Approx(1.0 / 8));
  CHECK(run("simulate --variant sa -k 64 --n 2000 --trials 30 --format json --seed 1").out == sim.out);
}

TEST_CASE("sketching a 10^7 line stream runs in bounded memory") {
  TempDir dir;
  const std::string cmd = "seq 10000000 | " + kCli + " sketch -k 1024 -o " + (dir / "big.gmbl") + " 2>/dev/null";
  REQUIRE(std::system(cmd.c_str()) == 0);
  rusage usage{};
  getrusage(RUSAGE_CHILDREN, &usage);
  CHECK(usage.ru_maxrss < 32 * 1024);  // KiB
  const auto j = nlohmann::json::parse(run("estimate -i " + (dir / "big.gmbl")).out);
  CHECK(j.at("estimate").get<double>() == doctest::Approx(1e7).epsilon(5 * j.at("predicted_rse").get<double>()));
}

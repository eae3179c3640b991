#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <string>

#include <sys/wait.h>

#include "doctest.h"
#include "oracles.hpp"
#include "pgfrog/error.hpp"
#include "pgfrog/pulse_io.hpp"
#include "pgfrog/trace_io.hpp"

using namespace pgfrog;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("pgfrog_io_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return Errc::InvalidArgument;
}

int run(const std::string& args) {
  const int status = std::system((std::string(FROG_BINARY) + " " + args + " >/dev/null 2>&1").c_str());
  return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("doubles round-trip through text") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(rng) * std::pow(10.0, i % 40 - 20);
    CHECK(parse_double(format_double(v)) == v);
  }
  CHECK(parse_double(format_double(std::numeric_limits<double>::denorm_min())) == std::numeric_limits<double>::denorm_min());
  CHECK(code_of([] { parse_double("1.5x"); }) == Errc::ParseError);
  CHECK(code_of([] { parse_double(""); }) == Errc::ParseError);
}

TEST_CASE("pulse round trip") {
  TempDir dir;
  const PulseRecord rec{generate_random_pulse(TimeGrid::make(64, 0.8), 2.5, 11), 11, 2.5};
  save_pulse(dir.path / "p.json", rec);
  const auto back = load_pulse(dir.path / "p.json");
  CHECK(back.field == rec.field);
  CHECK(back.seed == rec.seed);
  CHECK(back.target_tbp == rec.target_tbp);

  const PulseRecord bare{oracle::random_field(16, 2), std::nullopt, std::nullopt};
  const auto b2 = pulse_from_json(pulse_to_json(bare));
  CHECK(b2.field == bare.field);
  CHECK_FALSE(b2.seed.has_value());

  CHECK(code_of([] { pulse_from_json("{"); }) == Errc::ParseError);
  CHECK(code_of([] { pulse_from_json(R"({"n": 16, "dt_fs": 1})"); }) == Errc::ParseError);
  CHECK(code_of([&] { load_pulse(dir.path / "missing.json"); }) == Errc::IoError);
}

TEST_CASE("trace round trip") {
  TempDir dir;
  const auto tr = synthesize_trace(generate_random_pulse(TimeGrid::make(64, 1.0), 2.5, 5));
  save_trace(dir.path / "t.frog", tr);
  const auto back = load_trace(dir.path / "t.frog");
  CHECK(back.n == tr.n);
  CHECK(back.dtau == tr.dtau);
  CHECK(back.domega == tr.domega);
  CHECK(back.values == tr.values);

  // A scaled copy comes back at unit peak.
  const auto loaded = trace_from_text(trace_to_text(tr.scaled(37.5)));
  CHECK(loaded.peak() == 1.0);
  CHECK(oracle::max_abs_diff(loaded.values, tr.values) < 1e-15);

  CHECK(code_of([] { trace_from_text("FROG-PG 1 2 2 1 1\n1 2\n3\n"); }) == Errc::ParseError);
  CHECK(code_of([] { trace_from_text("FROG-PG 1 2 3 1 1\n1 2 3\n1 2 3\n"); }) == Errc::ParseError);
  CHECK(code_of([] { trace_from_text("FROG-PG 1 2 2 1 1\n1 -2\n3 4\n"); }) == Errc::ParseError);
  CHECK(code_of([] { trace_from_text("FROG-PG 1 2 2 1 1\n1 nan\n3 4\n"); }) == Errc::ParseError);
  CHECK(code_of([] { trace_from_text("not a trace"); }) == Errc::ParseError);
  CHECK(code_of([&] { load_trace(dir.path / "none.frog"); }) == Errc::IoError);
}

TEST_CASE("metadata and spectrum files") {
  TempDir dir;
  const TraceMetadata meta{NoiseSpec{0.02, 0.005, 99}, 7, "noisy"};
  const auto back = metadata_from_json(metadata_to_json(meta));
  REQUIRE(back.noise.has_value());
  CHECK(back.noise->multiplicative_fraction == 0.02);
  CHECK(back.noise->additive_fraction == 0.005);
  CHECK(back.noise->seed == 99);
  CHECK(back.seed == 7);
  CHECK(back.provenance == "noisy");

  const auto tr = synthesize_trace(gaussian_pulse(TimeGrid::make(32, 1.0), 3.0));
  save_trace_with_metadata(dir.path / "g.frog", tr, meta);
  CHECK(fs::exists(sidecar_path(dir.path / "g.frog")));
  CHECK(sidecar_path(dir.path / "g.frog").filename() == "g.frog.json");

  const auto s = spectrum_of(generate_random_pulse(TimeGrid::make(64, 1.0), 2.5, 4));
  save_spectrum(dir.path / "s.csv", s, {}, "g.frog");
  CHECK(fs::exists(dir.path / "s.csv.json"));
  const auto sb = load_spectrum_csv(dir.path / "s.csv");
  CHECK(sb.intensity == s.intensity);
  CHECK(sb.grid.n == s.grid.n);
  CHECK(sb.grid.dt == doctest::Approx(s.grid.dt).epsilon(1e-12));
}

TEST_CASE("command line") {
  TempDir dir;
  const auto p = dir.path.string();
  REQUIRE(run("simulate --tbp 2.5 --seed 7 --out " + p + "/a") == 0);
  REQUIRE(run("simulate --tbp 2.5 --seed 7 --out " + p + "/b") == 0);
  for (const char* ext : {".pulse.json", ".clean.frog", ".noisy.frog", ".pre.frog", ".noisy.frog.json"})
    CHECK(read_text_file(p + "/a" + ext) == read_text_file(p + "/b" + ext));
  REQUIRE(run("simulate --tbp 2.5 --seed 8 --out " + p + "/c") == 0);
  CHECK(read_text_file(p + "/a.noisy.frog") != read_text_file(p + "/c.noisy.frog"));

  REQUIRE(run("simulate --tbp 2.5 --seed 7 --noise-mult 0 --noise-add 0 --out " + p + "/z") == 0);
  CHECK(load_trace(p + "/z.noisy.frog").values == load_trace(p + "/z.clean.frog").values);

  CHECK(run("retrieve --trace " + p + "/a.pre.frog --seed 1 --out " + p + "/r") == 0);
  CHECK(fs::exists(p + "/r.json"));
  CHECK(fs::exists(p + "/r.retrieved.frog"));
  CHECK(run("spectrum --trace " + p + "/a.pre.frog --out " + p + "/s.csv") == 0);
  CHECK(fs::exists(p + "/s.csv.json"));

  CHECK(run("retrieve --trace " + p + "/missing.frog") == 3);
  write_text_file(p + "/bad.frog", "FROG-PG 1 2 2 1 1\n1\n");
  CHECK(run("retrieve --trace " + p + "/bad.frog") == 2);
  CHECK(run("retrieve --trace " + p + "/a.pre.frog --scheme nonsense") == 2);
  CHECK(run("simulate") == 2);
}

#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pgfrog/marginals.hpp"
#include "pgfrog/pulse_io.hpp"
#include "pgfrog/rana.hpp"
#include "pgfrog/trace.hpp"

namespace pgfrog {

// One simulated measurement: pulse, clean trace, noisy trace and the
// preprocessed trace that retrievals consume.
struct SimulatedDataset {
  PulseRecord pulse;
  PulseStats stats;
  NoiseSpec noise;
  FrogTrace clean;
  FrogTrace noisy;
  FrogTrace preprocessed;
  bool off_table = false;  // (tbp, n) is not a default schedule pairing
};

// Noise seeded by derive_seed(seed, Noise). dt in fs.
SimulatedDataset simulate_dataset(double tbp, std::size_t n, std::uint64_t seed, double noise_mult = 0.01,
                                  double noise_add = 0.01, double dt = 1.0);

struct SimulateFiles {
  std::filesystem::path pulse, clean, noisy, preprocessed;
};

// Writes <prefix>.pulse.json, <prefix>.clean.frog, <prefix>.noisy.frog and
// <prefix>.pre.frog (each trace with a JSON sidecar).
SimulateFiles write_dataset(const SimulatedDataset& data, const std::filesystem::path& prefix);

enum class Scheme { Rana, Gp, GpSpectrum };
Scheme parse_scheme(const std::string& s);  // rana | gp | gp+spectrum; throws InvalidArgument
const char* to_string(Scheme s);

struct RetrieveOptions {
  Scheme scheme = Scheme::Rana;
  std::optional<std::filesystem::path> schedule_path;
  double p = kDefaultP;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::size_t max_iterations = kDefaultBaselineIterations;  // GP schemes only
};

// Schedule table: explicit path, else $FROG_SCHEDULE, else built-in rows.
std::vector<GridSchedule> resolve_schedules(const std::optional<std::filesystem::path>& path);

RetrievalResult run_scheme(const FrogTrace& trace, const RetrieveOptions& options);

std::string result_to_json(const RetrievalResult& result, const RetrieveOptions& options,
                           const std::string& trace_file);

struct PCalibrationReport {
  std::vector<double> tbps;
  std::vector<PCalibration> per_tbp;
  PCalibration combined;  // all pulses pooled
};

// count pulses per TBP on the grid paired with that TBP.
PCalibrationReport run_p_calibration(const std::vector<double>& tbps, std::size_t count, std::uint64_t seed,
                                     const std::vector<double>& p_grid, std::size_t threads = 1);
std::string calibration_to_csv(const PCalibrationReport& report);

struct RunSummary {
  bool converged = false;
  double g = 0.0;
  double g_prime = 0.0;
  double wall_time_s = 0.0;
  std::size_t iterations = 0;
};

struct PulseBenchRecord {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  double tbp_measured = 0.0;
  double spectrum_rms = 0.0;
  RunSummary rana;
  RunSummary gp;
  std::optional<RunSummary> gp_spectrum;
};

struct Quantiles {
  double min = 0.0, q25 = 0.0, median = 0.0, q75 = 0.0, max = 0.0;
};
Quantiles quantiles(std::vector<double> values);

struct BenchRow {
  double tbp = 0.0;
  std::size_t n = 0;
  std::size_t count = 0;
  double rana_convergence_fraction = 0.0;
  double gp_first_guess_fraction = 0.0;
  std::optional<double> gp_spectrum_fraction;
  double mean_time_rana_s = 0.0;
  double mean_time_gp_s = 0.0;  // over converged GP runs only; NaN when none converged
  double time_ratio = 0.0;      // mean_time_rana_s / mean_time_gp_s
  Quantiles g_quantiles;        // RANA final g
  Quantiles spectrum_rms_quantiles;
  std::vector<PulseBenchRecord> pulses;
};

struct BenchReport {
  std::vector<BenchRow> rows;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::string environment;
};

struct BenchOptions {
  std::vector<double> tbps;
  std::size_t count = 10;
  std::uint64_t seed = 0;
  std::optional<std::filesystem::path> schedule_path;
  std::size_t threads = 1;
  double p = kDefaultP;
  std::size_t gp_iterations = kDefaultBaselineIterations;
  bool run_rana = true;
  bool run_gp = true;
  bool with_spectrum_ablation = false;
  // Per-pulse result JSONs land here as each pulse finishes.
  std::optional<std::filesystem::path> audit_dir;
  const std::atomic<bool>* cancel = nullptr;  // stop scheduling new pulses when set
};

// Pulse i of a TBP row uses seed derive_seed(derive_seed(seed, Bench, row), Pulse, i).
BenchReport run_bench(const BenchOptions& options);
BenchRow aggregate_row(double tbp, std::size_t n, std::vector<PulseBenchRecord> pulses);

std::string pulse_record_to_json(const PulseBenchRecord& record);
PulseBenchRecord pulse_record_from_json(const std::string& text);
std::string bench_to_json(const BenchReport& report);
std::string bench_to_csv(const BenchReport& report);

}  // namespace pgfrog

// frog: simulate PG FROG data, retrieve pulses, calibrate p, benchmark.
// Exit codes: 0 ran (even when a retrieval did not converge), 2 bad input,
// 3 I/O failure.
#include <atomic>
#include <csignal>
#include <cstdio>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "pgfrog/bench.hpp"
#include "pgfrog/error.hpp"
#include "pgfrog/trace_io.hpp"

using namespace pgfrog;

namespace {

std::atomic<bool> g_interrupted{false};

void on_sigint(int) { g_interrupted = true; }

int exit_code_for(const Error& e) { return e.code() == Errc::IoError ? 3 : 2; }

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(parse_double(item));
  if (out.empty()) throw Error(Errc::InvalidArgument, "empty list '" + s + "'");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PG FROG simulation, spectrum retrieval and RANA pulse retrieval"};
  app.require_subcommand(1);

  // simulate
  double sim_tbp = 2.5, noise_mult = 0.01, noise_add = 0.01, sim_dt = 1.0;
  std::size_t sim_n = 0;
  std::uint64_t sim_seed = 0;
  std::string sim_out = "pulse";
  auto* sim = app.add_subcommand("simulate", "random pulse -> pulse JSON, clean/noisy/preprocessed traces");
  sim->add_option("--tbp", sim_tbp, "target rms time-bandwidth product")->required();
  sim->add_option("--n", sim_n, "grid size (default: paired with --tbp)");
  sim->add_option("--seed", sim_seed, "root seed");
  sim->add_option("--noise-mult", noise_mult, "multiplicative noise fraction");
  sim->add_option("--noise-add", noise_add, "additive noise fraction of the peak");
  sim->add_option("--dt", sim_dt, "time step in fs");
  sim->add_option("--out", sim_out, "output prefix");

  // retrieve
  std::string ret_trace, ret_scheme = "rana", ret_out = "result", ret_schedule;
  RetrieveOptions ret;
  bool diagnostics = false;
  auto* rcmd = app.add_subcommand("retrieve", "retrieve a pulse from a trace file");
  rcmd->add_option("--trace", ret_trace, "trace file")->required();
  rcmd->add_option("--scheme", ret_scheme, "rana | gp | gp+spectrum");
  rcmd->add_option("--schedule", ret_schedule, "schedule JSON (default: $FROG_SCHEDULE or built-in)");
  rcmd->add_option("--p", ret.p, "marginal power p");
  rcmd->add_option("--seed", ret.seed, "seed");
  rcmd->add_option("--threads", ret.threads, "worker threads (0 = all cores)");
  rcmd->add_option("--max-iters", ret.max_iterations, "iteration budget for the gp schemes");
  rcmd->add_option("--out", ret_out, "output prefix");
  rcmd->add_flag("--diagnostics", diagnostics, "also write the per-iteration g history CSV");

  // spectrum
  std::string spec_trace, spec_out = "spectrum.csv";
  SpectrumRetrievalOptions spec_opts;
  auto* scmd = app.add_subcommand("spectrum", "spectrum estimate from the trace marginals");
  scmd->add_option("--trace", spec_trace, "trace file")->required();
  scmd->add_option("--p", spec_opts.p, "marginal power p");
  scmd->add_option("--delta", spec_opts.delta, "division threshold");
  scmd->add_option("--out", spec_out, "CSV path");

  // calibrate-p
  std::string cal_tbps = "2,5,10", cal_out = "calibration.csv";
  std::size_t cal_count = 50, cal_threads = 1;
  std::uint64_t cal_seed = 0;
  auto* ccmd = app.add_subcommand("calibrate-p", "mean rms vs p over random pulses");
  ccmd->add_option("--tbp", cal_tbps, "comma-separated TBP list");
  ccmd->add_option("--count", cal_count, "pulses per TBP (>= 10)");
  ccmd->add_option("--seed", cal_seed, "root seed");
  ccmd->add_option("--threads", cal_threads, "worker threads (0 = all cores)");
  ccmd->add_option("--out", cal_out, "CSV path");

  // bench
  std::string bench_tbps = "2.5", bench_schedule, bench_out = "bench", bench_format = "csv";
  BenchOptions bench;
  bool no_rana = false, no_gp = false;
  auto* bcmd = app.add_subcommand("bench", "RANA vs single-guess GP statistics");
  bcmd->add_option("--tbp", bench_tbps, "comma-separated TBP list");
  bcmd->add_option("--count", bench.count, "pulses per TBP");
  bcmd->add_option("--seed", bench.seed, "root seed");
  bcmd->add_option("--schedule", bench_schedule, "schedule JSON");
  bcmd->add_option("--threads", bench.threads, "worker threads (0 = all cores)");
  bcmd->add_option("--gp-iters", bench.gp_iterations, "GP baseline iteration budget");
  bcmd->add_option("--p", bench.p, "marginal power p");
  bcmd->add_option("--out", bench_out, "output prefix (<out>.csv/.json and <out>_pulses/)");
  bcmd->add_option("--format", bench_format, "csv | json (report written in both; this one echoed)")
      ->check(CLI::IsMember({"csv", "json"}));
  bcmd->add_flag("--ablation", bench.with_spectrum_ablation, "also run GP seeded with the retrieved spectrum");
  bcmd->add_flag("--no-rana", no_rana, "skip RANA");
  bcmd->add_flag("--no-gp", no_gp, "skip the GP baseline");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*sim) {
      const std::size_t n = sim_n ? sim_n : grid_size_for_tbp(sim_tbp);
      const auto data = simulate_dataset(sim_tbp, n, sim_seed, noise_mult, noise_add, sim_dt);
      if (data.off_table)
        std::fprintf(stderr, "warning: (tbp %g, n %zu) is not a default schedule pairing\n", sim_tbp, n);
      const auto files = write_dataset(data, sim_out);
      std::printf("tbp %.6g (target %g)\n", data.stats.tbp, sim_tbp);
      std::printf("wrote %s %s %s %s\n", files.pulse.c_str(), files.clean.c_str(), files.noisy.c_str(),
                  files.preprocessed.c_str());
    } else if (*rcmd) {
      ret.scheme = parse_scheme(ret_scheme);
      if (!ret_schedule.empty()) ret.schedule_path = ret_schedule;
      const auto trace = load_trace(ret_trace);
      const auto result = run_scheme(trace, ret);
      write_text_file(ret_out + ".json", result_to_json(result, ret, ret_trace));
      save_trace_with_metadata(ret_out + ".retrieved.frog", synthesize_trace(result.field),
                               {std::nullopt, ret.seed, "retrieved"});
      if (diagnostics) {
        std::string csv = "iteration,g\n";
        for (std::size_t i = 0; i < result.g_history.size(); ++i)
          csv += std::to_string(i + 1) + "," + format_double(result.g_history[i]) + "\n";
        write_text_file(ret_out + ".g_history.csv", csv);
      }
      std::printf("%s: converged %s g %.5g g' %.4g iterations %zu time %.3f s\n", ret_scheme.c_str(),
                  result.converged ? "true" : "false", result.metrics.g, result.metrics.g_prime,
                  result.iterations_total, result.wall_time_s);
    } else if (*scmd) {
      const auto trace = load_trace(spec_trace);
      save_spectrum(spec_out, retrieve_spectrum(trace, spec_opts), spec_opts, spec_trace);
      std::printf("wrote %s\n", spec_out.c_str());
    } else if (*ccmd) {
      const auto report = run_p_calibration(parse_list(cal_tbps), cal_count, cal_seed, default_p_grid(), cal_threads);
      write_text_file(cal_out, calibration_to_csv(report));
      std::printf("p* = %.2f\n", report.combined.p_star);
    } else if (*bcmd) {
      bench.tbps = parse_list(bench_tbps);
      if (!bench_schedule.empty()) bench.schedule_path = bench_schedule;
      bench.run_rana = !no_rana;
      bench.run_gp = !no_gp;
      bench.audit_dir = bench_out + "_pulses";
      bench.cancel = &g_interrupted;
      std::signal(SIGINT, on_sigint);
      const auto report = run_bench(bench);
      const auto csv = bench_to_csv(report);
      const auto json = bench_to_json(report);
      write_text_file(bench_out + ".csv", csv);
      write_text_file(bench_out + ".json", json);
      std::fputs((bench_format == "json" ? json : csv).c_str(), stdout);
      if (g_interrupted) std::fprintf(stderr, "interrupted: partial results written\n");
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e);
  } catch (const std::filesystem::filesystem_error& e) {
    std::fprintf(stderr, "error [io]: %s\n", e.what());
    return 3;
  }
  return 0;
}

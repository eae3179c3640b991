#include "pgfrog/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <mutex>
#include <thread>

#include "json.hpp"
#include "pgfrog/error.hpp"
#include "pgfrog/parallel.hpp"
#include "pgfrog/random.hpp"
#include "pgfrog/trace_io.hpp"

namespace pgfrog {

using nlohmann::json;

namespace {

bool on_table(double tbp, std::size_t n) {
  for (const auto& row : default_schedules())
    if (row.tbp_label == tbp && row.n_full == n) return true;
  return false;
}

}  // namespace

SimulatedDataset simulate_dataset(double tbp, std::size_t n, std::uint64_t seed, double noise_mult,
                                  double noise_add, double dt) {
  if (!(tbp > 0.0)) throw Error(Errc::InvalidArgument, "tbp must be positive");
  if (noise_mult < 0.0 || noise_add < 0.0) throw Error(Errc::InvalidArgument, "noise levels must be >= 0");
  const auto grid = TimeGrid::make(n, dt);
  auto field = generate_random_pulse(grid, tbp, seed);
  const auto stats = compute_stats(field);
  NoiseSpec noise{noise_mult, noise_add, derive_seed(seed, Stream::Noise)};
  auto clean = synthesize_trace(field);
  auto noisy = (noise_mult == 0.0 && noise_add == 0.0) ? clean : add_noise(clean, noise);
  auto pre = preprocess(noisy);
  return SimulatedDataset{PulseRecord{std::move(field), seed, tbp}, stats, noise, std::move(clean),
                          std::move(noisy), std::move(pre), !on_table(tbp, n)};
}

SimulateFiles write_dataset(const SimulatedDataset& data, const std::filesystem::path& prefix) {
  const std::string base = prefix.string();
  SimulateFiles files{base + ".pulse.json", base + ".clean.frog", base + ".noisy.frog", base + ".pre.frog"};
  save_pulse(files.pulse, data.pulse);
  save_trace_with_metadata(files.clean, data.clean, {std::nullopt, data.pulse.seed, "clean"});
  save_trace_with_metadata(files.noisy, data.noisy, {data.noise, data.pulse.seed, "noisy"});
  save_trace_with_metadata(files.preprocessed, data.preprocessed, {data.noise, data.pulse.seed, "preprocessed"});
  return files;
}

Scheme parse_scheme(const std::string& s) {
  if (s == "rana") return Scheme::Rana;
  if (s == "gp") return Scheme::Gp;
  if (s == "gp+spectrum") return Scheme::GpSpectrum;
  throw Error(Errc::InvalidArgument, "unknown scheme '" + s + "'");
}

const char* to_string(Scheme s) {
  switch (s) {
    case Scheme::Rana: return "rana";
    case Scheme::Gp: return "gp";
    case Scheme::GpSpectrum: return "gp+spectrum";
  }
  return "?";
}

std::vector<GridSchedule> resolve_schedules(const std::optional<std::filesystem::path>& path) {
  if (path) return load_schedules(*path);
  if (const char* env = std::getenv("FROG_SCHEDULE"); env && *env) return load_schedules(env);
  return default_schedules();
}

namespace {

GridSchedule schedule_for(const std::vector<GridSchedule>& table, double tbp, std::size_t n) {
  for (const auto& row : table)
    if (row.tbp_label == tbp && row.n_full == n) return row;
  return schedule_for_size(table, n);
}

}  // namespace

RetrievalResult run_scheme(const FrogTrace& trace, const RetrieveOptions& options) {
  if (options.scheme == Scheme::Rana) {
    const auto schedule = schedule_for_size(resolve_schedules(options.schedule_path), trace.n);
    RanaOptions ro;
    ro.threads = options.threads;
    return rana_retrieve(trace, schedule, options.p, options.seed, ro);
  }
  BaselineOptions bo;
  bo.with_retrieved_spectrum = options.scheme == Scheme::GpSpectrum;
  bo.p = options.p;
  // Use the row's cutoffs when the size is tabulated.
  for (const auto& row : resolve_schedules(options.schedule_path))
    if (row.n_full == trace.n) bo.criteria = row.criteria;
  return gp_baseline_retrieve(trace, options.max_iterations, options.seed, bo);
}

std::string result_to_json(const RetrievalResult& result, const RetrieveOptions& options,
                           const std::string& trace_file) {
  json j;
  j["scheme"] = to_string(options.scheme);
  j["trace_file"] = trace_file;
  j["seed"] = options.seed;
  j["p"] = options.p;
  j["converged"] = result.converged;
  j["metrics"] = {{"g", result.metrics.g}, {"g_prime", result.metrics.g_prime}, {"mu", result.metrics.mu}};
  j["iterations_total"] = result.iterations_total;
  j["wall_time_s"] = result.wall_time_s;
  j["level_g_history"] = result.level_g_history;
  j["level_iterations"] = result.level_iterations;
  j["field"] = json::parse(pulse_to_json(PulseRecord{result.field, std::nullopt, std::nullopt}));
  return j.dump(1) + "\n";
}

PCalibrationReport run_p_calibration(const std::vector<double>& tbps, std::size_t count, std::uint64_t seed,
                                     const std::vector<double>& p_grid, std::size_t threads) {
  if (count < 10) throw Error(Errc::InvalidArgument, "p calibration needs at least 10 pulses per TBP");
  if (tbps.empty()) throw Error(Errc::InvalidArgument, "no TBP values given");
  PCalibrationReport report;
  report.tbps = tbps;
  std::vector<ComplexField> pooled;
  for (std::size_t t = 0; t < tbps.size(); ++t) {
    const auto grid = TimeGrid::make(grid_size_for_tbp(tbps[t]), 1.0);
    const auto row_seed = derive_seed(seed, Stream::Calibration, t);
    std::vector<std::optional<ComplexField>> made(count);
    parallel_for(count, threads, [&](std::size_t i) {
      made[i] = generate_random_pulse(grid, tbps[t], derive_seed(row_seed, Stream::Pulse, i));
    });
    std::vector<ComplexField> pulses;
    for (auto& f : made) pulses.push_back(std::move(*f));
    report.per_tbp.push_back(calibrate_p(pulses, p_grid, threads));
    pooled.insert(pooled.end(), pulses.begin(), pulses.end());
  }
  report.combined = calibrate_p(pooled, p_grid, threads);
  return report;
}

std::string calibration_to_csv(const PCalibrationReport& report) {
  std::string csv = "p";
  for (double t : report.tbps) csv += ",mean_rms_tbp_" + format_double(t);
  csv += ",mean_rms_all\n";
  for (std::size_t k = 0; k < report.combined.p_grid.size(); ++k) {
    csv += format_double(report.combined.p_grid[k]);
    for (const auto& c : report.per_tbp) csv += "," + format_double(c.mean_rms[k]);
    csv += "," + format_double(report.combined.mean_rms[k]) + "\n";
  }
  csv += "# argmin_all," + format_double(report.combined.p_star) + "\n";
  for (std::size_t t = 0; t < report.tbps.size(); ++t)
    csv += "# argmin_tbp_" + format_double(report.tbps[t]) + "," + format_double(report.per_tbp[t].p_star) + "\n";
  return csv;
}

Quantiles quantiles(std::vector<double> v) {
  if (v.empty()) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    return {nan, nan, nan, nan, nan};
  }
  std::sort(v.begin(), v.end());
  auto at = [&](double q) {
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
  };
  return {v.front(), at(0.25), at(0.5), at(0.75), v.back()};
}

namespace {

RunSummary summarize(const RetrievalResult& r) {
  return {r.converged, r.metrics.g, r.metrics.g_prime, r.wall_time_s, r.iterations_total};
}

json summary_json(const RunSummary& s) {
  return {{"converged", s.converged}, {"g", s.g}, {"g_prime", s.g_prime},
          {"wall_time_s", s.wall_time_s}, {"iterations", s.iterations}};
}

RunSummary summary_from(const json& j) {
  return {j.at("converged").get<bool>(), j.at("g").get<double>(), j.at("g_prime").get<double>(),
          j.at("wall_time_s").get<double>(), j.at("iterations").get<std::size_t>()};
}

json quantiles_json(const Quantiles& q) {
  return {{"min", q.min}, {"q25", q.q25}, {"median", q.median}, {"q75", q.q75}, {"max", q.max}};
}

std::string environment_string(std::size_t threads) {
  std::string env = "compiler=";
#if defined(__clang__)
  env += "clang " __clang_version__;
#elif defined(__GNUC__)
  env += "gcc " __VERSION__;
#else
  env += "unknown";
#endif
  env += "; hardware_threads=" + std::to_string(std::thread::hardware_concurrency());
  env += "; threads=" + std::to_string(threads);
  return env;
}

}  // namespace

std::string pulse_record_to_json(const PulseBenchRecord& r) {
  json j = {{"index", r.index}, {"seed", r.seed}, {"tbp_measured", r.tbp_measured},
            {"spectrum_rms", r.spectrum_rms}, {"rana", summary_json(r.rana)}, {"gp", summary_json(r.gp)}};
  if (r.gp_spectrum) j["gp_spectrum"] = summary_json(*r.gp_spectrum);
  return j.dump(1) + "\n";
}

PulseBenchRecord pulse_record_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    PulseBenchRecord r;
    r.index = j.at("index").get<std::size_t>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.tbp_measured = j.at("tbp_measured").get<double>();
    r.spectrum_rms = j.at("spectrum_rms").get<double>();
    r.rana = summary_from(j.at("rana"));
    r.gp = summary_from(j.at("gp"));
    if (j.contains("gp_spectrum")) r.gp_spectrum = summary_from(j.at("gp_spectrum"));
    return r;
  } catch (const json::exception& e) {
    throw Error(Errc::ParseError, std::string("bench record: ") + e.what());
  }
}

BenchRow aggregate_row(double tbp, std::size_t n, std::vector<PulseBenchRecord> pulses) {
  std::sort(pulses.begin(), pulses.end(), [](const auto& a, const auto& b) { return a.index < b.index; });
  BenchRow row;
  row.tbp = tbp;
  row.n = n;
  row.count = pulses.size();
  std::size_t rana_ok = 0, gp_ok = 0, gps_ok = 0;
  double rana_time = 0.0, gp_time = 0.0;
  std::vector<double> gs, rms;
  for (const auto& p : pulses) {
    rana_ok += p.rana.converged;
    rana_time += p.rana.wall_time_s;
    if (p.gp.converged) {
      ++gp_ok;
      gp_time += p.gp.wall_time_s;
    }
    if (p.gp_spectrum) gps_ok += p.gp_spectrum->converged;
    gs.push_back(p.rana.g);
    rms.push_back(p.spectrum_rms);
  }
  const double count = static_cast<double>(std::max<std::size_t>(row.count, 1));
  row.rana_convergence_fraction = static_cast<double>(rana_ok) / count;
  row.gp_first_guess_fraction = static_cast<double>(gp_ok) / count;
  if (!pulses.empty() && pulses.front().gp_spectrum) row.gp_spectrum_fraction = static_cast<double>(gps_ok) / count;
  row.mean_time_rana_s = rana_time / count;
  row.mean_time_gp_s = gp_ok ? gp_time / static_cast<double>(gp_ok) : std::numeric_limits<double>::quiet_NaN();
  row.time_ratio = row.mean_time_rana_s / row.mean_time_gp_s;
  row.g_quantiles = quantiles(gs);
  row.spectrum_rms_quantiles = quantiles(rms);
  row.pulses = std::move(pulses);
  return row;
}

BenchReport run_bench(const BenchOptions& options) {
  if (options.tbps.empty()) throw Error(Errc::InvalidArgument, "no TBP values given");
  if (options.count == 0) throw Error(Errc::InvalidArgument, "count must be positive");
  const auto table = resolve_schedules(options.schedule_path);
  if (options.audit_dir) std::filesystem::create_directories(*options.audit_dir);

  BenchReport report;
  report.seed = options.seed;
  report.threads = resolve_threads(options.threads);
  report.environment = environment_string(report.threads);

  for (std::size_t t = 0; t < options.tbps.size(); ++t) {
    const double tbp = options.tbps[t];
    const std::size_t n = grid_size_for_tbp(tbp);
    const auto schedule = schedule_for(table, tbp, n);
    const auto row_seed = derive_seed(options.seed, Stream::Bench, t);
    std::vector<std::optional<PulseBenchRecord>> records(options.count);

    // One pulse per worker; every retrieval inside runs serially.
    parallel_for(options.count, options.threads, [&](std::size_t i) {
      if (options.cancel && options.cancel->load()) return;
      PulseBenchRecord rec;
      rec.index = i;
      rec.seed = derive_seed(row_seed, Stream::Pulse, i);
      const auto data = simulate_dataset(tbp, n, rec.seed);
      rec.tbp_measured = data.stats.tbp;
      rec.spectrum_rms = spectrum_rms_error(retrieve_spectrum(data.preprocessed, {options.p, kDivisionThreshold}),
                                            spectrum_of(data.pulse.field));
      if (options.run_rana) rec.rana = summarize(rana_retrieve(data.preprocessed, schedule, options.p, rec.seed));
      BaselineOptions bo;
      bo.p = options.p;
      bo.criteria = schedule.criteria;
      if (options.run_gp)
        rec.gp = summarize(gp_baseline_retrieve(data.preprocessed, options.gp_iterations, rec.seed, bo));
      if (options.with_spectrum_ablation) {
        bo.with_retrieved_spectrum = true;
        rec.gp_spectrum = summarize(gp_baseline_retrieve(data.preprocessed, options.gp_iterations, rec.seed, bo));
      }
      if (options.audit_dir)
        write_text_file(*options.audit_dir / ("tbp" + format_double(tbp) + "_pulse" + std::to_string(i) + ".json"),
                        pulse_record_to_json(rec));
      records[i] = std::move(rec);
    });

    std::vector<PulseBenchRecord> done;
    for (auto& r : records)
      if (r) done.push_back(std::move(*r));
    report.rows.push_back(aggregate_row(tbp, n, std::move(done)));
    if (options.cancel && options.cancel->load()) break;
  }
  return report;
}

std::string bench_to_json(const BenchReport& report) {
  json rows = json::array();
  for (const auto& r : report.rows) {
    json row = {{"tbp", r.tbp},
                {"n", r.n},
                {"count", r.count},
                {"rana_convergence_fraction", r.rana_convergence_fraction},
                {"gp_first_guess_fraction", r.gp_first_guess_fraction},
                {"mean_time_rana_s", r.mean_time_rana_s},
                {"mean_time_gp_s", std::isnan(r.mean_time_gp_s) ? json(nullptr) : json(r.mean_time_gp_s)},
                {"time_ratio_rana_over_gp", std::isnan(r.time_ratio) ? json(nullptr) : json(r.time_ratio)},
                {"g_quantiles", quantiles_json(r.g_quantiles)},
                {"spectrum_rms_quantiles", quantiles_json(r.spectrum_rms_quantiles)}};
    if (r.gp_spectrum_fraction) row["gp_spectrum_fraction"] = *r.gp_spectrum_fraction;
    rows.push_back(row);
  }
  json j = {{"seed", report.seed},
            {"threads", report.threads},
            {"environment", report.environment},
            {"note", "mean_time_gp_s averages converged GP runs only; compare times as ratios"},
            {"rows", rows}};
  return j.dump(1) + "\n";
}

std::string bench_to_csv(const BenchReport& report) {
  std::string csv = "# " + report.environment + "\n";
  csv += "# mean_time_gp_s averages converged GP runs only; times are for comparison as ratios\n";
  csv += "tbp,n,count,rana_convergence_fraction,gp_first_guess_fraction,gp_spectrum_fraction,"
         "mean_time_rana_s,mean_time_gp_s,time_ratio,g_min,g_q25,g_median,g_q75,g_max,"
         "spec_rms_min,spec_rms_q25,spec_rms_median,spec_rms_q75,spec_rms_max\n";
  for (const auto& r : report.rows) {
    auto f = [](double v) { return format_double(v); };
    csv += f(r.tbp) + "," + std::to_string(r.n) + "," + std::to_string(r.count) + "," +
           f(r.rana_convergence_fraction) + "," + f(r.gp_first_guess_fraction) + "," +
           (r.gp_spectrum_fraction ? f(*r.gp_spectrum_fraction) : std::string()) + "," + f(r.mean_time_rana_s) +
           "," + f(r.mean_time_gp_s) + "," + f(r.time_ratio);
    for (const auto* q : {&r.g_quantiles, &r.spectrum_rms_quantiles})
      csv += "," + f(q->min) + "," + f(q->q25) + "," + f(q->median) + "," + f(q->q75) + "," + f(q->max);
    csv += "\n";
  }
  return csv;
}

}  // namespace pgfrog

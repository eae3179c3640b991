#include "pgfrog/rana.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <numbers>
#include <chrono>
#include <cmath>
#include <optional>
#include <random>

#include "pgfrog/error.hpp"
#include "pgfrog/parallel.hpp"
#include "pgfrog/random.hpp"

namespace pgfrog {

void CandidatePool::add(Candidate c) {
  auto pos = std::upper_bound(candidates_.begin(), candidates_.end(), c, [](const Candidate& a, const Candidate& b) {
    return a.metrics.g != b.metrics.g ? a.metrics.g < b.metrics.g : a.index < b.index;
  });
  candidates_.insert(pos, std::move(c));
  if (candidates_.size() > capacity_) candidates_.resize(capacity_, candidates_.front());
}

void CandidatePool::prune(std::size_t keep) {
  if (candidates_.size() > keep) candidates_.erase(candidates_.begin() + static_cast<std::ptrdiff_t>(keep), candidates_.end());
}

double CandidatePool::best_g() const {
  return candidates_.empty() ? std::numeric_limits<double>::infinity() : candidates_.front().metrics.g;
}

FrogTrace bin_trace(const FrogTrace& trace, std::size_t factor) {
  if (factor == 0 || trace.n % factor != 0 || trace.n / factor == 0)
    throw Error(Errc::IndivisibleGrid, "trace size is not divisible by the binning factor");
  const std::size_t m = trace.n / factor;
  FrogTrace out{m, trace.dtau * static_cast<double>(factor), trace.domega * static_cast<double>(factor),
                std::vector<double>(m * m, 0.0)};
  const double norm = 1.0 / static_cast<double>(factor * factor);
  for (std::size_t i = 0; i < trace.n; ++i)
    for (std::size_t j = 0; j < trace.n; ++j) out.values[(i / factor) * m + j / factor] += trace.at(i, j) * norm;
  return out.peak_normalized();
}

TimeGrid level_grid(const TimeGrid& full, GridLevel level) {
  switch (level) {
    case GridLevel::Quarter: return TimeGrid::make(full.n / 4, 2.0 * full.dt, full.t0);
    case GridLevel::Half: return TimeGrid::make(full.n / 2, 2.0 * full.dt, full.t0);
    case GridLevel::Full: return full;
  }
  return full;
}

namespace {

// Centered decimation by two with [1/4, 1/2, 1/4] weights: output c sits on
// input 2c, so the center bin n/2 maps onto n/4.
std::vector<double> decimate(const std::vector<double>& in) {
  const std::size_t n = in.size();
  std::vector<double> out(n / 2);
  for (std::size_t c = 0; c < n / 2; ++c) {
    const std::size_t f = 2 * c;
    const double left = f > 0 ? in[f - 1] : 0.0;
    const double right = f + 1 < n ? in[f + 1] : 0.0;
    out[c] = 0.25 * left + 0.5 * in[f] + 0.25 * right;
  }
  return out;
}

std::vector<double> crop(const std::vector<double>& in, std::size_t m) {
  const std::size_t start = in.size() / 2 - m / 2;
  return std::vector<double>(in.begin() + static_cast<std::ptrdiff_t>(start),
                             in.begin() + static_cast<std::ptrdiff_t>(start + m));
}

struct AxisPlan {
  bool decimate = false;
  std::size_t keep = 0;
};

std::vector<double> apply_axis(const std::vector<double>& in, const AxisPlan& plan) {
  auto v = plan.decimate ? decimate(in) : in;
  return v.size() == plan.keep ? v : crop(v, plan.keep);
}

double interp_centered(std::span<const double> values, double x) {
  const double pos = x + static_cast<double>(values.size() / 2);
  if (pos < 0.0 || pos > static_cast<double>(values.size() - 1)) return 0.0;
  const auto i0 = static_cast<std::size_t>(std::floor(pos));
  const double f = pos - static_cast<double>(i0);
  if (i0 + 1 >= values.size()) return values[i0];
  return (1.0 - f) * values[i0] + f * values[i0 + 1];
}

}  // namespace

FrogTrace level_trace(const FrogTrace& full, GridLevel level) {
  const std::size_t n = full.n;
  if (level == GridLevel::Full) return full;
  AxisPlan delay_plan, freq_plan;
  double dtau = 2.0 * full.dtau, domega = full.domega;
  if (level == GridLevel::Half) {
    delay_plan = {true, n / 2};
    freq_plan = {false, n / 2};
  } else {
    delay_plan = {true, n / 4};
    freq_plan = {true, n / 4};
    domega *= 2.0;
  }
  const std::size_t m = delay_plan.keep;
  std::vector<std::vector<double>> rows(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row(full.values.begin() + static_cast<std::ptrdiff_t>(i * n),
                            full.values.begin() + static_cast<std::ptrdiff_t>((i + 1) * n));
    rows[i] = apply_axis(row, delay_plan);
  }
  FrogTrace out{m, dtau, domega, std::vector<double>(m * m)};
  std::vector<double> column(n);
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t i = 0; i < n; ++i) column[i] = rows[i][j];
    const auto reduced = apply_axis(column, freq_plan);
    for (std::size_t i = 0; i < m; ++i) out.at(i, j) = reduced[i];
  }
  return out.peak_normalized();
}

Spectrum resample_spectrum(const Spectrum& spectrum, const TimeGrid& target) {
  Spectrum out{target, std::vector<double>(target.n), {}};
  const double dw = spectrum.grid.domega();
  for (std::size_t k = 0; k < target.n; ++k)
    out.intensity[k] = std::max(0.0, interp_centered(spectrum.intensity, target.omega(k) / dw));
  return out;
}

std::vector<ComplexField> make_initial_guesses(const Spectrum& spectrum, std::size_t count,
                                               const TimeGrid& grid, std::uint64_t seed, PhaseMode mode) {
  if (spectrum.size() != grid.n) throw Error(Errc::DimensionMismatch, "spectrum does not match the grid");
  constexpr int kHarmonics = 4;  // cos/sin pairs -> 8 modes
  const double half_w = std::numbers::pi / grid.dt;
  std::vector<ComplexField> guesses;
  guesses.reserve(count);
  for (std::size_t g = 0; g < count; ++g) {
    std::mt19937_64 rng(derive_seed(seed, Stream::Guess, g));
    std::uniform_real_distribution<double> coeff(-std::numbers::pi, std::numbers::pi);
    std::array<double, 2 * kHarmonics> c{};
    if (mode == PhaseMode::Random)
      for (auto& v : c) v = coeff(rng);
    std::vector<cplx> amplitudes(grid.n);
    for (std::size_t k = 0; k < grid.n; ++k) {
      const double x = grid.omega(k) / half_w;
      double phase = 0.0;
      for (int h = 1; h <= kHarmonics; ++h)
        phase += c[2 * (h - 1)] * std::cos(h * std::numbers::pi * x) + c[2 * h - 1] * std::sin(h * std::numbers::pi * x);
      amplitudes[k] = std::polar(std::sqrt(std::max(0.0, spectrum.intensity[k])), phase);
    }
    guesses.push_back(inverse_fourier(SpectralField{grid, std::move(amplitudes)}));
  }
  return guesses;
}

std::vector<double> spectral_window(const TimeGrid& grid) {
  const std::size_t n = grid.n;
  const std::size_t outer = (n + 9) / 10;
  double w0 = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < outer; ++k)
    w0 = std::min({w0, std::abs(grid.omega(k)), std::abs(grid.omega(n - 1 - k))});
  std::vector<double> window(n);
  const double ln_floor = std::log(1e4);
  for (std::size_t k = 0; k < n; ++k) window[k] = std::exp(-std::pow(grid.omega(k) / w0, 6) * ln_floor);
  return window;
}

Spectrum apply_spectral_window(const Spectrum& spectrum) {
  const auto window = spectral_window(spectrum.grid);
  Spectrum out(spectrum);
  for (std::size_t k = 0; k < out.size(); ++k) out.intensity[k] *= window[k];
  return out;
}

ComplexField resample_field(const ComplexField& field, const TimeGrid& to_grid) {
  const TimeGrid& from = field.grid();
  // Unitary amplitudes scale as 1 / (sqrt(n) dt) against the continuous
  // transform; the sampled field's DTFT is evaluated directly at each target
  // frequency inside the source band.
  const double scale = from.dt / (std::sqrt(static_cast<double>(to_grid.n)) * to_grid.dt);
  const double lo = from.omega(0), hi = from.omega(from.n - 1);
  const double slack = 1e-9 * from.domega();
  std::vector<cplx> out(to_grid.n);
  for (std::size_t k = 0; k < to_grid.n; ++k) {
    const double w = to_grid.omega(k);
    if (w < lo - slack || w > hi + slack) continue;
    // exp(-i w t_j) advanced by a fixed rotation per sample
    const cplx step = std::polar(1.0, -w * from.dt);
    cplx phasor = std::polar(1.0, -w * from.offset(0) * from.dt);
    cplx acc = 0.0;
    for (std::size_t j = 0; j < from.n; ++j) {
      acc += field[j] * phasor;
      phasor *= step;
    }
    out[k] = scale * acc;
  }
  return inverse_fourier(SpectralField{to_grid, std::move(out)});
}

ComplexField transition_field(const ComplexField& field, const TimeGrid& to_grid) {
  const TimeGrid& from = field.grid();
  if (to_grid.n <= from.n || to_grid.dt > from.dt * (1.0 + 1e-12))
    throw Error(Errc::IncompatibleGrids, "transition target must be a larger, no coarser grid");
  return resample_field(field, to_grid);
}

namespace {

double a3_distance(const ComplexField& field, const Marginal& marginal) {
  auto a3 = autocorrelation(field, 3).values;
  const double peak = *std::max_element(a3.begin(), a3.end());
  if (peak > 0.0)
    for (auto& v : a3) v /= peak;
  return rms_fit(a3, marginal.values, 1.0).rms;
}

}  // namespace

ReapplyDecision reapply_spectrum_decision(const ComplexField& field, const Spectrum& spectrum,
                                          const Marginal& measured_delay_marginal) {
  if (spectrum.size() != field.size() || measured_delay_marginal.values.size() != field.size())
    throw Error(Errc::DimensionMismatch, "spectrum or marginal does not match the field");
  auto spectral = forward_fourier(field);
  double field_energy = 0.0, spectrum_energy = 0.0;
  for (std::size_t k = 0; k < field.size(); ++k) {
    field_energy += std::norm(spectral.amplitudes[k]);
    spectrum_energy += spectrum.intensity[k];
  }
  const double scale = spectrum_energy > 0.0 ? std::sqrt(field_energy / spectrum_energy) : 1.0;
  for (std::size_t k = 0; k < field.size(); ++k) {
    const double phase = std::arg(spectral.amplitudes[k]);
    spectral.amplitudes[k] = std::polar(scale * std::sqrt(std::max(0.0, spectrum.intensity[k])), phase);
  }
  auto candidate = inverse_fourier(spectral);

  ReapplyDecision d{field, false, a3_distance(field, measured_delay_marginal), 0.0};
  d.rms_candidate = a3_distance(candidate, measured_delay_marginal);
  // Ties (a field that already carries the spectrum) keep the original; the
  // absolute floor covers both sitting at rounding level.
  if (d.rms_candidate < d.rms_kept - std::max(1e-9 * d.rms_kept, 1e-12)) {
    d.field = std::move(candidate);
    d.reapplied = true;
  }
  return d;
}

ComplexField maybe_reapply_spectrum(const ComplexField& field, const Spectrum& spectrum,
                                    const Marginal& measured_delay_marginal) {
  return reapply_spectrum_decision(field, spectrum, measured_delay_marginal).field;
}

namespace {

using Clock = std::chrono::steady_clock;

struct LevelRun {
  std::vector<Candidate> ranked;
  std::size_t iterations = 0;
  std::vector<std::vector<double>> histories;
};

LevelRun run_level(std::vector<ComplexField> starts, const FrogTrace& trace, std::size_t iterations,
                   const ConvergenceCriteria& criteria, GridLevel level, const RanaOptions& options) {
  std::vector<std::optional<GpOutcome>> outcomes(starts.size());
  parallel_for(starts.size(), options.threads, [&](std::size_t i) {
    outcomes[i] = gp_iterate(GpState{std::move(starts[i]), 0, {}}, trace, iterations, criteria, options.gp);
  });
  LevelRun run;
  CandidatePool pool(outcomes.size());
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    run.iterations += outcomes[i]->state.iteration;
    pool.add(Candidate{outcomes[i]->state.field, outcomes[i]->metrics, level, i});
  }
  run.ranked = pool.candidates();
  for (const auto& c : run.ranked) run.histories.push_back(outcomes[c.index]->state.g_history);
  return run;
}

// Coarse levels run their whole budget.
constexpr ConvergenceCriteria kRunFullBudget{-1.0, -1.0};

}  // namespace

RetrievalResult rana_retrieve(const FrogTrace& trace, const GridSchedule& schedule, double p,
                              std::uint64_t seed, const RanaOptions& options) {
  const auto start = Clock::now();
  schedule.validate();
  if (trace.n != schedule.n_full)
    throw Error(Errc::DimensionMismatch, "trace size does not match the schedule");
  const TimeGrid full_grid = TimeGrid::make(trace.n, trace.dtau);

  const auto spectrum = apply_spectral_window(retrieve_spectrum(trace, {p, kDivisionThreshold}));

  RetrievalResult result{ComplexField(full_grid, std::vector<cplx>(trace.n)), {}, false, 0, 0.0, {}, {}, {}};

  // Quarter grid: many guesses carrying the retrieved spectrum.
  const TimeGrid q_grid = level_grid(full_grid, GridLevel::Quarter);
  const auto q_trace = level_trace(trace, GridLevel::Quarter);
  auto guesses = make_initial_guesses(resample_spectrum(spectrum, q_grid), schedule.quarter.num_initial_guesses,
                                      q_grid, derive_seed(seed, Stream::Guess));
  auto quarter = run_level(std::move(guesses), q_trace, schedule.quarter.iterations, kRunFullBudget,
                           GridLevel::Quarter, options);
  result.level_g_history.push_back(quarter.ranked.front().metrics.g);
  result.level_iterations.push_back(quarter.iterations);

  // Half grid: survivors move up through the spectral domain.
  const TimeGrid h_grid = level_grid(full_grid, GridLevel::Half);
  const auto h_trace = level_trace(trace, GridLevel::Half);
  const auto h_spectrum = resample_spectrum(spectrum, h_grid);
  const auto h_marginal = delay_marginal(h_trace);
  std::vector<ComplexField> h_starts;
  const std::size_t h_keep = std::min(schedule.half.num_initial_guesses, quarter.ranked.size());
  for (std::size_t i = 0; i < h_keep; ++i)
    h_starts.push_back(maybe_reapply_spectrum(transition_field(quarter.ranked[i].field, h_grid), h_spectrum, h_marginal));
  auto half = run_level(std::move(h_starts), h_trace, schedule.half.iterations, kRunFullBudget, GridLevel::Half, options);
  result.level_g_history.push_back(half.ranked.front().metrics.g);
  result.level_iterations.push_back(half.iterations);

  // Full grid: the best four, a few iterations each, stopping at the criteria.
  const auto f_marginal = delay_marginal(trace);
  std::vector<ComplexField> f_starts;
  const std::size_t f_keep = std::min(schedule.full.num_initial_guesses, half.ranked.size());
  for (std::size_t i = 0; i < f_keep; ++i)
    f_starts.push_back(maybe_reapply_spectrum(transition_field(half.ranked[i].field, full_grid), spectrum, f_marginal));
  auto full = run_level(std::move(f_starts), trace, schedule.full.iterations, schedule.criteria, GridLevel::Full, options);
  result.level_g_history.push_back(full.ranked.front().metrics.g);
  result.level_iterations.push_back(full.iterations);

  result.field = full.ranked.front().field;
  result.metrics = full.ranked.front().metrics;
  result.g_history = full.histories.front();
  result.converged = schedule.criteria.met(result.metrics);
  result.iterations_total = quarter.iterations + half.iterations + full.iterations;
  result.wall_time_s = std::chrono::duration<double>(Clock::now() - start).count();
  return result;
}

ComplexField baseline_initial_guess(const FrogTrace& trace, std::uint64_t seed, const BaselineOptions& options) {
  const TimeGrid grid = TimeGrid::make(trace.n, trace.dtau);
  std::mt19937_64 rng(derive_seed(seed, Stream::Baseline));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> phase(-std::numbers::pi, std::numbers::pi);
  // Phases are drawn first so that both variants share them for a given seed
  // and differ only in the spectral amplitude.
  std::vector<double> phases(grid.n);
  for (auto& ph : phases) ph = phase(rng);
  std::vector<cplx> amplitudes(grid.n);
  if (options.with_retrieved_spectrum) {
    const auto spectrum = apply_spectral_window(retrieve_spectrum(trace, {options.p, kDivisionThreshold}));
    for (std::size_t k = 0; k < grid.n; ++k) amplitudes[k] = std::polar(std::sqrt(spectrum.intensity[k]), phases[k]);
  } else {
    // Rayleigh amplitudes (a complex Gaussian per bin) under an envelope of
    // rms intensity width (pi/dt)/sqrt(32).
    const double half_w = std::numbers::pi / grid.dt;
    for (std::size_t k = 0; k < grid.n; ++k) {
      const double x = grid.omega(k) / half_w;
      const double a = std::hypot(normal(rng), normal(rng));
      amplitudes[k] = std::polar(a * std::exp(-8.0 * x * x), phases[k]);
    }
  }
  return inverse_fourier(SpectralField{grid, std::move(amplitudes)});
}

RetrievalResult gp_baseline_retrieve(const FrogTrace& trace, std::size_t max_iterations, std::uint64_t seed,
                                     const BaselineOptions& options) {
  const auto start = Clock::now();
  auto guess = baseline_initial_guess(trace, seed, options);
  auto out = gp_iterate(GpState{std::move(guess), 0, {}}, trace, max_iterations, options.criteria, options.gp);
  RetrievalResult result{out.state.field, out.metrics, out.converged, out.state.iteration, 0.0,
                         {out.metrics.g}, {out.state.iteration}, out.state.g_history};
  result.wall_time_s = std::chrono::duration<double>(Clock::now() - start).count();
  return result;
}

}  // namespace pgfrog

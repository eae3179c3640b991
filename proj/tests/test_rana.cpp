#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "pgfrog/bench.hpp"
#include "pgfrog/error.hpp"
#include "pgfrog/rana.hpp"

using namespace pgfrog;

namespace {

// rms width and mean of a sampled non-negative profile in physical units.
std::pair<double, double> moments(const std::vector<double>& w, double step) {
  double s = 0, m1 = 0, m2 = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double x = static_cast<double>(i) * step;
    s += w[i];
    m1 += w[i] * x;
    m2 += w[i] * x * x;
  }
  m1 /= s;
  return {m1, std::sqrt(m2 / s - m1 * m1)};
}

std::vector<double> normalized(std::vector<double> v) {
  const double p = *std::max_element(v.begin(), v.end());
  for (auto& x : v) x /= p;
  return v;
}

double rms_field_difference(const ComplexField& a, const ComplexField& b) {
  double num = 0, den = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += std::norm(a[i] - b[i]);
    den += std::norm(b[i]);
  }
  return std::sqrt(num / den);
}

ComplexField shifted(const ComplexField& f, std::ptrdiff_t k) {
  const auto n = static_cast<std::ptrdiff_t>(f.size());
  std::vector<cplx> out(f.size());
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto src = i - k;
    if (src >= 0 && src < n) out[static_cast<std::size_t>(i)] = f[static_cast<std::size_t>(src)];
  }
  return ComplexField(f.grid(), std::move(out));
}

// Scale-fitted rms distance of the peak-normalized third-order
// autocorrelation from a measured delay marginal, via the oracle.
double a3_rms(const ComplexField& f, const Marginal& m) {
  const auto a3 = normalized(oracle::autocorrelation(oracle::intensity(f), 3));
  double ab = 0, bb = 0;
  for (std::size_t i = 0; i < a3.size(); ++i) {
    ab += a3[i] * m.values[i];
    bb += m.values[i] * m.values[i];
  }
  const double mu = ab / bb;
  double s = 0;
  for (std::size_t i = 0; i < a3.size(); ++i) s += std::pow(a3[i] - mu * m.values[i], 2);
  return std::sqrt(s / static_cast<double>(a3.size()));
}

}  // namespace

TEST_CASE("binning a constant trace") {
  FrogTrace t{16, 1.0, 2 * std::numbers::pi / 16, std::vector<double>(256, 0.25)};
  const auto b = bin_trace(t, 4);
  CHECK(b.n == 4);
  CHECK(b.dtau == 4.0);
  for (double v : b.values) CHECK(v == 1.0);
  CHECK_THROWS_AS(bin_trace(t, 3), Error);
  CHECK_THROWS_AS(bin_trace(t, 0), Error);
}

TEST_CASE("binning preserves Gaussian widths in physical units") {
  const std::size_t n = 128;
  FrogTrace t{n, 0.7, 0.05, std::vector<double>(n * n)};
  const double sw = 9.0, st = 13.0;  // in bins
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double x = static_cast<double>(i) - 61.3, y = static_cast<double>(j) - 66.8;
      t.values[i * n + j] = std::exp(-x * x / (2 * sw * sw) - y * y / (2 * st * st));
    }
  const auto b = bin_trace(t, 2);
  const auto before_w = moments(frequency_marginal(t).values, t.domega).second;
  const auto after_w = moments(frequency_marginal(b).values, b.domega).second;
  const auto before_t = moments(delay_marginal(t).values, t.dtau).second;
  const auto after_t = moments(delay_marginal(b).values, b.dtau).second;
  CHECK(after_w == doctest::Approx(before_w).epsilon(0.01));
  CHECK(after_t == doctest::Approx(before_t).epsilon(0.01));
}

TEST_CASE("binning commutes with the delay marginal") {
  const auto t = synthesize_trace(generate_random_pulse(TimeGrid::make(128, 1.0), 5.0, 4));
  const auto lhs = normalized(delay_marginal(bin_trace(t, 2)).values);
  const auto fine = delay_marginal(t).values;
  std::vector<double> rhs(64);
  for (std::size_t j = 0; j < 64; ++j) rhs[j] = fine[2 * j] + fine[2 * j + 1];
  rhs = normalized(rhs);
  CHECK(oracle::max_abs_diff(lhs, rhs) < 1e-10);
}

TEST_CASE("initial guesses") {
  const auto grid = TimeGrid::make(64, 1.0);
  const auto truth = generate_random_pulse(grid, 2.5, 8);
  const auto spectrum = spectrum_of(truth);

  SUBCASE("flat phase gives the transform-limited pulse") {
    const auto g = make_initial_guesses(spectrum, 1, grid, 1, PhaseMode::Flat).front();
    const auto spec = forward_fourier(g);
    for (std::size_t k = 0; k < grid.n; ++k) {
      CHECK(std::abs(spec.amplitudes[k].imag()) < 1e-12);
      CHECK(spec.amplitudes[k].real() > -1e-12);
    }
    // Transform-limited: no other phase gives a higher peak intensity.
    const auto gi = g.intensity();
    const double peak = *std::max_element(gi.begin(), gi.end());
    const auto other = make_initial_guesses(spectrum, 5, grid, 2);
    for (const auto& o : other) {
      const auto oi = o.intensity();
      CHECK(peak >= *std::max_element(oi.begin(), oi.end()));
    }
  }

  SUBCASE("guesses carry the given spectrum") {
    // Exact up to FFT round-off.
    for (const auto& g : make_initial_guesses(spectrum, 20, grid, 3)) {
      const auto s = spectrum_of(g);
      for (std::size_t k = 0; k < grid.n; ++k) CHECK(std::abs(s.intensity[k] - spectrum.intensity[k]) < 1e-12);
    }
  }

  SUBCASE("guesses are distinct") {
    const auto gs = make_initial_guesses(spectrum, 100, grid, 4);
    double smallest = 1e300;
    for (std::size_t a = 0; a < gs.size(); ++a)
      for (std::size_t b = a + 1; b < gs.size(); ++b) smallest = std::min(smallest, rms_field_difference(gs[a], gs[b]));
    CHECK(smallest > 0.0);
  }

  CHECK_THROWS_AS(make_initial_guesses(spectrum, 1, TimeGrid::make(32, 1.0), 1), Error);
}

TEST_CASE("spectral window") {
  for (std::size_t n : {64, 128, 256, 512}) {
    const auto grid = TimeGrid::make(n, 1.0);
    const auto w = spectral_window(grid);
    const std::size_t outer = (n + 9) / 10;
    for (std::size_t k = 0; k < outer; ++k) {
      CHECK(w[k] <= 1e-4 * (1 + 1e-12));
      CHECK(w[n - 1 - k] <= 1e-4 * (1 + 1e-12));
    }
    // Within 0.285 of the cutoff frequency the attenuation stays below 0.5%.
    double w0 = 1e300;
    for (std::size_t k = 0; k < outer; ++k) w0 = std::min({w0, std::abs(grid.omega(k)), std::abs(grid.omega(n - 1 - k))});
    for (std::size_t k = 0; k < n; ++k)
      if (std::abs(grid.omega(k)) <= 0.285 * w0) CHECK(w[k] > 0.995);
    CHECK(w[n / 2] == 1.0);

    Spectrum s{grid, std::vector<double>(n, 1.0), {}};
    const auto once = apply_spectral_window(s);
    const auto twice = apply_spectral_window(once);
    for (std::size_t k = 0; k < outer; ++k) CHECK(twice.intensity[k] <= 1e-4 * once.intensity[k] * (1 + 1e-12));
  }
}

TEST_CASE("grid transitions") {
  const auto full = TimeGrid::make(128, 1.0);
  const auto half = level_grid(full, GridLevel::Half);
  const auto quarter = level_grid(full, GridLevel::Quarter);
  CHECK(half.n == 64);
  CHECK(quarter.n == 32);
  CHECK(half.dt == 2.0);

  SUBCASE("round trip back to the coarse grid") {
    for (std::uint64_t s = 0; s < 10; ++s) {
      const auto f = generate_random_pulse(half, 2.5, s);
      // half -> full halves dt: every other sample is a half-grid point.
      const auto up = transition_field(f, full);
      std::vector<cplx> back(half.n);
      for (std::size_t j = 0; j < half.n; ++j) back[j] = up[2 * j];
      CHECK(rms_field_difference(ComplexField(half, back), f) < 0.02);

      const auto q = generate_random_pulse(quarter, 1.5, s);
      // quarter -> half keeps dt and doubles the window: crop the center.
      const auto wide = transition_field(q, half);
      std::vector<cplx> crop(quarter.n);
      for (std::size_t j = 0; j < quarter.n; ++j) crop[j] = wide[j + quarter.n / 2];
      CHECK(rms_field_difference(ComplexField(quarter, crop), q) < 0.02);
    }
  }

  SUBCASE("transform-limited Gaussian stays transform-limited") {
    const auto g = gaussian_pulse(half, 5.0);
    const auto up = transition_field(g, full);
    CHECK(compute_stats(up).tbp == doctest::Approx(0.5).epsilon(0.01));
  }

  SUBCASE("shift covariance") {
    const auto f = generate_random_pulse(half, 2.5, 21);
    for (std::ptrdiff_t k : {-3, 1, 4}) {
      const auto a = transition_field(shifted(f, k), full);
      const auto b = shifted(transition_field(f, full), 2 * k);
      CHECK(rms_field_difference(a, b) < 1e-3);
    }
  }

  CHECK_THROWS_AS(transition_field(gaussian_pulse(full, 5.0), half), Error);
  CHECK_THROWS_AS(transition_field(gaussian_pulse(half, 5.0), TimeGrid::make(128, 4.0)), Error);
}

TEST_CASE("spectrum re-application") {
  const auto grid = TimeGrid::make(64, 1.0);
  const auto truth = generate_random_pulse(grid, 2.5, 12);
  const auto marginal = delay_marginal(synthesize_trace(truth));
  const auto spectrum = spectrum_of(truth);

  SUBCASE("a field already carrying the spectrum is returned unchanged") {
    const auto d = reapply_spectrum_decision(truth, spectrum, marginal);
    CHECK_FALSE(d.reapplied);
    CHECK(d.field == truth);
  }

  SUBCASE("corrupted magnitude with the right phase is repaired") {
    auto spec = forward_fourier(truth);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.3, 1.7);
    for (auto& a : spec.amplitudes) a *= u(rng);
    const auto bad = inverse_fourier(spec);
    const auto d = reapply_spectrum_decision(bad, spectrum, marginal);
    CHECK(d.reapplied);
    CHECK(d.rms_candidate < d.rms_kept);
    CHECK(rms_field_difference(d.field, truth) < 0.05);
    // The chosen candidate carries the spectrum exactly, up to a scale.
    const auto s = spectrum_of(d.field).intensity;
    const double c = std::accumulate(s.begin(), s.end(), 0.0) /
                     std::accumulate(spectrum.intensity.begin(), spectrum.intensity.end(), 0.0);
    for (std::size_t k = 0; k < grid.n; ++k) CHECK(std::abs(s[k] - c * spectrum.intensity[k]) < 1e-12 * c);
  }

  SUBCASE("the output always minimizes the rms") {
    for (std::uint64_t s = 0; s < 20; ++s) {
      const auto other = spectrum_of(generate_random_pulse(grid, 2.5, 100 + s));
      const auto field = generate_random_pulse(grid, 2.5, 200 + s);
      const auto d = reapply_spectrum_decision(field, other, marginal);
      CHECK(d.rms_kept == doctest::Approx(a3_rms(field, marginal)).epsilon(1e-8));
      auto spec = forward_fourier(field);
      for (std::size_t k = 0; k < grid.n; ++k)
        spec.amplitudes[k] = std::polar(std::sqrt(other.intensity[k]), std::arg(spec.amplitudes[k]));
      CHECK(d.rms_candidate == doctest::Approx(a3_rms(inverse_fourier(spec), marginal)).epsilon(1e-8));
      if (d.reapplied) CHECK(d.rms_candidate < d.rms_kept);
      else CHECK(d.field == field);
    }
  }
}

TEST_CASE("candidate pool") {
  CandidatePool pool(6);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 1);
  const ComplexField f = gaussian_pulse(TimeGrid::make(16, 1.0), 2.0);
  double best = pool.best_g();
  for (std::size_t i = 0; i < 40; ++i) {
    pool.add(Candidate{f, ErrorMetrics{u(rng), 1.0, 0.5}, GridLevel::Quarter, i});
    CHECK(pool.best_g() <= best);
    best = pool.best_g();
    CHECK(pool.candidates().size() <= 6);
    CHECK(std::is_sorted(pool.candidates().begin(), pool.candidates().end(),
                         [](const Candidate& a, const Candidate& b) { return a.metrics.g < b.metrics.g; }));
  }
  for (std::size_t keep : {4, 2, 1}) {
    pool.prune(keep);
    CHECK(pool.candidates().size() == keep);
    CHECK(pool.best_g() == best);
  }
  // Ties are broken by index.
  CandidatePool ties(3);
  for (std::size_t i : {2, 0, 1}) ties.add(Candidate{f, ErrorMetrics{0.1, 1.0, 0.5}, GridLevel::Half, i});
  CHECK(ties.candidates()[0].index == 0);
  CHECK(ties.candidates()[2].index == 2);
}

TEST_CASE("schedules") {
  const auto& table = default_schedules();
  REQUIRE(table.size() == 7);
  const auto& row = table.front();
  CHECK(row.n_full == 64);
  CHECK(row.quarter.num_initial_guesses == 12);
  CHECK(row.quarter.iterations == 20);
  CHECK(row.half.num_initial_guesses == 8);
  CHECK(row.half.iterations == 20);
  CHECK(row.full.num_initial_guesses == 4);
  CHECK(row.criteria.g_cutoff == 0.009);
  CHECK(default_schedule_for_size(128).criteria.g_cutoff == 0.008);
  CHECK_THROWS_AS(default_schedule_for_size(96), Error);

  auto bad = row;
  bad.full.num_initial_guesses = 3;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = row;
  bad.n_full = 100;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = row;
  bad.half.iterations = 0;
  CHECK_THROWS_AS(bad.validate(), Error);

  const auto path = std::filesystem::temp_directory_path() / "pgfrog_schedules_test.json";
  save_schedules(path, table);
  const auto loaded = load_schedules(path);
  REQUIRE(loaded.size() == table.size());
  for (std::size_t i = 0; i < table.size(); ++i) {
    CHECK(loaded[i].n_full == table[i].n_full);
    CHECK(loaded[i].tbp_label == table[i].tbp_label);
    CHECK(loaded[i].quarter.iterations == table[i].quarter.iterations);
    CHECK(loaded[i].half.num_initial_guesses == table[i].half.num_initial_guesses);
    CHECK(loaded[i].full.iterations == table[i].full.iterations);
    CHECK(loaded[i].criteria.g_prime_cutoff == table[i].criteria.g_prime_cutoff);
  }
  std::filesystem::remove(path);
}

TEST_CASE("rana on a transform-limited Gaussian") {
  for (std::size_t n : {64, 128}) {
    const auto trace = synthesize_trace(gaussian_pulse(TimeGrid::make(n, 1.0), n / 12.0));
    const auto r = rana_retrieve(trace, default_schedule_for_size(n), kDefaultP, 3);
    CHECK(r.converged);
    CHECK(compute_stats(r.field).tbp == doctest::Approx(0.5).epsilon(0.02));
  }
}

TEST_CASE("rana budgets and schedule rows") {
  struct Row { double tbp; std::size_t n; double g; };
  for (const Row row : {Row{2.5, 64, 0.009}, Row{5.0, 128, 0.008}}) {
    const auto schedule = default_schedule_for_size(row.n);
    for (std::uint64_t s = 0; s < 5; ++s) {
      const auto data = simulate_dataset(row.tbp, row.n, 40 + s);
      const auto r = rana_retrieve(data.preprocessed, schedule, kDefaultP, s);
      CHECK(r.converged);
      CHECK((r.metrics.g <= row.g || r.metrics.g_prime <= 0.2));
      REQUIRE(r.level_iterations.size() == 3);
      CHECK(r.level_iterations[0] == schedule.quarter.num_initial_guesses * schedule.quarter.iterations);
      CHECK(r.level_iterations[1] == schedule.half.num_initial_guesses * schedule.half.iterations);
      CHECK(r.level_iterations[2] <= 4 * schedule.full.iterations);
      CHECK(r.iterations_total == r.level_iterations[0] + r.level_iterations[1] + r.level_iterations[2]);
      CHECK(r.field.size() == row.n);
    }
  }
  CHECK_THROWS_AS(rana_retrieve(synthesize_trace(gaussian_pulse(TimeGrid::make(64, 1.0), 5.0)),
                                default_schedule_for_size(128), kDefaultP, 1), Error);
}

TEST_CASE("rana is deterministic under parallel execution") {
  const auto data = simulate_dataset(2.5, 64, 9);
  const auto schedule = default_schedule_for_size(64);
  RanaOptions serial, parallel;
  parallel.threads = 4;
  const auto a = rana_retrieve(data.preprocessed, schedule, kDefaultP, 17, serial);
  const auto b = rana_retrieve(data.preprocessed, schedule, kDefaultP, 17, parallel);
  CHECK(a.field == b.field);
  CHECK(a.metrics.g == b.metrics.g);
  CHECK(a.metrics.g_prime == b.metrics.g_prime);
  CHECK(a.g_history == b.g_history);
  CHECK(a.level_g_history == b.level_g_history);
  CHECK(a.level_iterations == b.level_iterations);
}

#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "pgfrog/error.hpp"
#include "pgfrog/trace.hpp"

using namespace pgfrog;

namespace {

double corner_max(const FrogTrace& t, std::size_t block) {
  double m = 0;
  for (std::size_t i = 0; i < block; ++i)
    for (std::size_t j = 0; j < block; ++j)
      for (auto [a, b] : {std::pair{i, j}, {i, t.n - 1 - j}, {t.n - 1 - i, j}, {t.n - 1 - i, t.n - 1 - j}})
        m = std::max(m, std::abs(t.at(a, b)));
  return m;
}

}  // namespace

TEST_CASE("signal field at zero delay and far delays") {
  const auto f = oracle::random_field(32, 5);
  const auto s0 = pg_signal_field(f, 0);
  for (std::size_t i = 0; i < 32; ++i) CHECK(std::abs(s0[i] - f[i] * std::norm(f[i])) < 1e-14);

  const auto g = gaussian_pulse(TimeGrid::make(128, 1.0), 3.0);
  const auto far = pg_signal_field(g, 60);
  for (const auto& v : far) CHECK(std::abs(v) < 1e-8);
}

TEST_CASE("Gaussian signal field is the closed-form Gaussian product") {
  const double sigma = 5.0;
  const auto grid = TimeGrid::make(128, 0.5);
  const auto f = gaussian_pulse(grid, sigma);
  for (std::ptrdiff_t shift : {-20, -3, 0, 7, 30}) {
    const double tau = static_cast<double>(shift) * grid.dt;
    const auto s = pg_signal_field(f, shift);
    for (std::size_t i = 0; i < grid.n; ++i) {
      const double t = grid.offset(i) * grid.dt;
      const double expected = std::exp(-tau * tau / (3 * sigma * sigma)) *
                              std::exp(-1.5 * std::pow(t - 2 * tau / 3, 2) / (sigma * sigma));
      CHECK(std::abs(s[i].real() - expected) < 1e-12);
    }
  }
}

TEST_CASE("trace equals the triple-loop oracle") {
  for (std::size_t n : {16u, 32u, 64u}) {
    const auto f = oracle::random_field(n, 40 + n);
    CHECK(oracle::max_abs_diff(synthesize_trace(f).values, oracle::pg_trace(f)) < 1e-10);
  }
  const auto p = generate_random_pulse(TimeGrid::make(64, 1.0), 2.5, 9);
  CHECK(oracle::max_abs_diff(synthesize_trace(p).values, oracle::pg_trace(p)) < 1e-10);
}

TEST_CASE("Gaussian trace matches the analytic PG trace") {
  // exp(-2 tau^2 / 3 sigma^2) exp(-w^2 sigma^2 / 3)
  const double sigma = 6.0;
  const auto f = gaussian_pulse(TimeGrid::make(128, 1.0), sigma);
  const auto tr = synthesize_trace(f);
  double err = 0;
  for (std::size_t i = 0; i < tr.n; ++i)
    for (std::size_t j = 0; j < tr.n; ++j) {
      const double tau = tr.delay(j), w = tr.omega(i);
      err = std::max(err, std::abs(tr.at(i, j) - std::exp(-2 * tau * tau / (3 * sigma * sigma) - w * w * sigma * sigma / 3)));
    }
  CHECK(err < 1e-8);
  CHECK(tr.domega == doctest::Approx(2 * std::numbers::pi / 128));
}

TEST_CASE("chirped Gaussian trace is tilted along the instantaneous frequency") {
  // E = exp(-t^2 / 2 s^2 + i b t^2): the gate centers the signal at 2 tau / 3,
  // where the instantaneous frequency is 2 b t, so the ridge is w = (4b/3) tau.
  const double s = 10.0, b = 0.01;
  const auto grid = TimeGrid::make(256, 1.0);
  std::vector<cplx> e(256);
  for (std::size_t i = 0; i < 256; ++i) {
    const double t = grid.offset(i);
    e[i] = std::exp(cplx(-t * t / (2 * s * s), b * t * t));
  }
  const auto tr = synthesize_trace(ComplexField(grid, e));
  for (std::ptrdiff_t d : {-15, -5, 5, 15}) {
    const std::size_t j = static_cast<std::size_t>(128 + d);
    double m0 = 0, m1 = 0;
    for (std::size_t i = 0; i < tr.n; ++i) {
      m0 += tr.at(i, j);
      m1 += tr.at(i, j) * tr.omega(i);
    }
    CHECK(m1 / m0 == doctest::Approx(4 * b / 3 * tr.delay(j)).epsilon(0.01));
  }
}

TEST_CASE("time reversal changes the trace of an asymmetric pulse") {
  const auto grid = TimeGrid::make(64, 1.0);
  std::vector<cplx> e(64), r(64);
  for (std::size_t i = 0; i < 64; ++i) {
    const double t = grid.offset(i);
    e[i] = std::exp(-t * t / 18) + 0.5 * std::exp(-std::pow(t - 8, 2) / 8);
  }
  for (std::size_t i = 1; i < 64; ++i) r[i] = e[64 - i];
  r[0] = e[0];
  CHECK(oracle::max_abs_diff(synthesize_trace(ComplexField(grid, e)).values,
                             synthesize_trace(ComplexField(grid, r)).values) > 1e-2);
}

TEST_CASE("noise model") {
  const auto clean = synthesize_trace(generate_random_pulse(TimeGrid::make(64, 1.0), 2.5, 4));
  CHECK(add_noise(clean, {0.0, 0.0, 3}).values == clean.values);
  CHECK(add_noise(clean, {0.01, 0.01, 3}).values == add_noise(clean, {0.01, 0.01, 3}).values);
  CHECK_FALSE(add_noise(clean, {0.01, 0.01, 3}).values == add_noise(clean, {0.01, 0.01, 4}).values);

  // E[rms^2] = mean(m^2 I^2 + a^2)
  double expected = 0;
  for (double v : clean.values) expected += 1e-4 * v * v + 1e-4;
  expected /= static_cast<double>(clean.values.size());
  double mean_sq = 0;
  for (std::uint64_t s = 0; s < 100; ++s) mean_sq += std::pow(rms_difference(add_noise(clean, {0.01, 0.01, s}), clean), 2);
  mean_sq /= 100;
  CHECK(std::sqrt(mean_sq) == doctest::Approx(std::sqrt(expected)).epsilon(0.2));
  CHECK(std::sqrt(mean_sq) == doctest::Approx(std::sqrt(expected)).epsilon(0.02));
}

TEST_CASE("preprocessing is nearly transparent to clean traces") {
  double worst = 0;
  for (std::uint64_t s = 0; s < 50; ++s) {
    const auto clean = synthesize_trace(generate_random_pulse(TimeGrid::make(64, 1.0), 2.5, s));
    const auto pre = preprocess(clean);
    worst = std::max(worst, rms_difference(pre, clean));
    CHECK(pre.peak() == 1.0);
    CHECK(*std::min_element(pre.values.begin(), pre.values.end()) >= 0.0);
  }
  CHECK(worst < 0.01);
}

TEST_CASE("preprocessing removes a constant background") {
  const auto clean = synthesize_trace(generate_random_pulse(TimeGrid::make(64, 1.0), 2.5, 2));
  const double b = 0.05;
  auto shifted = clean;
  for (auto& v : shifted.values) v += b;
  const auto pre = preprocess(shifted);
  CHECK(corner_max(pre, 8) < 0.1 * b);
}

TEST_CASE("preprocessing reduces noise") {
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto clean = synthesize_trace(generate_random_pulse(TimeGrid::make(64, 1.0), 2.5, 1000 + s));
    const auto noisy = add_noise(clean, {0.01, 0.01, s});
    CHECK(rms_difference(preprocess(noisy), clean) < rms_difference(noisy, clean));
  }
}

TEST_CASE("preprocessing a pure background fails") {
  auto t = FrogTrace::zeros(16, 1.0, 2 * std::numbers::pi / 16);
  for (auto& v : t.values) v = 0.3;
  try {
    preprocess(t);
    FAIL("expected AllZero");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::AllZero);
  }
}

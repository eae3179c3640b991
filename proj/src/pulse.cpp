#include "pgfrog/pulse.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "pgfrog/error.hpp"
#include "pgfrog/random.hpp"

namespace pgfrog {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

TimeGrid TimeGrid::make(std::size_t n, double dt, double t0) {
  if (!is_power_of_two(n) || n < 16)
    throw Error(Errc::InvalidArgument, "grid size must be a power of two >= 16, got " + std::to_string(n));
  if (!(dt > 0.0) || !std::isfinite(dt))
    throw Error(Errc::InvalidArgument, "grid spacing must be positive");
  return TimeGrid{n, dt, t0};
}

ComplexField::ComplexField(TimeGrid grid, std::vector<cplx> samples)
    : grid_(grid), samples_(std::move(samples)) {
  if (samples_.size() != grid_.n)
    throw Error(Errc::DimensionMismatch, "field length does not match its grid");
}

std::vector<double> ComplexField::intensity() const {
  std::vector<double> out(samples_.size());
  std::transform(samples_.begin(), samples_.end(), out.begin(), [](cplx v) { return std::norm(v); });
  return out;
}

double ComplexField::energy() const {
  double e = 0.0;
  for (const auto& v : samples_) e += std::norm(v);
  return e;
}

ComplexField ComplexField::peak_normalized() const {
  double peak = 0.0;
  for (const auto& v : samples_) peak = std::max(peak, std::norm(v));
  if (peak <= 0.0) return *this;
  const double scale = 1.0 / std::sqrt(peak);
  std::vector<cplx> out(samples_);
  for (auto& v : out) v *= scale;
  return ComplexField(grid_, std::move(out));
}

SpectralField forward_fourier(const ComplexField& field) {
  std::vector<cplx> data(field.samples().begin(), field.samples().end());
  centered_dft_rows(data, data.size(), FftDirection::Forward);
  return SpectralField{field.grid(), std::move(data)};
}

ComplexField inverse_fourier(const SpectralField& spectral) {
  std::vector<cplx> data(spectral.amplitudes);
  centered_dft_rows(data, data.size(), FftDirection::Inverse);
  return ComplexField(spectral.grid, std::move(data));
}

Spectrum spectrum_of(const ComplexField& field) {
  const auto spectral = forward_fourier(field);
  Spectrum out{field.grid(), std::vector<double>(field.size()), std::vector<double>(field.size())};
  for (std::size_t k = 0; k < field.size(); ++k) {
    out.intensity[k] = std::norm(spectral.amplitudes[k]);
    out.phase[k] = std::arg(spectral.amplitudes[k]);
  }
  return out;
}

Spectrum peak_normalized(Spectrum spectrum) {
  const double peak = spectrum.intensity.empty()
                          ? 0.0
                          : *std::max_element(spectrum.intensity.begin(), spectrum.intensity.end());
  if (peak > 0.0)
    for (auto& v : spectrum.intensity) v /= peak;
  return spectrum;
}

namespace {

// Weighted rms about the weighted mean; positions given by offset * step.
double rms_width(std::span<const double> weights, double step) {
  double w = 0.0, m1 = 0.0, m2 = 0.0;
  const double center = static_cast<double>(weights.size() / 2);
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double x = (static_cast<double>(i) - center) * step;
    w += weights[i];
    m1 += weights[i] * x;
    m2 += weights[i] * x * x;
  }
  m1 /= w;
  return std::sqrt(std::max(0.0, m2 / w - m1 * m1));
}

}  // namespace

PulseStats compute_stats(const ComplexField& field) {
  const auto intensity = field.intensity();
  double energy = 0.0;
  for (double v : intensity) energy += v;
  if (!(energy > 0.0)) throw Error(Errc::ZeroEnergy, "field has no energy");
  const auto spectrum = spectrum_of(field);
  PulseStats stats;
  stats.rms_t = rms_width(intensity, field.grid().dt);
  stats.rms_w = rms_width(spectrum.intensity, field.grid().domega());
  stats.tbp = stats.rms_t * stats.rms_w;
  return stats;
}

std::vector<double> linear_correlation(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(Errc::DimensionMismatch, "correlation inputs differ in length");
  const std::size_t n = a.size();
  const std::size_t m = 2 * n;
  std::vector<cplx> fa(m), fb(m);
  std::copy(a.begin(), a.end(), fa.begin());
  std::copy(b.begin(), b.end(), fb.begin());
  fft_rows(fa, m, FftDirection::Forward);
  fft_rows(fb, m, FftDirection::Forward);
  for (std::size_t k = 0; k < m; ++k) fa[k] *= std::conj(fb[k]);
  fft_rows(fa, m, FftDirection::Inverse);
  // fa[s mod m] = m * sum_t a(t) b(t - s)
  std::vector<double> out(n);
  const auto half = static_cast<std::ptrdiff_t>(n / 2);
  for (std::size_t j = 0; j < n; ++j) {
    const std::ptrdiff_t s = static_cast<std::ptrdiff_t>(j) - half;
    const std::size_t idx = static_cast<std::size_t>((s + static_cast<std::ptrdiff_t>(m)) % static_cast<std::ptrdiff_t>(m));
    out[j] = fa[idx].real() / static_cast<double>(m);
  }
  return out;
}

Autocorrelation autocorrelation(const ComplexField& field, int order) {
  if (order != 2 && order != 3) throw Error(Errc::InvalidArgument, "autocorrelation order must be 2 or 3");
  const auto intensity = field.intensity();
  std::vector<double> gate(intensity);
  if (order == 3)
    for (auto& v : gate) v *= v;
  return Autocorrelation{field.grid(), order, linear_correlation(intensity, gate)};
}

double edge_ratio(std::span<const double> values) {
  const std::size_t n = values.size();
  const std::size_t m = (n + 9) / 10;
  const double peak = *std::max_element(values.begin(), values.end());
  if (!(peak > 0.0)) return 0.0;
  double edge = 0.0;
  for (std::size_t i = 0; i < m; ++i) edge = std::max({edge, values[i], values[n - 1 - i]});
  return edge / peak;
}

ContainmentReport containment(const ComplexField& field) {
  ContainmentReport report;
  report.time_edge_ratio = edge_ratio(field.intensity());
  report.freq_edge_ratio = edge_ratio(spectrum_of(field).intensity);
  return report;
}

ComplexField gaussian_pulse(const TimeGrid& grid, double sigma, double shift) {
  std::vector<cplx> samples(grid.n);
  for (std::size_t i = 0; i < grid.n; ++i) {
    const double t = grid.offset(i) * grid.dt - shift;
    samples[i] = std::exp(-t * t / (2.0 * sigma * sigma));
  }
  return ComplexField(grid, std::move(samples));
}

std::size_t grid_size_for_tbp(double tbp) {
  std::size_t n = 64;
  while (static_cast<double>(n) < 25.0 * tbp) n *= 2;
  return n;
}

namespace {

constexpr int kMaxDraws = 16;
constexpr int kMaxRescales = 8;
constexpr int kMaxBisections = 60;
constexpr double kAspectStep = 0.85;

struct PulseSynth {
  const TimeGrid& grid;
  std::vector<cplx> noise;  // white noise per frequency bin

  // Spectral amplitude envelope exp(-w^2 / 2 sw^2); temporal exp(-t^2 / 2 st^2).
  ComplexField build(double sigma_w, double sigma_t) const {
    const std::size_t n = grid.n;
    std::vector<cplx> spec(n, cplx{});
    if (sigma_w <= 0.0) {
      spec[n / 2] = noise[n / 2];
    } else {
      for (std::size_t k = 0; k < n; ++k) {
        const double w = grid.omega(k) / sigma_w;
        spec[k] = noise[k] * std::exp(-0.5 * w * w);
      }
    }
    centered_dft_rows(spec, n, FftDirection::Inverse);
    for (std::size_t i = 0; i < n; ++i) {
      const double t = grid.offset(i) * grid.dt / sigma_t;
      spec[i] *= std::exp(-0.5 * t * t);
    }
    return ComplexField(grid, std::move(spec)).peak_normalized();
  }
};

}  // namespace

ComplexField generate_random_pulse(const TimeGrid& grid, double target_tbp, std::uint64_t seed) {
  if (!(target_tbp >= 0.5)) throw Error(Errc::InvalidArgument, "target TBP must be >= 0.5");
  const double half_t = 0.5 * static_cast<double>(grid.n) * grid.dt;
  const double half_w = std::numbers::pi / grid.dt;

  // Each draw is a fresh noise realization; within a draw the aspect ratio is
  // rescaled toward whichever axis is overflowing.
  for (int draw = 0; draw < kMaxDraws; ++draw) {
    std::mt19937_64 rng(derive_seed(seed, Stream::Pulse, static_cast<std::uint64_t>(draw)));
    std::normal_distribution<double> normal(0.0, 1.0);
    PulseSynth synth{grid, std::vector<cplx>(grid.n)};
    for (auto& c : synth.noise) {
      const double re = normal(rng);
      const double im = normal(rng);
      c = cplx(re, im) / std::numbers::sqrt2;
    }
    // A vanishing center bin would make the transform-limited end degenerate.
    if (std::abs(synth.noise[grid.n / 2]) < 1e-3) synth.noise[grid.n / 2] = 1.0;

    double aspect = 1.0;
    for (int attempt = 0; attempt <= kMaxRescales; ++attempt) {
      // Balanced target: both rms widths occupy the same fraction of their axis.
      const double target_rms_t = std::sqrt(target_tbp * half_t / half_w) * aspect;
      const double sigma_t = std::numbers::sqrt2 * target_rms_t;
      auto tbp_at = [&](double sigma_w) { return compute_stats(synth.build(sigma_w, sigma_t)).tbp; };

      double lo = 0.0;
      double hi = target_tbp / target_rms_t;
      while (tbp_at(hi) < target_tbp && hi < half_w) hi *= 1.5;
      hi = std::min(hi, half_w);

      double best_sigma = lo;
      double best_err = std::abs(tbp_at(lo) - target_tbp);
      if (const double err = std::abs(tbp_at(hi) - target_tbp); err < best_err) {
        best_sigma = hi;
        best_err = err;
      }
      for (int it = 0; it < kMaxBisections && best_err > 0.02 * target_tbp; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double tbp = tbp_at(mid);
        const double err = std::abs(tbp - target_tbp);
        if (err < best_err) {
          best_err = err;
          best_sigma = mid;
        }
        (tbp < target_tbp ? lo : hi) = mid;
      }
      if (best_err > 0.1 * target_tbp) break;

      auto pulse = synth.build(best_sigma, sigma_t);
      const auto report = containment(pulse);
      if (report.contained()) return pulse;
      const bool time_bad = report.time_edge_ratio >= 1e-4;
      const bool freq_bad = report.freq_edge_ratio >= 1e-4;
      if (time_bad && freq_bad) break;
      aspect *= time_bad ? kAspectStep : 1.0 / kAspectStep;
    }
  }
  throw Error(Errc::GridTooSmall,
              "pulse with TBP " + std::to_string(target_tbp) + " does not fit on an n=" +
                  std::to_string(grid.n) + " grid");
}

}  // namespace pgfrog

#pragma once

#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "pgfrog/fourier.hpp"

namespace pgfrog {

// Uniform, centered time grid: sample i sits at t0 + (i - n/2) dt. The
// conjugate frequency grid is centered the same way with dw = 2pi / (n dt).
struct TimeGrid {
  std::size_t n = 0;
  double dt = 0.0;  // fs
  double t0 = 0.0;  // fs

  // Validates n (power of two, >= 16) and dt > 0.
  static TimeGrid make(std::size_t n, double dt, double t0 = 0.0);

  double time(std::size_t i) const { return t0 + offset(i) * dt; }
  double domega() const { return 2.0 * std::numbers::pi / (static_cast<double>(n) * dt); }
  double omega(std::size_t k) const { return offset(k) * domega(); }
  double offset(std::size_t i) const {
    return static_cast<double>(i) - static_cast<double>(n / 2);
  }

  bool operator==(const TimeGrid&) const = default;
};

bool is_power_of_two(std::size_t n);

class ComplexField {
 public:
  ComplexField(TimeGrid grid, std::vector<cplx> samples);

  const TimeGrid& grid() const { return grid_; }
  std::span<const cplx> samples() const { return samples_; }
  std::size_t size() const { return samples_.size(); }
  const cplx& operator[](std::size_t i) const { return samples_[i]; }

  std::vector<double> intensity() const;
  double energy() const;
  ComplexField peak_normalized() const;

  bool operator==(const ComplexField&) const = default;

 private:
  TimeGrid grid_;
  std::vector<cplx> samples_;
};

// Complex amplitude on the frequency grid conjugate to `grid`.
struct SpectralField {
  TimeGrid grid;
  std::vector<cplx> amplitudes;

  double omega(std::size_t k) const { return grid.omega(k); }
};

struct Spectrum {
  TimeGrid grid;                  // originating time grid; frequency axis is its conjugate
  std::vector<double> intensity;  // >= 0
  std::vector<double> phase;      // rad, empty when unknown

  double omega(std::size_t k) const { return grid.omega(k); }
  std::size_t size() const { return intensity.size(); }
};

// Delay axis coincides with the time grid positions: tau_j = (j - n/2) dt.
struct Autocorrelation {
  TimeGrid grid;
  int order = 2;
  std::vector<double> values;

  double delay(std::size_t j) const { return grid.offset(j) * grid.dt; }
};

struct PulseStats {
  double rms_t = 0.0;  // fs
  double rms_w = 0.0;  // rad/fs
  double tbp = 0.0;
};

SpectralField forward_fourier(const ComplexField& field);
ComplexField inverse_fourier(const SpectralField& spectral);

Spectrum spectrum_of(const ComplexField& field);
Spectrum peak_normalized(Spectrum spectrum);

// rms widths under |E(t)|^2 and |E(w)|^2; throws ZeroEnergy.
PulseStats compute_stats(const ComplexField& field);

// Linear cross-correlation c(s) = sum_t a(t) b(t - s) for lags s in
// [-n/2, n/2), stored at index s + n/2. Zero-padded, so nothing wraps.
std::vector<double> linear_correlation(std::span<const double> a, std::span<const double> b);

// order 2: sum_t I(t) I(t-tau); order 3: sum_t I(t) I(t-tau)^2.
Autocorrelation autocorrelation(const ComplexField& field, int order);

struct ContainmentReport {
  double time_edge_ratio = 0.0;  // max edge intensity / peak, outer 10% per side
  double freq_edge_ratio = 0.0;
  bool contained(double threshold = 1e-4) const {
    return time_edge_ratio < threshold && freq_edge_ratio < threshold;
  }
};

ContainmentReport containment(const ComplexField& field);

// Max of values over the outer ceil(n/10) samples on each side, relative to
// the overall max.
double edge_ratio(std::span<const double> values);

// Random pulse: complex white noise in frequency times a Gaussian spectral
// envelope, transformed to time and multiplied by a Gaussian temporal
// envelope. The spectral envelope width is bisected until the rms TBP is
// within 2% of target (10% hard limit). When the pulse spills into the outer
// 10% of either axis (intensity >= 1e-4 of peak) the temporal/spectral aspect
// is rescaled by 0.85 toward the overflowing axis, up to 8 times, and then a
// fresh noise draw is taken (16 draws per seed). Throws GridTooSmall when no
// draw fits.
ComplexField generate_random_pulse(const TimeGrid& grid, double target_tbp, std::uint64_t seed);

// Smallest power of two >= 25 * tbp (the TBP/array-size pairing used for
// the default schedules), at least 64.
std::size_t grid_size_for_tbp(double tbp);

// Transform-limited Gaussian exp(-t^2 / 2 sigma^2) centered at t = shift.
ComplexField gaussian_pulse(const TimeGrid& grid, double sigma, double shift = 0.0);

}  // namespace pgfrog

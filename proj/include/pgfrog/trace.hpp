#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "pgfrog/pulse.hpp"

namespace pgfrog {

// Square PG FROG trace. values[i * n + j]: i = frequency bin, j = delay bin;
// both axes centered (bin n/2 is zero). Frequencies are offsets from the
// pulse's center frequency.
struct FrogTrace {
  std::size_t n = 0;
  double dtau = 0.0;    // fs
  double domega = 0.0;  // rad/fs
  std::vector<double> values;

  static FrogTrace zeros(std::size_t n, double dtau, double domega);

  double& at(std::size_t freq, std::size_t delay) { return values[freq * n + delay]; }
  double at(std::size_t freq, std::size_t delay) const { return values[freq * n + delay]; }
  double delay(std::size_t j) const { return centered(j) * dtau; }
  double omega(std::size_t i) const { return centered(i) * domega; }
  double centered(std::size_t i) const {
    return static_cast<double>(i) - static_cast<double>(n / 2);
  }

  double peak() const;
  FrogTrace scaled(double factor) const;
  // Divides by the maximum when it is positive; exact no-op on peak-1 traces.
  FrogTrace peak_normalized() const;
};

struct NoiseSpec {
  double multiplicative_fraction = 0.01;
  double additive_fraction = 0.01;  // relative to the trace peak
  std::uint64_t seed = 0;
};

// E(t) |E(t - tau)|^2 for tau = shift * dt; the gate is zero outside the grid.
std::vector<cplx> pg_signal_field(const ComplexField& field, std::ptrdiff_t shift);

// Delay-major buffer of signal spectra: out[j * n + i] is the centered,
// unitary transform over t of E(t) I(t - tau_j), with I = gate intensity.
// Shared by trace synthesis and the GP data projection.
void pg_signal_spectra(std::span<const cplx> field, std::span<const double> gate, std::span<cplx> out);

// |FT_t{E(t)|E(t - tau)|^2}|^2, peak-normalized, delay spacing = dt.
FrogTrace synthesize_trace(const ComplexField& field);

// Same without the peak normalization (absolute model scale).
FrogTrace synthesize_trace_unnormalized(const ComplexField& field);

// out = I (1 + m g1) + a peak g2 with independent standard normal g1, g2.
// Not clipped.
FrogTrace add_noise(const FrogTrace& trace, const NoiseSpec& spec);

struct PreprocessParams {
  std::size_t corner_block = 8;
  double passband_fraction = 0.75;  // half-max width of the passband, fraction of each axis
  int passband_order = 6;
};

// Corner-background subtraction, 2-D super-Gaussian Fourier low-pass,
// clip at zero, peak-normalize. Throws AllZero.
FrogTrace preprocess(const FrogTrace& trace, const PreprocessParams& params = {});

// Root-mean-square pixel difference between two equally sized traces.
double rms_difference(const FrogTrace& a, const FrogTrace& b);

}  // namespace pgfrog

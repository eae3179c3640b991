#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "pgfrog/pulse.hpp"
#include "pgfrog/trace.hpp"

namespace pgfrog {

enum class MarginalKind { Frequency, Delay };

struct Marginal {
  MarginalKind kind = MarginalKind::Delay;
  double spacing = 0.0;  // rad/fs or fs
  std::vector<double> values;

  double axis(std::size_t i) const {
    return (static_cast<double>(i) - static_cast<double>(values.size() / 2)) * spacing;
  }
};

struct ScaledFit {
  double mu = 0.0;
  double rms = 0.0;
};

struct PCalibration {
  std::vector<double> p_grid;
  std::vector<double> mean_rms;
  double p_star = 0.0;
};

inline constexpr double kDefaultP = 0.73;
inline constexpr double kDivisionThreshold = 1e-3;

// sum_j trace(i, j) dtau
Marginal frequency_marginal(const FrogTrace& trace);
// sum_i trace(i, j) domega
Marginal delay_marginal(const FrogTrace& trace);

// (m(tau) + m(-tau)) / 2 about the center bin. Bin 0 has no mirror on an
// even grid and is left as is.
Marginal symmetrize(const Marginal& m);

// (max(m, 0) / max m)^p. Throws DegenerateMarginal when max m <= 0.
Marginal power_modify(const Marginal& m, double p);

// B = max(b, 0)^p, mu = sum a2 B / sum B^2, rms = sqrt(mean (a2 - mu B)^2).
ScaledFit rms_fit(std::span<const double> a2, std::span<const double> b, double p);

// Reference curve: A2 of each pulse (peak 1) against its symmetrized A3
// raised to p, averaged over the set for every p in the grid.
PCalibration calibrate_p(std::span<const ComplexField> pulses, std::span<const double> p_grid,
                         std::size_t threads = 1);

// The default sweep, 0.60 .. 0.80 in steps of 0.01.
std::vector<double> default_p_grid();

struct SpectrumRetrievalOptions {
  double p = kDefaultP;
  double delta = kDivisionThreshold;
};

// Spectrum estimate from the marginals: forward transform of
// F^-1{M(w)} / (A3_s)^p, where the denominator is the symmetrized,
// power-modified delay marginal. Denominator bins at or below delta * max are
// replaced by the nearest bin above threshold. The real part is clipped at
// zero and peak-normalized.
Spectrum retrieve_spectrum(const FrogTrace& trace, const SpectrumRetrievalOptions& options = {});

// Interpolates the trace onto axes with dtau' = stretch dtau and
// dw' = dw / stretch, retrieves the spectrum there and interpolates it back
// onto the original frequency axis.
Spectrum resample_robustness_check(const FrogTrace& trace, double stretch,
                                   const SpectrumRetrievalOptions& options = {});

// Bilinear resampling onto a new pair of centered axes; zero outside.
FrogTrace resample_trace(const FrogTrace& trace, double dtau, double domega);

// Root-mean-square difference of two peak-normalized spectra over all bins.
double spectrum_rms_error(const Spectrum& estimate, const Spectrum& truth);

}  // namespace pgfrog

#include "pgfrog/marginals.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pgfrog/error.hpp"
#include "pgfrog/parallel.hpp"

namespace pgfrog {

Marginal frequency_marginal(const FrogTrace& trace) {
  Marginal m{MarginalKind::Frequency, trace.domega, std::vector<double>(trace.n, 0.0)};
  for (std::size_t i = 0; i < trace.n; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < trace.n; ++j) sum += trace.at(i, j);
    m.values[i] = sum * trace.dtau;
  }
  return m;
}

Marginal delay_marginal(const FrogTrace& trace) {
  Marginal m{MarginalKind::Delay, trace.dtau, std::vector<double>(trace.n, 0.0)};
  for (std::size_t i = 0; i < trace.n; ++i)
    for (std::size_t j = 0; j < trace.n; ++j) m.values[j] += trace.at(i, j);
  for (auto& v : m.values) v *= trace.domega;
  return m;
}

Marginal symmetrize(const Marginal& m) {
  Marginal out(m);
  const std::size_t n = m.values.size();
  const std::size_t c = n / 2;
  for (std::size_t s = 1; s < n - c; ++s) {
    const double avg = 0.5 * (m.values[c + s] + m.values[c - s]);
    out.values[c + s] = avg;
    out.values[c - s] = avg;
  }
  return out;
}

Marginal power_modify(const Marginal& m, double p) {
  if (!(p > 0.0 && p <= 1.0)) throw Error(Errc::InvalidArgument, "power must lie in (0, 1]");
  const double peak = m.values.empty() ? 0.0 : *std::max_element(m.values.begin(), m.values.end());
  if (!(peak > 0.0)) throw Error(Errc::DegenerateMarginal, "marginal has no positive values");
  Marginal out(m);
  for (auto& v : out.values) v = std::pow(std::max(v, 0.0) / peak, p);
  return out;
}

ScaledFit rms_fit(std::span<const double> a2, std::span<const double> b, double p) {
  if (a2.size() != b.size()) throw Error(Errc::DimensionMismatch, "fit inputs differ in length");
  double ab = 0.0, bb = 0.0;
  std::vector<double> powered(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) {
    powered[i] = std::pow(std::max(b[i], 0.0), p);
    ab += a2[i] * powered[i];
    bb += powered[i] * powered[i];
  }
  if (!(bb > 0.0)) throw Error(Errc::DegenerateMarginal, "powered marginal is identically zero");
  ScaledFit fit;
  fit.mu = ab / bb;
  double sum = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    const double d = a2[i] - fit.mu * powered[i];
    sum += d * d;
  }
  fit.rms = std::sqrt(sum / static_cast<double>(b.size()));
  return fit;
}

std::vector<double> default_p_grid() {
  std::vector<double> grid;
  for (int k = 60; k <= 80; ++k) grid.push_back(k / 100.0);
  return grid;
}

PCalibration calibrate_p(std::span<const ComplexField> pulses, std::span<const double> p_grid,
                         std::size_t threads) {
  if (pulses.size() < 10) throw Error(Errc::InvalidArgument, "p calibration needs at least 10 pulses");
  if (p_grid.empty()) throw Error(Errc::InvalidArgument, "empty p grid");
  for (std::size_t k = 0; k < p_grid.size(); ++k) {
    if (p_grid[k] < 0.6 - 1e-12 || p_grid[k] > 0.8 + 1e-12)
      throw Error(Errc::InvalidArgument, "p grid must lie within [0.6, 0.8]");
    if (k > 0 && (p_grid[k] <= p_grid[k - 1] || p_grid[k] - p_grid[k - 1] > 0.01 + 1e-9))
      throw Error(Errc::InvalidArgument, "p grid must increase in steps of at most 0.01");
  }

  std::vector<std::vector<double>> per_pulse(pulses.size());
  parallel_for(pulses.size(), threads, [&](std::size_t idx) {
    auto a2 = autocorrelation(pulses[idx], 2).values;
    const double peak = *std::max_element(a2.begin(), a2.end());
    for (auto& v : a2) v /= peak;
    const auto a3 = autocorrelation(pulses[idx], 3);
    const auto sym = symmetrize(Marginal{MarginalKind::Delay, a3.grid.dt, a3.values});
    const auto b = power_modify(sym, 1.0);
    per_pulse[idx].reserve(p_grid.size());
    for (double p : p_grid) per_pulse[idx].push_back(rms_fit(a2, b.values, p).rms);
  });

  PCalibration cal;
  cal.p_grid.assign(p_grid.begin(), p_grid.end());
  cal.mean_rms.assign(p_grid.size(), 0.0);
  for (const auto& row : per_pulse)
    for (std::size_t k = 0; k < row.size(); ++k) cal.mean_rms[k] += row[k];
  for (auto& v : cal.mean_rms) v /= static_cast<double>(pulses.size());

  std::size_t best = 0;
  for (std::size_t k = 1; k < p_grid.size(); ++k) {
    const double a = cal.mean_rms[k], b = cal.mean_rms[best];
    if (a < b || (a == b && std::abs(p_grid[k] - kDefaultP) < std::abs(p_grid[best] - kDefaultP))) best = k;
  }
  cal.p_star = p_grid[best];
  return cal;
}

Spectrum retrieve_spectrum(const FrogTrace& trace, const SpectrumRetrievalOptions& options) {
  const std::size_t n = trace.n;
  const auto grid = TimeGrid::make(n, trace.dtau);

  const auto freq = frequency_marginal(trace);
  std::vector<cplx> q(freq.values.begin(), freq.values.end());
  centered_dft_rows(q, n, FftDirection::Inverse);
  double q_peak = 0.0;
  for (const auto& v : q) q_peak = std::max(q_peak, std::abs(v));
  if (!(q_peak > 0.0)) throw Error(Errc::DegenerateMarginal, "frequency marginal is identically zero");

  auto denom = power_modify(symmetrize(delay_marginal(trace)), options.p).values;
  const double threshold = options.delta;  // denominator is peak-normalized
  std::vector<std::size_t> above;
  for (std::size_t j = 0; j < n; ++j)
    if (denom[j] > threshold) above.push_back(j);
  if (above.empty()) throw Error(Errc::DegenerateMarginal, "no delay bin above the division threshold");

  std::vector<double> patched(denom);
  for (std::size_t j = 0; j < n; ++j) {
    if (denom[j] > threshold) continue;
    // Nearest above-threshold bin; ties go toward the center.
    auto it = std::lower_bound(above.begin(), above.end(), j);
    std::size_t pick;
    if (it == above.end()) {
      pick = above.back();
    } else if (it == above.begin()) {
      pick = *it;
    } else {
      const std::size_t right = *it, left = *(it - 1);
      const std::size_t dl = j - left, dr = right - j;
      if (dl != dr) {
        pick = dl < dr ? left : right;
      } else {
        pick = (j < n / 2) ? right : left;
      }
    }
    patched[j] = denom[pick];
  }

  for (std::size_t j = 0; j < n; ++j) {
    q[j] = (q[j] / q_peak) / patched[j];
    if (!std::isfinite(q[j].real()) || !std::isfinite(q[j].imag()))
      throw Error(Errc::NonFiniteQuotient, "marginal quotient is not finite");
  }
  centered_dft_rows(q, n, FftDirection::Forward);

  Spectrum out{grid, std::vector<double>(n), {}};
  for (std::size_t k = 0; k < n; ++k) out.intensity[k] = std::max(0.0, q[k].real());
  const double peak = *std::max_element(out.intensity.begin(), out.intensity.end());
  if (!(peak > 0.0)) throw Error(Errc::DegenerateMarginal, "spectrum estimate is identically zero");
  for (auto& v : out.intensity) v /= peak;
  return out;
}

namespace {

// Linear interpolation of centered samples at coordinate x (in units of the
// sample spacing, 0 = center bin); zero outside the sampled range.
double interp_centered(std::span<const double> values, double x) {
  const double pos = x + static_cast<double>(values.size() / 2);
  if (pos < 0.0 || pos > static_cast<double>(values.size() - 1)) return 0.0;
  const auto i0 = static_cast<std::size_t>(std::floor(pos));
  const double f = pos - static_cast<double>(i0);
  if (i0 + 1 >= values.size()) return values[i0];
  return (1.0 - f) * values[i0] + f * values[i0 + 1];
}

}  // namespace

namespace {

// Band-limited (periodic sinc) interpolation matrix from n centered samples
// onto positions x_j = scale * (j - n/2), in units of the old spacing; rows
// for positions outside the sampled range are zero.
Eigen::MatrixXd sinc_resampler(std::size_t n, double scale) {
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  const double h = static_cast<double>(n / 2);
  const double nd = static_cast<double>(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double x = scale * (static_cast<double>(j) - h);
    if (x < -h || x > h - 1.0) continue;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = x - (static_cast<double>(i) - h);
      const double k = std::abs(d) < 1e-12 ? 1.0
                                            : std::sin(std::numbers::pi * d) / (nd * std::tan(std::numbers::pi * d / nd));
      r(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = k;
    }
  }
  return r;
}

}  // namespace

FrogTrace resample_trace(const FrogTrace& trace, double dtau, double domega) {
  const std::size_t n = trace.n;
  const auto en = static_cast<Eigen::Index>(n);
  // values are row-major (frequency, delay)
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> in(trace.values.data(), en, en);
  const Eigen::MatrixXd rows = sinc_resampler(n, domega / trace.domega);
  const Eigen::MatrixXd cols = sinc_resampler(n, dtau / trace.dtau);
  const Eigen::MatrixXd resampled = rows * in * cols.transpose();
  FrogTrace out = FrogTrace::zeros(n, dtau, domega);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      out.at(i, j) = std::max(0.0, resampled(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
  return out.peak_normalized();
}

Spectrum resample_robustness_check(const FrogTrace& trace, double stretch,
                                   const SpectrumRetrievalOptions& options) {
  if (!(stretch >= 0.5 && stretch <= 2.0)) throw Error(Errc::InvalidArgument, "stretch must lie in [0.5, 2]");
  if (stretch == 1.0) return retrieve_spectrum(trace, options);
  const auto stretched = resample_trace(trace, trace.dtau * stretch, trace.domega / stretch);
  const auto estimate = retrieve_spectrum(stretched, options);
  Spectrum out{TimeGrid::make(trace.n, trace.dtau), std::vector<double>(trace.n), {}};
  const double new_dw = stretched.domega;
  for (std::size_t k = 0; k < trace.n; ++k)
    out.intensity[k] = interp_centered(estimate.intensity, trace.omega(k) / new_dw);
  return peak_normalized(std::move(out));
}

double spectrum_rms_error(const Spectrum& estimate, const Spectrum& truth) {
  if (estimate.size() != truth.size()) throw Error(Errc::DimensionMismatch, "spectra differ in length");
  const auto a = peak_normalized(estimate);
  const auto b = peak_normalized(truth);
  double sum = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a.intensity[k] - b.intensity[k];
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(a.size()));
}

}  // namespace pgfrog

#include "pgfrog/trace.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "pgfrog/error.hpp"
#include "pgfrog/random.hpp"

namespace pgfrog {

FrogTrace FrogTrace::zeros(std::size_t n, double dtau, double domega) {
  if (!is_power_of_two(n)) throw Error(Errc::InvalidArgument, "trace size must be a power of two");
  return FrogTrace{n, dtau, domega, std::vector<double>(n * n, 0.0)};
}

double FrogTrace::peak() const {
  return values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
}

FrogTrace FrogTrace::scaled(double factor) const {
  FrogTrace out(*this);
  for (auto& v : out.values) v *= factor;
  return out;
}

FrogTrace FrogTrace::peak_normalized() const {
  const double p = peak();
  if (!(p > 0.0) || p == 1.0) return *this;
  FrogTrace out(*this);
  for (auto& v : out.values) v /= p;  // division keeps the peak exactly 1
  return out;
}

std::vector<cplx> pg_signal_field(const ComplexField& field, std::ptrdiff_t shift) {
  const auto n = static_cast<std::ptrdiff_t>(field.size());
  if (shift <= -n || shift >= n) throw Error(Errc::InvalidArgument, "delay index out of range");
  std::vector<cplx> out(field.size(), cplx{});
  for (std::ptrdiff_t k = std::max<std::ptrdiff_t>(0, shift); k < std::min(n, n + shift); ++k)
    out[static_cast<std::size_t>(k)] =
        field[static_cast<std::size_t>(k)] * std::norm(field[static_cast<std::size_t>(k - shift)]);
  return out;
}

void pg_signal_spectra(std::span<const cplx> field, std::span<const double> gate, std::span<cplx> out) {
  const std::size_t n = field.size();
  if (gate.size() != n || out.size() != n * n)
    throw Error(Errc::DimensionMismatch, "signal buffer does not match the field");
  const auto sn = static_cast<std::ptrdiff_t>(n);
  for (std::ptrdiff_t j = 0; j < sn; ++j) {
    const std::ptrdiff_t shift = j - sn / 2;
    cplx* row = out.data() + j * sn;
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, shift);
    const std::ptrdiff_t hi = std::min(sn, sn + shift);
    std::fill(row, row + lo, cplx{});
    for (std::ptrdiff_t k = lo; k < hi; ++k) row[k] = field[k] * gate[k - shift];
    std::fill(row + hi, row + sn, cplx{});
  }
  centered_dft_rows(out, n, FftDirection::Forward);
}

FrogTrace synthesize_trace_unnormalized(const ComplexField& field) {
  const std::size_t n = field.size();
  const auto gate = field.intensity();
  std::vector<cplx> spectra(n * n);
  pg_signal_spectra(field.samples(), gate, spectra);
  FrogTrace trace = FrogTrace::zeros(n, field.grid().dt, field.grid().domega());
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) trace.values[i * n + j] = std::norm(spectra[j * n + i]);
  return trace;
}

FrogTrace synthesize_trace(const ComplexField& field) {
  return synthesize_trace_unnormalized(field).peak_normalized();
}

FrogTrace add_noise(const FrogTrace& trace, const NoiseSpec& spec) {
  if (spec.multiplicative_fraction < 0.0 || spec.additive_fraction < 0.0)
    throw Error(Errc::InvalidArgument, "noise fractions must be non-negative");
  FrogTrace out(trace);
  if (spec.multiplicative_fraction == 0.0 && spec.additive_fraction == 0.0) return out;
  std::mt19937_64 rng(derive_seed(spec.seed, Stream::Noise));
  std::normal_distribution<double> normal(0.0, 1.0);
  const double additive = spec.additive_fraction * trace.peak();
  for (auto& v : out.values) {
    const double g1 = normal(rng);
    const double g2 = normal(rng);
    v = v * (1.0 + spec.multiplicative_fraction * g1) + additive * g2;
  }
  return out;
}

namespace {

void transpose(std::vector<cplx>& data, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) std::swap(data[i * n + j], data[j * n + i]);
}

}  // namespace

FrogTrace preprocess(const FrogTrace& trace, const PreprocessParams& params) {
  const std::size_t n = trace.n;
  FrogTrace out(trace);

  const std::size_t b = std::min(params.corner_block, n / 2);
  double background = 0.0;
  for (std::size_t i = 0; i < b; ++i)
    for (std::size_t j = 0; j < b; ++j)
      background += trace.at(i, j) + trace.at(i, n - 1 - j) + trace.at(n - 1 - i, j) +
                    trace.at(n - 1 - i, n - 1 - j);
  background /= static_cast<double>(4 * b * b);
  for (auto& v : out.values) v -= background;
  if (!(out.peak() > 0.0)) throw Error(Errc::AllZero, "trace is non-positive after background subtraction");

  // Separable super-Gaussian passband exp(-ln2 (u/h)^order) per axis, half
  // maximum at h = fraction * n/2 bins from the center.
  std::vector<double> passband(n);
  const double h = params.passband_fraction * static_cast<double>(n) / 2.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double u = (static_cast<double>(k) - static_cast<double>(n / 2)) / h;
    passband[k] = std::exp(-std::log(2.0) * std::pow(std::abs(u), params.passband_order));
  }

  std::vector<cplx> buf(out.values.begin(), out.values.end());
  centered_dft_rows(buf, n, FftDirection::Forward);
  transpose(buf, n);
  centered_dft_rows(buf, n, FftDirection::Forward);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) buf[i * n + j] *= passband[i] * passband[j];
  centered_dft_rows(buf, n, FftDirection::Inverse);
  transpose(buf, n);
  centered_dft_rows(buf, n, FftDirection::Inverse);

  for (std::size_t k = 0; k < n * n; ++k) out.values[k] = std::max(0.0, buf[k].real());
  if (!(out.peak() > 0.0)) throw Error(Errc::AllZero, "trace vanished after filtering");
  return out.peak_normalized();
}

double rms_difference(const FrogTrace& a, const FrogTrace& b) {
  if (a.n != b.n) throw Error(Errc::DimensionMismatch, "trace sizes differ");
  double sum = 0.0;
  for (std::size_t k = 0; k < a.values.size(); ++k) {
    const double d = a.values[k] - b.values[k];
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(a.values.size()));
}

}  // namespace pgfrog

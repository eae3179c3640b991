#include "pgfrog/gp.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "pgfrog/error.hpp"

namespace pgfrog {

namespace {

double re_dot(cplx a, cplx b) { return a.real() * b.real() + a.imag() * b.imag(); }

// Metrics from row-major-compatible views: both spans index the same pixel
// at the same position.
ErrorMetrics metrics_of(std::span<const double> measured, std::span<const double> retrieved) {
  double mr = 0.0, rr = 0.0, mm = 0.0;
  for (std::size_t k = 0; k < measured.size(); ++k) {
    mr += measured[k] * retrieved[k];
    rr += retrieved[k] * retrieved[k];
    mm += measured[k] * measured[k];
  }
  ErrorMetrics m;
  m.mu = rr > 0.0 ? mr / rr : 0.0;
  // sum (I_m - mu I_r)^2 = mm - 2 mu mr + mu^2 rr, evaluated directly for accuracy.
  double sum = 0.0;
  for (std::size_t k = 0; k < measured.size(); ++k) {
    const double d = measured[k] - m.mu * retrieved[k];
    sum += d * d;
  }
  m.g = std::sqrt(sum / static_cast<double>(measured.size()));
  m.g_prime = mm > 0.0 ? std::sqrt(sum / mm) : 0.0;
  return m;
}

void require_same_size(const ComplexField& field, const FrogTrace& trace) {
  if (field.size() != trace.n) throw Error(Errc::DimensionMismatch, "field and trace sizes differ");
}

// Magnitude replacement on delay-major spectra followed by the inverse
// transform over frequency. `amplitude` is delay-major sqrt(measured).
void replace_magnitudes(std::span<cplx> spectra, std::span<const double> amplitude, std::size_t n) {
  for (std::size_t k = 0; k < spectra.size(); ++k) {
    const double a = amplitude[k];
    const double mag = std::abs(spectra[k]);
    if (a == 0.0) {
      spectra[k] = 0.0;
    } else if (mag == 0.0) {
      spectra[k] = a;
    } else {
      spectra[k] *= a / mag;
    }
  }
  centered_dft_rows(spectra, n, FftDirection::Inverse);
}

struct Loss {
  double z = 0.0;
  std::vector<cplx> grad;
};

Loss loss_and_gradient(std::span<const cplx> signal, std::span<const cplx> e) {
  const auto n = static_cast<std::ptrdiff_t>(e.size());
  std::vector<double> intensity(e.size());
  for (std::size_t m = 0; m < e.size(); ++m) intensity[m] = std::norm(e[m]);
  Loss loss{0.0, std::vector<cplx>(e.size())};
  std::vector<double> h(e.size(), 0.0);
  for (std::ptrdiff_t j = 0; j < n; ++j) {
    const std::ptrdiff_t s = j - n / 2;
    const cplx* row = signal.data() + j * n;
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, s);
    const std::ptrdiff_t hi = std::min(n, n + s);
    for (std::ptrdiff_t k = 0; k < lo; ++k) loss.z += std::norm(row[k]);
    for (std::ptrdiff_t k = hi; k < n; ++k) loss.z += std::norm(row[k]);
    for (std::ptrdiff_t k = lo; k < hi; ++k) {
      const double g = intensity[k - s];
      const cplx r = row[k] - e[k] * g;
      loss.z += std::norm(r);
      loss.grad[k] -= 2.0 * g * r;
      h[k - s] += re_dot(r, e[k]);
    }
  }
  for (std::size_t m = 0; m < e.size(); ++m) loss.grad[m] -= 4.0 * h[m] * e[m];
  return loss;
}

// Coefficients c[0..6] of Z(e + a d) as a polynomial in a.
std::array<double, 7> line_polynomial(std::span<const cplx> signal, std::span<const cplx> e,
                                      std::span<const cplx> d) {
  const auto n = static_cast<std::ptrdiff_t>(e.size());
  std::vector<double> g0(e.size()), g1(e.size()), g2(e.size());
  for (std::size_t m = 0; m < e.size(); ++m) {
    g0[m] = std::norm(e[m]);
    g1[m] = 2.0 * re_dot(e[m], d[m]);
    g2[m] = std::norm(d[m]);
  }
  std::array<double, 7> c{};
  for (std::ptrdiff_t j = 0; j < n; ++j) {
    const std::ptrdiff_t s = j - n / 2;
    const cplx* row = signal.data() + j * n;
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, s);
    const std::ptrdiff_t hi = std::min(n, n + s);
    for (std::ptrdiff_t k = 0; k < lo; ++k) c[0] += std::norm(row[k]);
    for (std::ptrdiff_t k = hi; k < n; ++k) c[0] += std::norm(row[k]);
    for (std::ptrdiff_t k = lo; k < hi; ++k) {
      const std::ptrdiff_t m = k - s;
      const cplx r0 = row[k] - e[k] * g0[m];
      const cplx r1 = -(d[k] * g0[m] + e[k] * g1[m]);
      const cplx r2 = -(d[k] * g1[m] + e[k] * g2[m]);
      const cplx r3 = -d[k] * g2[m];
      c[0] += std::norm(r0);
      c[1] += 2.0 * re_dot(r0, r1);
      c[2] += std::norm(r1) + 2.0 * re_dot(r0, r2);
      c[3] += 2.0 * (re_dot(r0, r3) + re_dot(r1, r2));
      c[4] += std::norm(r2) + 2.0 * re_dot(r1, r3);
      c[5] += 2.0 * re_dot(r2, r3);
      c[6] += std::norm(r3);
    }
  }
  return c;
}

double eval_poly(const std::array<double, 7>& c, double a) {
  double v = c[6];
  for (int p = 5; p >= 0; --p) v = v * a + c[p];
  return v;
}

// Step length along d minimizing Z; 0 when no decrease is found.
double minimize_along(const std::array<double, 7>& c, int max_halvings) {
  double best_a = 0.0;
  double best_z = c[0];
  if (c[6] > 0.0) {
    // Real positive roots of Z'(a) via the companion matrix of the monic quintic.
    Eigen::Matrix<double, 5, 5> companion = Eigen::Matrix<double, 5, 5>::Zero();
    const double lead = 6.0 * c[6];
    for (int i = 1; i < 5; ++i) companion(i, i - 1) = 1.0;
    for (int i = 0; i < 5; ++i) companion(i, 4) = -(i + 1) * c[i + 1] / lead;
    Eigen::EigenSolver<Eigen::Matrix<double, 5, 5>> solver(companion, false);
    if (solver.info() == Eigen::Success) {
      for (const auto& root : solver.eigenvalues()) {
        if (root.real() <= 0.0 || std::abs(root.imag()) > 1e-8 * std::max(1.0, std::abs(root.real())))
          continue;
        const double z = eval_poly(c, root.real());
        if (z < best_z) {
          best_z = z;
          best_a = root.real();
        }
      }
    }
  }
  if (best_a > 0.0) return best_a;
  double a = c[2] > 0.0 && c[1] < 0.0 ? -c[1] / (2.0 * c[2]) : 1.0;
  for (int h = 0; h < max_halvings; ++h, a *= 0.5)
    if (eval_poly(c, a) < c[0]) return a;
  return 0.0;
}

double l2_norm(std::span<const cplx> v) {
  double s = 0.0;
  for (const auto& x : v) s += std::norm(x);
  return std::sqrt(s);
}

}  // namespace

ErrorMetrics g_error(const FrogTrace& measured, const FrogTrace& retrieved) {
  if (measured.n != retrieved.n || measured.values.size() != retrieved.values.size())
    throw Error(Errc::DimensionMismatch, "trace sizes differ");
  return metrics_of(measured.values, retrieved.values);
}

SignalField project_data(const ComplexField& field, const FrogTrace& measured) {
  require_same_size(field, measured);
  const std::size_t n = field.size();
  SignalField out{n, std::vector<cplx>(n * n)};
  pg_signal_spectra(field.samples(), field.intensity(), out.values);
  std::vector<double> amplitude(n * n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) amplitude[j * n + i] = std::sqrt(std::max(0.0, measured.at(i, j)));
  replace_magnitudes(out.values, amplitude, n);
  return out;
}

double form_distance(const SignalField& signal, const ComplexField& field) {
  if (signal.n != field.size()) throw Error(Errc::DimensionMismatch, "signal and field sizes differ");
  return loss_and_gradient(signal.values, field.samples()).z;
}

std::vector<cplx> form_gradient(const SignalField& signal, const ComplexField& field) {
  if (signal.n != field.size()) throw Error(Errc::DimensionMismatch, "signal and field sizes differ");
  return loss_and_gradient(signal.values, field.samples()).grad;
}

ComplexField project_form(const SignalField& signal, const ComplexField& current, const GpOptions& options) {
  if (signal.n != current.size()) throw Error(Errc::DimensionMismatch, "signal and field sizes differ");
  std::vector<cplx> e(current.samples().begin(), current.samples().end());
  for (int step = 0; step < options.descent_steps; ++step) {
    auto loss = loss_and_gradient(signal.values, e);
    const double gnorm = l2_norm(loss.grad);
    if (!(gnorm > 0.0)) break;
    // Unit-free direction with the field's norm keeps the step length O(1).
    const double enorm = l2_norm(e);
    const double scale = -(enorm > 0.0 ? enorm : 1.0) / gnorm;
    for (auto& v : loss.grad) v *= scale;
    const auto coeffs = line_polynomial(signal.values, e, loss.grad);
    const double a = minimize_along(coeffs, options.max_halvings);
    if (a <= 0.0) break;
    for (std::size_t m = 0; m < e.size(); ++m) e[m] += a * loss.grad[m];
  }
  return ComplexField(current.grid(), std::move(e));
}

GpOutcome gp_iterate(GpState state, const FrogTrace& measured, std::size_t iterations,
                     const ConvergenceCriteria& criteria, const GpOptions& options) {
  require_same_size(state.field, measured);
  if (iterations == 0) throw Error(Errc::InvalidArgument, "gp_iterate needs at least one iteration");
  const std::size_t n = measured.n;
  const TimeGrid grid = state.field.grid();

  // Delay-major copies of the measurement, matching the spectra layout.
  std::vector<double> meas(n * n), amplitude(n * n), model(n * n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) {
      meas[j * n + i] = measured.at(i, j);
      amplitude[j * n + i] = std::sqrt(std::max(0.0, measured.at(i, j)));
    }

  std::vector<cplx> e(state.field.samples().begin(), state.field.samples().end());
  std::vector<cplx> spectra(n * n);
  std::vector<double> gate(n);

  // Synthesizes spectra for e, evaluates the metrics and rescales e so its
  // trace matches the measurement's scale (the trace goes as |E|^6).
  auto evaluate = [&]() {
    for (std::size_t m = 0; m < n; ++m) gate[m] = std::norm(e[m]);
    pg_signal_spectra(e, gate, spectra);
    for (std::size_t k = 0; k < n * n; ++k) model[k] = std::norm(spectra[k]);
    const auto metrics = metrics_of(meas, model);
    if (metrics.mu > 0.0 && std::isfinite(metrics.mu)) {
      const double field_scale = std::pow(metrics.mu, 1.0 / 6.0);
      const double spectra_scale = std::sqrt(metrics.mu);
      for (auto& v : e) v *= field_scale;
      for (auto& v : spectra) v *= spectra_scale;
    }
    return metrics;
  };

  evaluate();
  GpOutcome out{std::move(state), {}, false};
  ComplexField best_field = out.state.field;
  ErrorMetrics best{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(), 0.0};
  SignalField signal{n, {}};

  for (std::size_t it = 0; it < iterations; ++it) {
    replace_magnitudes(spectra, amplitude, n);
    signal.values.swap(spectra);
    auto next = project_form(signal, ComplexField(grid, std::move(e)), options);
    signal.values.swap(spectra);
    e.assign(next.samples().begin(), next.samples().end());

    const auto metrics = evaluate();
    ++out.state.iteration;
    out.state.g_history.push_back(metrics.g);
    if (metrics.g < best.g) {
      best = metrics;
      best_field = ComplexField(grid, e);
    }
    if (criteria.met(metrics)) break;
  }
  out.state.field = std::move(best_field);
  out.metrics = best;
  out.converged = criteria.met(best);
  return out;
}

}  // namespace pgfrog

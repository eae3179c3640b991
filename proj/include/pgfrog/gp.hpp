#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "pgfrog/pulse.hpp"
#include "pgfrog/trace.hpp"

namespace pgfrog {

struct ErrorMetrics {
  double g = 0.0;
  double g_prime = 0.0;
  double mu = 0.0;  // scale applied to the retrieved trace
};

struct ConvergenceCriteria {
  double g_cutoff = 0.009;
  double g_prime_cutoff = 0.2;

  bool met(const ErrorMetrics& m) const { return m.g <= g_cutoff || m.g_prime <= g_prime_cutoff; }
};

// Signal field E_sig(t, tau) in the time domain, delay-major:
// values[j * n + k] is delay bin j, time sample k.
struct SignalField {
  std::size_t n = 0;
  std::vector<cplx> values;
};

struct GpOptions {
  int descent_steps = 2;  // form-projection steps per GP iteration
  int max_halvings = 20;  // backtracking guard on the line search
};

struct GpState {
  ComplexField field;
  std::size_t iteration = 0;
  std::vector<double> g_history;
};

struct GpOutcome {
  GpState state;  // field is the best-g iterate seen
  ErrorMetrics metrics;
  bool converged = false;
};

// g = min_mu sqrt(mean (I_m - mu I_r)^2) with mu = sum I_m I_r / sum I_r^2;
// g' = sqrt(sum (I_m - mu I_r)^2 / sum I_m^2). Throws DimensionMismatch.
ErrorMetrics g_error(const FrogTrace& measured, const FrogTrace& retrieved);

// Data-constraint projection: replaces the magnitude of every (w, tau)
// component of E(t)|E(t - tau)|^2 with sqrt(measured), keeping the phase
// (zero where the measurement is zero), and transforms back to time.
SignalField project_data(const ComplexField& field, const FrogTrace& measured);

// Z = sum_{tau,t} |signal - E(t)|E(t - tau)|^2|^2.
double form_distance(const SignalField& signal, const ComplexField& field);

// dZ/dRe E + i dZ/dIm E, analytic.
std::vector<cplx> form_gradient(const SignalField& signal, const ComplexField& field);

// Mathematical-form projection: steepest descent on Z from `current`, each
// step taken at the global minimizer of the degree-6 polynomial Z along the
// descent direction, with a halving fallback when that fails to improve.
ComplexField project_form(const SignalField& signal, const ComplexField& current, const GpOptions& options = {});

// Alternates both projections up to `iterations` times, evaluating g after
// each and stopping once the criteria are met. The outcome carries the best
// iterate. Throws DimensionMismatch.
GpOutcome gp_iterate(GpState state, const FrogTrace& measured, std::size_t iterations,
                     const ConvergenceCriteria& criteria, const GpOptions& options = {});

}  // namespace pgfrog

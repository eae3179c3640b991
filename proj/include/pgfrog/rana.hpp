#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "pgfrog/gp.hpp"
#include "pgfrog/marginals.hpp"
#include "pgfrog/schedule.hpp"

namespace pgfrog {

struct Candidate {
  ComplexField field;
  ErrorMetrics metrics;
  GridLevel level = GridLevel::Quarter;
  std::size_t index = 0;  // position in the level's evaluation order
};

// Candidates kept sorted by (g, index).
class CandidatePool {
 public:
  explicit CandidatePool(std::size_t capacity) : capacity_(capacity) {}

  void add(Candidate c);
  // Drops the worst candidates so that at most `keep` remain.
  void prune(std::size_t keep);

  const std::vector<Candidate>& candidates() const { return candidates_; }
  std::size_t capacity() const { return capacity_; }
  double best_g() const;

 private:
  std::size_t capacity_;
  std::vector<Candidate> candidates_;
};

struct RetrievalResult {
  ComplexField field;
  ErrorMetrics metrics;
  bool converged = false;
  std::size_t iterations_total = 0;
  double wall_time_s = 0.0;
  std::vector<double> level_g_history;           // best g after each level that ran
  std::vector<std::size_t> level_iterations;     // GP iterations spent per level
  std::vector<double> g_history;                 // per-iteration g of the returned candidate's final run
};

// Non-overlapping factor x factor block means, spacings multiplied by the
// factor, peak renormalized. Throws IndivisibleGrid.
FrogTrace bin_trace(const FrogTrace& trace, std::size_t factor);

// Geometry of a coarse level derived from the full grid, keeping
// dt dw = 2 pi / n on every level:
//   quarter: n/4 points, 2 dt, 2 dw (half the delay and frequency ranges)
//   half:    n/2 points, 2 dt, dw   (full delay range, half the frequency range)
TimeGrid level_grid(const TimeGrid& full, GridLevel level);

// Trace on the level grid: centered [1/4, 1/2, 1/4] binning by two along the
// coarsened axes, then cropping to the central bins. Peak renormalized.
FrogTrace level_trace(const FrogTrace& full, GridLevel level);

// Linear interpolation of a spectrum onto another grid's frequency axis;
// zero outside the source range.
Spectrum resample_spectrum(const Spectrum& spectrum, const TimeGrid& target);

enum class PhaseMode { Random, Flat };

// inverse FT of sqrt(S) exp(i phi_k); phi_k is a sum of the first four
// cos/sin harmonic pairs over the frequency window with coefficients drawn
// uniformly from [-pi, pi], seeded by (seed, k).
std::vector<ComplexField> make_initial_guesses(const Spectrum& spectrum, std::size_t count,
                                               const TimeGrid& grid, std::uint64_t seed,
                                               PhaseMode mode = PhaseMode::Random);

// Multiplies the intensity by exp(-(w / w0)^6 ln 1e4), w0 being the
// innermost frequency of the outer 10% of bins, so those bins fall to <= 1e-4.
Spectrum apply_spectral_window(const Spectrum& spectrum);
std::vector<double> spectral_window(const TimeGrid& grid);

// Moves a field to another grid through the spectral domain: the sampled
// field's discrete-time transform is evaluated at the target frequencies
// (band-limited interpolation), with zeros beyond the source band.
ComplexField resample_field(const ComplexField& field, const TimeGrid& to_grid);

// resample_field restricted to a strictly larger target (more samples, no
// coarser time step). Throws IncompatibleGrids otherwise.
ComplexField transition_field(const ComplexField& field, const TimeGrid& to_grid);

struct ReapplyDecision {
  ComplexField field;
  bool reapplied = false;
  double rms_kept = 0.0;
  double rms_candidate = 0.0;
};

// Candidate = field with its spectral magnitude replaced by sqrt(S); keeps
// whichever of {field, candidate} has the third-order autocorrelation closer
// (after a least-squares scale) to the measured delay marginal.
ReapplyDecision reapply_spectrum_decision(const ComplexField& field, const Spectrum& spectrum,
                                          const Marginal& measured_delay_marginal);
ComplexField maybe_reapply_spectrum(const ComplexField& field, const Spectrum& spectrum,
                                    const Marginal& measured_delay_marginal);

struct RanaOptions {
  std::size_t threads = 1;
  GpOptions gp;
};

RetrievalResult rana_retrieve(const FrogTrace& trace, const GridSchedule& schedule, double p,
                              std::uint64_t seed, const RanaOptions& options = {});

struct BaselineOptions {
  bool with_retrieved_spectrum = false;
  double p = kDefaultP;
  ConvergenceCriteria criteria;
  GpOptions gp;
};

inline constexpr std::size_t kDefaultBaselineIterations = 300;

// Single random guess (random spectral amplitude and phase under a broad
// Gaussian envelope) run on the full grid only. With
// with_retrieved_spectrum the amplitude comes from the marginal estimate.
RetrievalResult gp_baseline_retrieve(const FrogTrace& trace, std::size_t max_iterations,
                                     std::uint64_t seed, const BaselineOptions& options = {});

// The random starting field used by gp_baseline_retrieve.
ComplexField baseline_initial_guess(const FrogTrace& trace, std::uint64_t seed,
                                    const BaselineOptions& options = {});

}  // namespace pgfrog

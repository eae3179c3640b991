#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include "pgfrog/gp.hpp"

namespace pgfrog {

enum class GridLevel { Quarter, Half, Full };

const char* to_string(GridLevel level);

struct LevelSchedule {
  std::size_t num_initial_guesses = 0;
  std::size_t iterations = 0;
};

// One row of the multi-grid parameter table.
struct GridSchedule {
  double tbp_label = 0.0;
  std::size_t n_full = 0;
  LevelSchedule quarter;
  LevelSchedule half;
  LevelSchedule full{4, 10};  // the table has no full-grid budget; up to 10 with early stop
  ConvergenceCriteria criteria;

  const LevelSchedule& level(GridLevel l) const;
  // Throws InvalidArgument on non-positive counts, a non power-of-two n_full
  // or a full-level guess count other than 4.
  void validate() const;
};

// Rows for TBP 2.5, 5, 10, 20, 40, 80, 100.
const std::vector<GridSchedule>& default_schedules();

// Row whose n_full equals n; throws InvalidArgument when absent.
GridSchedule schedule_for_size(const std::vector<GridSchedule>& table, std::size_t n);
GridSchedule default_schedule_for_size(std::size_t n);

// JSON: a single object or an array of objects with keys
// {tbp, n, igs_quarter, iters_quarter, igs_half, iters_half, igs_full,
//  g_cutoff, g_prime_cutoff} and optional iters_full.
std::vector<GridSchedule> load_schedules(const std::filesystem::path& path);
void save_schedules(const std::filesystem::path& path, const std::vector<GridSchedule>& table);

}  // namespace pgfrog

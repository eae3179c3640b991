#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "pgfrog/marginals.hpp"
#include "pgfrog/trace.hpp"

namespace pgfrog {

// Text format: header `FROG-PG 1 <n> <n> <dtau_fs> <domega_rad_per_fs>`,
// then n rows (fixed frequency bin) of n delay values.
std::string trace_to_text(const FrogTrace& trace);
// Normalizes to unit peak on load. Throws ParseError.
FrogTrace trace_from_text(const std::string& text);

void save_trace(const std::filesystem::path& path, const FrogTrace& trace);
FrogTrace load_trace(const std::filesystem::path& path);

struct TraceMetadata {
  std::optional<NoiseSpec> noise;
  std::optional<std::uint64_t> seed;
  std::string provenance;  // e.g. "clean", "noisy", "preprocessed", "retrieved"
};

std::string metadata_to_json(const TraceMetadata& meta);
TraceMetadata metadata_from_json(const std::string& text);

// `<trace path>.json`
std::filesystem::path sidecar_path(const std::filesystem::path& trace_path);
void save_trace_with_metadata(const std::filesystem::path& path, const FrogTrace& trace, const TraceMetadata& meta);

// Two-column CSV (omega_rad_per_fs,intensity) plus `<csv>.json` with
// {p, delta, trace_file}.
void save_spectrum(const std::filesystem::path& csv_path, const Spectrum& spectrum,
                   const SpectrumRetrievalOptions& options, const std::string& trace_file);
// Reads the CSV back; the grid is reconstructed from the frequency column.
Spectrum load_spectrum_csv(const std::filesystem::path& csv_path);

}  // namespace pgfrog

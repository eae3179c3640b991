#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "pgfrog/pulse.hpp"

namespace pgfrog {

struct PulseRecord {
  ComplexField field;
  std::optional<std::uint64_t> seed;
  std::optional<double> target_tbp;
};

// Shortest decimal text that reads back to the same double.
std::string format_double(double v);
double parse_double(const std::string& s);

// Whole-file helpers; throw IoError.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

// {n, dt_fs, samples_re[], samples_im[], seed?, target_tbp?}; samples are
// decimal strings. Throws ParseError / IoError.
std::string pulse_to_json(const PulseRecord& record);
PulseRecord pulse_from_json(const std::string& text);

void save_pulse(const std::filesystem::path& path, const PulseRecord& record);
PulseRecord load_pulse(const std::filesystem::path& path);

}  // namespace pgfrog

#pragma once

#include <stdexcept>
#include <string>

namespace pgfrog {

enum class Errc {
  InvalidArgument,
  ZeroEnergy,
  GridTooSmall,
  AllZero,
  DegenerateMarginal,
  NonFiniteQuotient,
  DimensionMismatch,
  IndivisibleGrid,
  IncompatibleGrids,
  ParseError,
  IoError,
};

const char* to_string(Errc code) noexcept;

// Single exception type for the library; callers dispatch on code().
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

inline const char* to_string(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::ZeroEnergy: return "ZeroEnergy";
    case Errc::GridTooSmall: return "GridTooSmall";
    case Errc::AllZero: return "AllZero";
    case Errc::DegenerateMarginal: return "DegenerateMarginal";
    case Errc::NonFiniteQuotient: return "NonFiniteQuotient";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::IndivisibleGrid: return "IndivisibleGrid";
    case Errc::IncompatibleGrids: return "IncompatibleGrids";
    case Errc::ParseError: return "ParseError";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace pgfrog

#pragma once

#include <cstdint>

namespace pgfrog {

// Independent random streams derived from one root seed. A stream is
// identified by (purpose, index), so per-item work does not depend on the
// order in which items are processed.
enum class Stream : std::uint64_t {
  Pulse = 1,
  Noise = 2,
  Guess = 3,
  Baseline = 4,
  Calibration = 5,
  Bench = 6,
};

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t root, Stream stream, std::uint64_t index = 0) {
  return splitmix64(splitmix64(root ^ splitmix64(static_cast<std::uint64_t>(stream))) + index);
}

}  // namespace pgfrog

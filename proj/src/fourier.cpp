#include "pgfrog/fourier.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

#include "pgfrog/error.hpp"

namespace pgfrog {

namespace {

struct PlanCache {
  std::mutex mutex;
  std::map<std::tuple<std::size_t, std::size_t, int>, fftw_plan> plans;

  ~PlanCache() {
    for (auto& [key, plan] : plans) fftw_destroy_plan(plan);
  }

  fftw_plan get(std::size_t n, std::size_t rows, int sign) {
    std::lock_guard lock(mutex);
    auto key = std::make_tuple(n, rows, sign);
    if (auto it = plans.find(key); it != plans.end()) return it->second;
    // FFTW_ESTIMATE keeps the chosen algorithm independent of timing, so
    // results are reproducible run to run.
    auto* scratch = fftw_alloc_complex(n * rows);
    int len = static_cast<int>(n);
    fftw_plan plan = fftw_plan_many_dft(1, &len, static_cast<int>(rows), scratch, nullptr, 1, len,
                                        scratch, nullptr, 1, len, sign,
                                        FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(scratch);
    if (plan == nullptr) throw Error(Errc::InvalidArgument, "FFTW failed to create a plan");
    plans.emplace(key, plan);
    return plan;
  }
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

}  // namespace

void fft_rows(std::span<cplx> data, std::size_t n, FftDirection dir) {
  if (n == 0 || data.size() % n != 0)
    throw Error(Errc::DimensionMismatch, "FFT buffer is not a whole number of rows");
  if (data.empty()) return;
  const int sign = dir == FftDirection::Forward ? FFTW_FORWARD : FFTW_BACKWARD;
  fftw_plan plan = plan_cache().get(n, data.size() / n, sign);
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, ptr, ptr);
}

void centered_dft_rows(std::span<cplx> data, std::size_t n, FftDirection dir) {
  if (n % 2 != 0) throw Error(Errc::InvalidArgument, "centered DFT needs an even length");
  const std::size_t rows = n == 0 ? 0 : data.size() / n;
  // exp(-i 2pi (k-n/2)(j-n/2)/n) = (-1)^(j+k+n/2) exp(-i 2pi kj/n)
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t j = 1; j < n; j += 2) data[r * n + j] = -data[r * n + j];
  fft_rows(data, n, dir);
  const double scale = ((n / 2) % 2 == 0 ? 1.0 : -1.0) / std::sqrt(static_cast<double>(n));
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t k = 0; k < n; ++k)
      data[r * n + k] *= (k % 2 == 0) ? scale : -scale;
}

}  // namespace pgfrog

#pragma once

#include <complex>
#include <cstddef>
#include <span>

namespace pgfrog {

using cplx = std::complex<double>;

enum class FftDirection { Forward, Inverse };

// Unnormalized FFT of data.size()/n contiguous rows of length n, in place.
// Forward uses the exp(-i k j 2pi/n) kernel. Plans are cached per shape and
// execution is safe from multiple threads.
void fft_rows(std::span<cplx> data, std::size_t n, FftDirection dir);

// Centered, unitary DFT applied to each contiguous row of length n:
//   X_k = n^-1/2 sum_j x_j exp(-i w_k t_j),  t_j = (j - n/2) dt, w_k = (k - n/2) dw.
// Inverse uses the conjugate kernel. n must be even.
void centered_dft_rows(std::span<cplx> data, std::size_t n, FftDirection dir);

}  // namespace pgfrog

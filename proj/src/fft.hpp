#pragma once

// Thin FFTW wrapper. Plans are cached per (size, direction) and executed
// through the new-array interface, which FFTW documents as thread-safe.

#include <complex>
#include <span>

namespace wpl::detail {

/// In-place unnormalized forward transform: X_k = sum_j x_j exp(-2 pi i jk/n).
void fft_forward(std::span<std::complex<double>> data);
/// In-place unnormalized backward transform: x_j = sum_k X_k exp(+2 pi i jk/n).
void fft_backward(std::span<std::complex<double>> data);

}  // namespace wpl::detail

#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace srate {

std::size_t next_pow2(std::size_t n) noexcept;

/// In-place iterative radix-2 FFT. data.size() must be a power of two.
void fft_inplace(std::span<std::complex<double>> data);

/// |X(k)| for k = 0..n_fft/2 of the zero-padded real input.
std::vector<double> magnitude_spectrum(std::span<const double> frame, std::size_t n_fft);

}  // namespace srate

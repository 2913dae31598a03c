#include "srate/fft.hpp"

#include "srate/error.hpp"

#include <numbers>
#include <utility>

namespace srate {

std::size_t next_pow2(std::size_t n) noexcept {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

void fft_inplace(std::span<std::complex<double>> data) {
    const std::size_t n = data.size();
    if (n == 0 || (n & (n - 1)) != 0) throw Error(ErrorCode::InvalidSize, "FFT size must be a power of two");

    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(data[i], data[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double angle = -2.0 * std::numbers::pi / static_cast<double>(len);
        const std::complex<double> step(std::cos(angle), std::sin(angle));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const auto u = data[i + k];
                const auto v = data[i + k + len / 2] * w;
                data[i + k] = u + v;
                data[i + k + len / 2] = u - v;
                w *= step;
            }
        }
    }
}

std::vector<double> magnitude_spectrum(std::span<const double> frame, std::size_t n_fft) {
    if (frame.size() > n_fft) throw Error(ErrorCode::InvalidSize, "frame longer than FFT size");
    std::vector<std::complex<double>> buf(n_fft);
    for (std::size_t i = 0; i < frame.size(); ++i) buf[i] = frame[i];
    fft_inplace(buf);
    std::vector<double> mag(n_fft / 2 + 1);
    for (std::size_t k = 0; k < mag.size(); ++k) mag[k] = std::abs(buf[k]);
    return mag;
}

}  // namespace srate

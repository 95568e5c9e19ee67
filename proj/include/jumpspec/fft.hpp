/**
 * @file fft.hpp
 * @brief Radix-2 discrete Fourier transform with a fixed global convention.
 *
 * Forward:  X_m = sum_n x_n exp(-i 2 pi n m / N)      (unnormalized)
 * Inverse:  x_n = (1/N) sum_m X_m exp(+i 2 pi n m / N)
 *
 * With this convention a lattice shift x_n -> x_{n+a} multiplies X_m by
 * exp(+i 2 pi m a / N), which is what makes the jump-generator symbols in
 * spectral.hpp carry exp(+i omega_m alpha).
 */
#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include "jumpspec/error.hpp"

namespace jumpspec {

using cplx = std::complex<double>;

/// Complex values indexed by Fourier mode m = 0..N-1.
struct SpectralArray {
    std::vector<cplx> values;

    std::size_t n_modes() const noexcept { return values.size(); }
    cplx& operator[](std::size_t m) { return values[m]; }
    const cplx& operator[](std::size_t m) const { return values[m]; }
};

constexpr bool is_power_of_two(std::size_t n) noexcept { return n != 0 && (n & (n - 1)) == 0; }

namespace detail {

/// Per-thread transform counts; lets callers assert how many transforms a pipeline ran.
struct TransformCounter {
    std::size_t forward = 0;
    std::size_t inverse = 0;
};

inline TransformCounter& transform_counter() {
    thread_local TransformCounter counter;
    return counter;
}

inline void fft_inplace(std::vector<cplx>& a, bool inverse) {
    const std::size_t n = a.size();
    if (!is_power_of_two(n)) throw Error(Errc::not_power_of_two, "DFT length must be a power of two");
    if (n == 1) return;

    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }

    // Twiddles evaluated directly (no recurrence) so round-off stays at one ulp.
    const double sign = inverse ? 1.0 : -1.0;
    std::vector<cplx> twiddle(n / 2);
    for (std::size_t k = 0; k < n / 2; ++k) {
        const double angle = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
        twiddle[k] = cplx(std::cos(angle), sign * std::sin(angle));
    }

    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t half = len / 2;
        const std::size_t stride = n / len;
        for (std::size_t i = 0; i < n; i += len) {
            for (std::size_t j = 0; j < half; ++j) {
                const cplx u = a[i + j];
                const cplx v = a[i + j + half] * twiddle[j * stride];
                a[i + j] = u + v;
                a[i + j + half] = u - v;
            }
        }
    }
}

}  // namespace detail

inline SpectralArray dft(std::span<const cplx> x) {
    std::vector<cplx> a(x.begin(), x.end());
    detail::fft_inplace(a, false);
    ++detail::transform_counter().forward;
    return SpectralArray{std::move(a)};
}

inline SpectralArray dft(std::span<const double> x) {
    std::vector<cplx> a(x.begin(), x.end());
    detail::fft_inplace(a, false);
    ++detail::transform_counter().forward;
    return SpectralArray{std::move(a)};
}

inline std::vector<cplx> idft(std::span<const cplx> spectrum) {
    std::vector<cplx> a(spectrum.begin(), spectrum.end());
    detail::fft_inplace(a, true);
    const double scale = 1.0 / static_cast<double>(a.size());
    for (auto& v : a) v *= scale;
    ++detail::transform_counter().inverse;
    return a;
}

inline std::vector<cplx> idft(const SpectralArray& spectrum) { return idft(std::span<const cplx>(spectrum.values)); }

/// Real part of the inverse transform; for spectra of real signals.
inline std::vector<double> idft_real(const SpectralArray& spectrum) {
    const auto z = idft(spectrum);
    std::vector<double> out(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) out[i] = z[i].real();
    return out;
}

}  // namespace jumpspec

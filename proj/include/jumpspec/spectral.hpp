/**
 * @file spectral.hpp
 * @brief Fourier symbols of the jump generator and their semigroups.
 *
 * On a ring of N nodes the generator (L f)(x) = sum gamma_alpha (f(x + alpha dx) - f(x))
 * is a circulant, diagonalized by the DFT of fft.hpp with mode frequencies
 * omega_m = 2 pi m / N:
 *
 *   Psi(m)        = sum gamma_alpha (e^{i omega_m alpha} - 1)
 *   psi^{eta}(m)  = sum gamma_alpha (e^{eta alpha dx} e^{i omega_m alpha} - 1)
 *
 * the second being the symbol after exponential damping v = e^{-eta x} u.
 * Mode m corresponds to the continuous frequency xi = omega_m / dx.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "jumpspec/error.hpp"
#include "jumpspec/fft.hpp"
#include "jumpspec/kernel.hpp"

namespace jumpspec {

namespace detail {

/// e^{i theta} - 1 without cancellation: (-2 sin^2(theta/2), sin theta).
inline cplx expi_minus_one(double theta) {
    const double s = std::sin(0.5 * theta);
    return {-2.0 * s * s, std::sin(theta)};
}

/// Table of e^{i 2 pi j / N} - 1 for j = 0..N-1.
inline std::vector<cplx> ring_phase_table(std::size_t n) {
    std::vector<cplx> table(n);
    for (std::size_t j = 0; j < n; ++j)
        table[j] = expi_minus_one(2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n));
    return table;
}

inline std::size_t ring_index(long long value, std::size_t n) {
    const auto nn = static_cast<long long>(n);
    return static_cast<std::size_t>(((value % nn) + nn) % nn);
}

}  // namespace detail

/// Damped symbol psi^{eta}(m) plus the kernel and damping it was built from.
struct DampedSymbol {
    SpectralArray psi_eta;
    double eta = 0.0;
    JumpKernel base;
};

/// max_m |dft(shift(x, a))_m - e^{i 2 pi m a / N} dft(x)_m| with shift(x, a)_n = x_{(n + a) mod N}.
inline double shift_phase_check(std::span<const cplx> x, long long alpha) {
    const std::size_t n = x.size();
    std::vector<cplx> shifted(n);
    for (std::size_t i = 0; i < n; ++i) shifted[i] = x[detail::ring_index(static_cast<long long>(i) + alpha, n)];
    const auto lhs = dft(shifted);
    const auto rhs = dft(x);
    double worst = 0.0;
    for (std::size_t m = 0; m < n; ++m) {
        const auto j = detail::ring_index(static_cast<long long>(m) * alpha, n);
        const double angle = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n);
        worst = std::max(worst, std::abs(lhs[m] - std::polar(1.0, angle) * rhs[m]));
    }
    return worst;
}

/// Psi at the N discrete modes; Psi(0) = 0 exactly and Re Psi <= 0.
inline SpectralArray build_symbol(const JumpKernel& k, std::size_t n) {
    detail::require(is_power_of_two(n), Errc::not_power_of_two, "symbol length must be a power of two");
    const auto table = detail::ring_phase_table(n);
    SpectralArray out{std::vector<cplx>(n, cplx(0.0, 0.0))};
    for (std::size_t m = 1; m < n; ++m) {
        cplx s(0.0, 0.0);
        k.for_each([&](int alpha, double g) {
            if (g != 0.0) s += g * table[detail::ring_index(static_cast<long long>(m) * alpha, n)];
        });
        out[m] = s;
    }
    return out;
}

/// psi^{eta}(m) = sum gamma ((e^{eta alpha dx} - 1) + e^{eta alpha dx} (e^{i omega_m alpha} - 1)).
inline DampedSymbol build_damped_symbol(const JumpKernel& k, double eta, std::size_t n) {
    detail::require(eta >= 0.0 && std::isfinite(eta), Errc::invalid_argument, "damping eta must be >= 0");
    detail::require(is_power_of_two(n), Errc::not_power_of_two, "symbol length must be a power of two");
    const auto table = detail::ring_phase_table(n);
    DampedSymbol out{SpectralArray{std::vector<cplx>(n)}, eta, k};
    for (std::size_t m = 0; m < n; ++m) {
        cplx s(0.0, 0.0);
        k.for_each([&](int alpha, double g) {
            if (g == 0.0) return;
            const double y = eta * static_cast<double>(alpha) * k.dx();
            const double growth = std::exp(y);
            s += g * (std::expm1(y) + growth * table[detail::ring_index(static_cast<long long>(m) * alpha, n)]);
        });
        out.psi_eta[m] = s;
    }
    return out;
}

/// max_m tau Re(psi^{eta}(m) - r); values above ~30 risk overflow in exp.
inline double semigroup_growth_exponent(const DampedSymbol& sym, double tau, double r) {
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& v : sym.psi_eta.values) worst = std::max(worst, tau * (v.real() - r));
    return worst;
}

/// V_hat(tau, m) = e^{tau (psi(m) - r)} V_hat(0, m).
inline SpectralArray apply_semigroup(const SpectralArray& symbol, double tau, double r, const SpectralArray& vhat) {
    detail::require(tau >= 0.0 && std::isfinite(tau), Errc::invalid_argument, "tau must be >= 0");
    detail::require(symbol.n_modes() == vhat.n_modes(), Errc::dimension_mismatch, "symbol and spectrum differ in size");
    SpectralArray out{std::vector<cplx>(vhat.n_modes())};
    if (tau == 0.0) {
        out.values = vhat.values;
        return out;
    }
    for (std::size_t m = 0; m < vhat.n_modes(); ++m) out[m] = std::exp(tau * (symbol[m] - r)) * vhat[m];
    return out;
}

inline SpectralArray apply_semigroup(const DampedSymbol& sym, double tau, double r, const SpectralArray& vhat) {
    return apply_semigroup(sym.psi_eta, tau, r, vhat);
}

/// Continuous-frequency symbol Psi(xi) = sum gamma (e^{i xi alpha dx} - 1).
inline cplx symbol_at(const JumpKernel& k, double xi) {
    cplx s(0.0, 0.0);
    k.for_each([&](int alpha, double g) {
        if (g != 0.0) s += g * detail::expi_minus_one(xi * static_cast<double>(alpha) * k.dx());
    });
    return s;
}

struct DerivativeResiduals {
    double d1_residual = 0.0;  // relative error of Psi'(0) vs i dx m1
    double d2_residual = 0.0;  // relative error of -Psi''(0) vs dx^2 m2
    cplx d1;                   // finite-difference Psi'(0)
    double minus_d2 = 0.0;     // finite-difference -Psi''(0)
};

/**
 * Central differences of Psi(xi) at 0 with step 1e-4, compared against the
 * moment formulas. Residuals are relative to max(|exact|, scale) where scale
 * is the second-moment size, so a symmetric kernel (m1 = 0) is measured
 * absolutely against that scale.
 */
inline DerivativeResiduals symbol_derivative_check(const JumpKernel& k, double step = 1e-4) {
    const auto mo = kernel_moments(k);
    const cplx plus = symbol_at(k, step);
    const cplx minus = symbol_at(k, -step);
    DerivativeResiduals res;
    res.d1 = (plus - minus) / (2.0 * step);
    res.minus_d2 = -(plus.real() + minus.real()) / (step * step);  // Psi(0) = 0 exactly

    const cplx exact_d1(0.0, k.dx() * mo.m1);
    const double exact_d2 = k.dx() * k.dx() * mo.m2;
    const double scale = std::max(exact_d2, std::numeric_limits<double>::min());
    res.d1_residual = std::abs(res.d1 - exact_d1) / std::max(std::abs(exact_d1), scale);
    res.d2_residual = std::abs(res.minus_d2 - exact_d2) / scale;
    return res;
}

/**
 * Log-log slope of -Re Psi against k = xi dx over k in [k_min, k_max]
 * (logarithmically spaced). For tails gamma ~ |alpha|^{-(1+mu)}, 1 < mu < 2,
 * the slope approaches mu; for light tails it approaches 2.
 */
inline double symbol_tail_slope(const JumpKernel& k, double k_min, double k_max, int points = 24) {
    detail::require(k_min > 0.0 && k_max > k_min && points >= 2, Errc::invalid_argument, "bad regression window");
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (int i = 0; i < points; ++i) {
        const double lk = std::log(k_min) + (std::log(k_max) - std::log(k_min)) * i / (points - 1);
        const double y = -symbol_at(k, std::exp(lk) / k.dx()).real();
        const double ly = std::log(y);
        sx += lk;
        sy += ly;
        sxx += lk * lk;
        sxy += lk * ly;
    }
    const double n = points;
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

/// Slope estimate for the power-law kernel |alpha|^{-(1+mu)} on support A, window k in [10/A, 0.1].
inline double tail_scaling_probe(double mu, int support = 2048, double dx = 1.0) {
    detail::require(mu > 1.0 && mu < 2.0, Errc::invalid_argument, "fractional probe needs 1 < mu < 2");
    detail::require(support >= 512, Errc::invalid_argument, "fractional probe needs support >= 512");
    const auto w = shape_power_law(mu, support);
    const JumpKernel k(support, std::vector<double>(w.values().begin(), w.values().end()), dx);
    return symbol_tail_slope(k, 10.0 / support, 0.1);
}

}  // namespace jumpspec

/**
 * @file esscher.hpp
 * @brief Esscher (exponential) tilt of a one-step log-return law.
 *
 * Given p_alpha on the lattice {alpha h : |alpha| <= M}, the tilted law
 * q_alpha = p_alpha e^{-lambda h alpha} / Z(lambda) is a one-step martingale
 * for exactly one lambda*, provided p charges both signs of alpha. The map
 * lambda -> sum q_alpha e^{h alpha} is strictly decreasing, so bisection on an
 * expanding bracket finds lambda* globally.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <vector>

#include "jumpspec/error.hpp"

namespace jumpspec {

struct TiltedKernel {
    int max_jump = 0;        // M; arrays cover alpha = -M..M
    double h = 0.0;          // lattice step of the log-return
    double lambda_star = 0.0;
    std::vector<double> p;   // original law
    std::vector<double> q;   // tilted law

    double martingale_residual() const {
        double s = 0.0;
        for (int alpha = -max_jump; alpha <= max_jump; ++alpha)
            s += q[static_cast<std::size_t>(alpha + max_jump)] * std::expm1(h * alpha);
        return std::abs(s);
    }

    double normalization_residual() const {
        double s = 0.0;
        for (double v : q) s += v;
        return std::abs(s - 1.0);
    }
};

namespace detail {

inline void validate_law(std::span<const double> p, int max_jump) {
    require(max_jump >= 1, Errc::invalid_argument, "max jump M must be >= 1");
    require(p.size() == static_cast<std::size_t>(2 * max_jump + 1), Errc::dimension_mismatch,
            "law must cover alpha = -M..M");
    double total = 0.0;
    for (double v : p) {
        require(v >= 0.0 && std::isfinite(v), Errc::invalid_argument, "probabilities must be finite and >= 0");
        total += v;
    }
    require(std::abs(total - 1.0) <= 1e-12, Errc::not_normalized, "probabilities must sum to 1");
}

/// Tilted weights, rescaled by the largest exponent so nothing overflows at |lambda| = 64.
inline std::vector<double> tilted_weights(std::span<const double> p, int max_jump, double h, double lambda) {
    double top = -std::numeric_limits<double>::infinity();
    for (int alpha = -max_jump; alpha <= max_jump; ++alpha)
        if (p[static_cast<std::size_t>(alpha + max_jump)] > 0.0) top = std::max(top, -lambda * h * alpha);
    std::vector<double> w(p.size());
    for (int alpha = -max_jump; alpha <= max_jump; ++alpha) {
        const auto i = static_cast<std::size_t>(alpha + max_jump);
        w[i] = p[i] > 0.0 ? p[i] * std::exp(-lambda * h * alpha - top) : 0.0;
    }
    return w;
}

/// Sign-carrying numerator of Psi(lambda) - 1 (the positive Z(lambda) is dropped).
inline double martingale_gap(std::span<const double> p, int max_jump, double h, double lambda) {
    const auto w = tilted_weights(p, max_jump, h, lambda);
    double s = 0.0;
    for (int alpha = -max_jump; alpha <= max_jump; ++alpha)
        s += w[static_cast<std::size_t>(alpha + max_jump)] * std::expm1(h * alpha);
    return s;
}

}  // namespace detail

/// One-step exponential moment Psi_{p^(lambda)}(1) = sum p^(lambda)_alpha e^{h alpha}.
inline double tilted_exponential_moment(std::span<const double> p, int max_jump, double h, double lambda) {
    const auto w = detail::tilted_weights(p, max_jump, h, lambda);
    double num = 0.0;
    double den = 0.0;
    for (int alpha = -max_jump; alpha <= max_jump; ++alpha) {
        const double wa = w[static_cast<std::size_t>(alpha + max_jump)];
        num += wa * std::exp(h * alpha);
        den += wa;
    }
    return num / den;
}

inline TiltedKernel esscher_tilt(std::span<const double> p, int max_jump, double h) {
    detail::validate_law(p, max_jump);
    detail::require(h > 0.0 && std::isfinite(h), Errc::invalid_argument, "lattice step h must be > 0");
    bool has_down = false;
    bool has_up = false;
    for (int alpha = 1; alpha <= max_jump; ++alpha) {
        has_down = has_down || p[static_cast<std::size_t>(max_jump - alpha)] > 0.0;
        has_up = has_up || p[static_cast<std::size_t>(max_jump + alpha)] > 0.0;
    }
    if (!has_down || !has_up)
        throw Error(Errc::degenerate_support, "law must charge both alpha < 0 and alpha > 0 for a martingale tilt");

    auto gap = [&](double lambda) { return detail::martingale_gap(p, max_jump, h, lambda); };

    // gap is strictly decreasing: positive left of the root, negative right of it.
    constexpr double cap = 64.0;
    double lo = -1.0;
    double hi = 1.0;
    while (gap(lo) < 0.0 && lo > -cap) lo *= 2.0;
    while (gap(hi) > 0.0 && hi < cap) hi *= 2.0;
    if (gap(lo) < 0.0 || gap(hi) > 0.0)
        throw Error(Errc::degenerate_support, "martingale tilt lies beyond |lambda| <= 64");

    double lambda = 0.0;
    if (gap(0.0) == 0.0) {
        lambda = 0.0;
    } else {
        for (int step = 0; step < 60; ++step) {
            const double mid = 0.5 * (lo + hi);
            const double g = gap(mid);
            if (g == 0.0) {
                lo = hi = mid;
                break;
            }
            (g > 0.0 ? lo : hi) = mid;
        }
        lambda = 0.5 * (lo + hi);
    }

    TiltedKernel t;
    t.max_jump = max_jump;
    t.h = h;
    t.lambda_star = lambda;
    t.p.assign(p.begin(), p.end());
    t.q = detail::tilted_weights(p, max_jump, h, lambda);
    double z = 0.0;
    for (double v : t.q) z += v;
    for (double& v : t.q) v /= z;
    return t;
}

/// KL(q || p) = sum q log(q / p), with 0 log 0 = 0.
inline double relative_entropy(std::span<const double> q, std::span<const double> p) {
    double s = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        if (q[i] == 0.0) continue;
        if (p[i] == 0.0) return std::numeric_limits<double>::infinity();
        s += q[i] * std::log(q[i] / p[i]);
    }
    return s;
}

/**
 * Samples feasible competitors q' (sum q' = 1, sum q' e^{h alpha} = 1,
 * supported where p is) around the tilted law and checks that none has lower
 * relative entropy to p. Directions are random vectors projected onto the null
 * space of the two constraints; step lengths keep q' >= 0.
 */
inline bool tilt_entropy_check(const TiltedKernel& t, int perturbations, unsigned long long seed = 20240611ULL) {
    const std::size_t n = t.q.size();
    const double base = relative_entropy(t.q, t.p);

    std::vector<std::size_t> active;
    for (std::size_t i = 0; i < n; ++i)
        if (t.p[i] > 0.0) active.push_back(i);

    std::vector<double> e(n);
    for (std::size_t i = 0; i < n; ++i) e[i] = std::exp(t.h * (static_cast<double>(i) - t.max_jump));

    // Gram matrix of the constraint rows (ones, e) on the active set.
    double g11 = 0.0, g12 = 0.0, g22 = 0.0;
    for (std::size_t i : active) {
        g11 += 1.0;
        g12 += e[i];
        g22 += e[i] * e[i];
    }
    const double det = g11 * g22 - g12 * g12;

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    for (int trial = 0; trial < perturbations; ++trial) {
        std::vector<double> v(n, 0.0);
        for (std::size_t i : active) v[i] = normal(rng);
        if (active.size() > 2 && det > 0.0) {
            double c1 = 0.0, c2 = 0.0;
            for (std::size_t i : active) {
                c1 += v[i];
                c2 += e[i] * v[i];
            }
            const double y1 = (g22 * c1 - g12 * c2) / det;
            const double y2 = (g11 * c2 - g12 * c1) / det;
            for (std::size_t i : active) v[i] -= y1 + y2 * e[i];
        } else {
            // Two active states: the feasible set is the single point q.
            std::fill(v.begin(), v.end(), 0.0);
        }

        double step_max = std::numeric_limits<double>::infinity();
        for (std::size_t i : active)
            if (v[i] < 0.0) step_max = std::min(step_max, -t.q[i] / v[i]);
        if (!std::isfinite(step_max)) step_max = 0.0;

        const double step = step_max * unit(rng);
        std::vector<double> candidate(t.q);
        for (std::size_t i : active) candidate[i] = std::max(0.0, t.q[i] + step * v[i]);
        if (relative_entropy(candidate, t.p) < base - 1e-12) return false;
    }
    return true;
}

/// Eigenvalues of the circulant P_{ij} = q_{(j - i) mod N}: lambda_k = sum_m q_m e^{i 2 pi k m / N}.
inline std::vector<std::complex<double>> tilted_circulant_eigenvalues(const TiltedKernel& t, std::size_t n) {
    detail::require(n > static_cast<std::size_t>(2 * t.max_jump), Errc::invalid_argument,
                    "ring must be larger than the jump support");
    std::vector<std::complex<double>> eig(n);
    for (std::size_t k = 0; k < n; ++k) {
        std::complex<double> s = 0.0;
        for (int alpha = -t.max_jump; alpha <= t.max_jump; ++alpha) {
            const auto m = static_cast<long long>((alpha + static_cast<long long>(n)) % static_cast<long long>(n));
            const auto j = (static_cast<long long>(k) * m) % static_cast<long long>(n);
            const double angle = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n);
            s += t.q[static_cast<std::size_t>(alpha + t.max_jump)] * std::polar(1.0, angle);
        }
        eig[k] = s;
    }
    return eig;
}

/// Dense circulant one-step matrix P_{ij} = q_{(j - i) mod N}.
inline std::vector<std::vector<double>> tilted_circulant_matrix(const TiltedKernel& t, std::size_t n) {
    detail::require(n > static_cast<std::size_t>(2 * t.max_jump), Errc::invalid_argument,
                    "ring must be larger than the jump support");
    std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (int alpha = -t.max_jump; alpha <= t.max_jump; ++alpha) {
            const auto j = static_cast<std::size_t>((static_cast<long long>(i) + alpha + static_cast<long long>(n)) %
                                                    static_cast<long long>(n));
            m[i][j] += t.q[static_cast<std::size_t>(alpha + t.max_jump)];
        }
    return m;
}

}  // namespace jumpspec

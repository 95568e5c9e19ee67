/**
 * @file implied.hpp
 * @brief Black-Scholes call price, vega and Newton-bisection implied volatility.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "jumpspec/error.hpp"

namespace jumpspec {

inline double norm_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

inline double norm_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

namespace detail {

inline void require_bs_inputs(double s0, double k, double tau, double sigma) {
    require(s0 > 0.0 && k > 0.0 && tau > 0.0 && sigma > 0.0, Errc::invalid_argument,
            "Black-Scholes inputs S0, K, tau, sigma must be > 0");
}

}  // namespace detail

inline double bs_price(double s0, double k, double r, double tau, double sigma) {
    detail::require_bs_inputs(s0, k, tau, sigma);
    const double vol = sigma * std::sqrt(tau);
    const double d1 = (std::log(s0 / k) + (r + 0.5 * sigma * sigma) * tau) / vol;
    return s0 * norm_cdf(d1) - k * std::exp(-r * tau) * norm_cdf(d1 - vol);
}

inline double bs_vega(double s0, double k, double r, double tau, double sigma) {
    detail::require_bs_inputs(s0, k, tau, sigma);
    const double vol = sigma * std::sqrt(tau);
    const double d1 = (std::log(s0 / k) + (r + 0.5 * sigma * sigma) * tau) / vol;
    return s0 * norm_pdf(d1) * std::sqrt(tau);
}

struct IvResult {
    double sigma = 0.0;
    int iterations = 0;
    bool converged = false;
    double residual = 0.0;  // |BS(sigma) - target|
};

struct IvOptions {
    double sigma_lo = 1e-8;
    double sigma_hi = 5.0;
    double initial_guess = 0.2;
    int max_iterations = 200;
    double price_tolerance = 1e-10;  // times S0
};

/**
 * Newton steps with vega, falling back to bisection on the bracket whenever a
 * step leaves it or vega underflows. Iteration stops once the price residual is
 * within tolerance and the last update has stalled, so the returned sigma is
 * as sharp as double precision allows rather than merely price-accurate.
 */
inline IvResult implied_vol(double target, double s0, double k, double r, double tau, const IvOptions& opt = {}) {
    detail::require(s0 > 0.0 && k > 0.0 && tau > 0.0, Errc::invalid_argument, "S0, K and tau must be > 0");
    detail::require(std::isfinite(target), Errc::invalid_argument, "target price must be finite");
    const double intrinsic = std::max(s0 - k * std::exp(-r * tau), 0.0);
    if (target >= s0) throw Error(Errc::above_spot_bound, "call price at or above the spot bound");
    if (target <= intrinsic + 1e-14 * s0)
        throw Error(Errc::below_intrinsic, "call price at or below the sigma -> 0 bound");

    const double tol = opt.price_tolerance * s0;
    double lo = opt.sigma_lo;
    double hi = opt.sigma_hi;
    IvResult res;

    // Root outside the bracket: report the edge, flagged.
    const double f_hi = bs_price(s0, k, r, tau, hi) - target;
    if (f_hi < 0.0) {
        res = {hi, 0, false, std::abs(f_hi)};
        return res;
    }
    const double f_lo = bs_price(s0, k, r, tau, lo) - target;
    if (f_lo > 0.0) {
        res = {lo, 0, false, std::abs(f_lo)};
        return res;
    }

    double sigma = std::clamp(opt.initial_guess, lo, hi);
    for (int it = 1; it <= opt.max_iterations; ++it) {
        const double f = bs_price(s0, k, r, tau, sigma) - target;
        res.iterations = it;
        res.sigma = sigma;
        res.residual = std::abs(f);
        if (f == 0.0) {
            res.converged = true;
            return res;
        }
        (f > 0.0 ? hi : lo) = sigma;

        const double vega = bs_vega(s0, k, r, tau, sigma);
        double next = sigma - f / vega;
        if (!(vega >= 1e-12) || !(next > lo && next < hi)) next = 0.5 * (lo + hi);

        const bool stalled = std::abs(next - sigma) <= 4.0 * std::numeric_limits<double>::epsilon() * sigma ||
                             hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi;
        if (res.residual <= tol && stalled) {
            res.converged = true;
            return res;
        }
        if (stalled) break;
        sigma = next;
    }
    res.converged = res.residual <= tol && res.sigma > opt.sigma_lo && res.sigma < opt.sigma_hi;
    return res;
}

}  // namespace jumpspec

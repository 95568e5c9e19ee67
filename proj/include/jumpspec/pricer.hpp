/**
 * @file pricer.hpp
 * @brief Single-FFT European pricing on the periodic log-moneyness grid.
 *
 * Per maturity tau:
 *   1. damp the unit-strike payoff, v0 = e^{-eta x} [e^x - 1]_+
 *   2. forward DFT, multiply by e^{tau (psi^{eta} - r)}, inverse DFT
 *   3. undo damping, h(x; tau) = e^{eta x} v(x, tau)
 *   4. C(S0, K, tau) = K h(-ln(K / S0); tau) for every strike K
 *
 * Step 4 relies on translation invariance of the jump generator in log-price:
 * the payoff [e^x - K]_+ is K times the unit payoff shifted by ln K.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "jumpspec/error.hpp"
#include "jumpspec/fft.hpp"
#include "jumpspec/grid.hpp"
#include "jumpspec/kernel.hpp"
#include "jumpspec/spectral.hpp"

namespace jumpspec {

struct PricingConfig {
    double s0 = 1.0;
    double r = 0.05;
    double q = 0.0;  // continuous dividend yield; kernels are scaled to r - q
    LogGrid grid{5.0, 4096};
    double eta = 1.5;
    std::vector<double> maturities{0.5, 2.0};
    KernelSpec kernel;
    double flatness_tolerance = 1e-6;  // relative to max |h|
    bool enforce_flatness = false;

    void validate() const {
        detail::require(s0 > 0.0 && std::isfinite(s0), Errc::invalid_argument, "spot S0 must be > 0");
        detail::require(std::isfinite(r) && std::isfinite(q), Errc::invalid_argument, "rates must be finite");
        detail::require(eta > 1.0 && eta < 2.0, Errc::invalid_argument, "damping eta must lie in (1, 2)");
        for (double tau : maturities)
            detail::require(tau > 0.0 && std::isfinite(tau), Errc::invalid_argument, "maturities must be > 0");
    }
};

struct BoundaryFlatness {
    double left = 0.0;   // |h(x_1) - h(x_0)| / max |h|
    double right = 0.0;  // |h(x_{N-1}) - h(x_{N-2})| / max |h|
    double tolerance = 0.0;

    bool left_flat() const noexcept { return left <= tolerance; }
    bool right_flat() const noexcept { return right <= tolerance; }
    bool flat() const noexcept { return left_flat() && right_flat(); }
};

struct ValueCurve {
    std::vector<double> h;
    double tau = 0.0;
    LogGrid grid{5.0, 4096};
    double r = 0.0;
    double eta = 0.0;
    BoundaryFlatness flatness;
    double growth_exponent = 0.0;  // max_m tau Re(psi - r); > 30 signals overflow risk
    double min_value = 0.0;
};

/// Unit-strike call payoff [e^x - 1]_+.
inline double call_payoff_unit(double x) { return std::max(std::expm1(x), 0.0); }

/// Unit-strike put payoff [1 - e^x]_+.
inline double put_payoff_unit(double x) { return std::max(-std::expm1(x), 0.0); }

/// v0(x_k) = e^{-eta x_k} [e^{x_k} - 1]_+.
inline std::vector<double> damped_payoff(const LogGrid& grid, double eta) {
    detail::require(eta > 1.0, Errc::invalid_argument, "call damping needs eta > 1");
    std::vector<double> v(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double x = grid.node(k);
        v[k] = std::exp(-eta * x) * call_payoff_unit(x);
    }
    return v;
}

inline BoundaryFlatness boundary_flatness(std::span<const double> h, double tolerance) {
    const std::size_t n = h.size();
    double top = 0.0;
    for (double v : h) top = std::max(top, std::abs(v));
    BoundaryFlatness f;
    f.tolerance = tolerance;
    if (top == 0.0) return f;
    f.left = std::abs(h[1] - h[0]) / top;
    f.right = std::abs(h[n - 1] - h[n - 2]) / top;
    return f;
}

namespace detail {

inline void require_pricing_kernel(const LogGrid& grid, const JumpKernel& k, double carry) {
    require(std::abs(k.dx() - grid.dx()) <= 1e-12 * grid.dx(), Errc::dimension_mismatch,
            "kernel mesh differs from grid spacing");
    require(static_cast<std::size_t>(2 * k.support()) < grid.size(), Errc::invalid_argument,
            "kernel support must be below N/2 on the ring");
    if (risk_neutral_residual(k, carry) > 1e-10 * std::max(1.0, std::abs(carry)))
        throw Error(Errc::not_risk_neutral, "kernel violates sum gamma (e^{alpha dx} - 1) = r - q");
}

}  // namespace detail

/**
 * Evolves an arbitrary log-moneyness payoff g through e^{tau (L - r)} using
 * damping eta (any real eta; calls need eta > 1). Returns values on the grid.
 */
inline std::vector<double> evolve_payoff(const LogGrid& grid, const JumpKernel& k, double eta, double r, double tau,
                                         const std::function<double(double)>& payoff,
                                         double* growth_exponent = nullptr) {
    detail::require(tau >= 0.0 && std::isfinite(tau), Errc::invalid_argument, "tau must be >= 0");
    const std::size_t n = grid.size();
    std::vector<double> v0(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = grid.node(i);
        v0[i] = std::exp(-eta * x) * payoff(x);
    }
    const auto sym = build_damped_symbol(k, eta, n);
    if (growth_exponent) *growth_exponent = semigroup_growth_exponent(sym, tau, r);
    const auto v = idft_real(apply_semigroup(sym, tau, r, dft(v0)));
    std::vector<double> h(n);
    for (std::size_t i = 0; i < n; ++i) h[i] = std::exp(eta * grid.node(i)) * v[i];
    return h;
}

/// h(x_k; tau) for the unit-strike call: one forward and one inverse transform.
inline ValueCurve evolve_value(const PricingConfig& cfg, const JumpKernel& k, double tau) {
    cfg.validate();
    detail::require_pricing_kernel(cfg.grid, k, cfg.r - cfg.q);
    ValueCurve curve;
    curve.tau = tau;
    curve.grid = cfg.grid;
    curve.r = cfg.r;
    curve.eta = cfg.eta;
    if (tau == 0.0) {
        curve.h.resize(cfg.grid.size());
        for (std::size_t i = 0; i < cfg.grid.size(); ++i) curve.h[i] = call_payoff_unit(cfg.grid.node(i));
    } else {
        curve.h = evolve_payoff(cfg.grid, k, cfg.eta, cfg.r, tau, call_payoff_unit, &curve.growth_exponent);
    }
    curve.flatness = boundary_flatness(curve.h, cfg.flatness_tolerance);
    curve.min_value = *std::min_element(curve.h.begin(), curve.h.end());
    if (cfg.enforce_flatness && !curve.flatness.flat())
        throw Error(Errc::flatness_violation, "value curve not flat at the window boundary; enlarge L");
    return curve;
}

/// Piecewise-linear interpolation of grid values at y, wrapped periodically into [-L, L).
inline double interpolate_periodic(std::span<const double> h, const LogGrid& grid, double y) {
    detail::require(h.size() == grid.size(), Errc::dimension_mismatch, "curve size differs from grid");
    const double width = 2.0 * grid.half_width();
    double s = std::fmod(y + grid.half_width(), width);
    if (s < 0.0) s += width;
    const double pos = s / grid.dx();
    auto k = static_cast<std::size_t>(std::floor(pos));
    double frac = pos - static_cast<double>(k);
    if (k >= grid.size()) {
        k = grid.size() - 1;
        frac = 0.0;
    }
    const std::size_t k1 = (k + 1) % grid.size();
    return frac == 0.0 ? h[k] : (1.0 - frac) * h[k] + frac * h[k1];
}

struct StrikePrice {
    double strike = 0.0;
    double log_moneyness = 0.0;  // y = -ln(K / S0)
    double price = 0.0;
    double wrap_distance = 0.0;  // distance from y to the nearest window edge
};

/// C_j = K_j h(-ln(K_j / S0)); strikes mapping outside [-L, L) are rejected.
inline std::vector<StrikePrice> price_all_strikes(const ValueCurve& curve, double s0, std::span<const double> strikes) {
    detail::require(s0 > 0.0, Errc::invalid_argument, "spot must be > 0");
    std::vector<StrikePrice> out;
    out.reserve(strikes.size());
    for (double k : strikes) {
        detail::require(k > 0.0 && std::isfinite(k), Errc::invalid_argument, "strikes must be > 0");
        const double y = -std::log(k / s0);
        if (!curve.grid.in_window(y))
            throw Error(Errc::strike_outside_window, "strike " + std::to_string(k) + " maps outside the log window");
        StrikePrice sp;
        sp.strike = k;
        sp.log_moneyness = y;
        sp.price = k * interpolate_periodic(curve.h, curve.grid, y);
        sp.wrap_distance = std::min(y + curve.grid.half_width(), curve.grid.half_width() - y);
        out.push_back(sp);
    }
    return out;
}

/// Direct per-strike price: evolve [e^x - K/S0]_+ on the grid and read at x = 0 (times S0).
inline double price_single_strike(const PricingConfig& cfg, const JumpKernel& k, double tau, double strike) {
    detail::require_pricing_kernel(cfg.grid, k, cfg.r - cfg.q);
    const double moneyness = strike / cfg.s0;
    const auto h = evolve_payoff(cfg.grid, k, cfg.eta, cfg.r, tau,
                                 [moneyness](double x) { return std::max(std::exp(x) - moneyness, 0.0); });
    return cfg.s0 * interpolate_periodic(h, cfg.grid, 0.0);
}

/// Unit-strike put curve; prices read through price_all_strikes exactly as for calls.
inline ValueCurve evolve_put_value(const PricingConfig& cfg, const JumpKernel& k, double tau) {
    cfg.validate();
    detail::require_pricing_kernel(cfg.grid, k, cfg.r - cfg.q);
    ValueCurve curve;
    curve.tau = tau;
    curve.grid = cfg.grid;
    curve.r = cfg.r;
    curve.eta = cfg.eta;
    curve.h = evolve_payoff(cfg.grid, k, cfg.eta, cfg.r, tau, put_payoff_unit, &curve.growth_exponent);
    curve.flatness = boundary_flatness(curve.h, cfg.flatness_tolerance);
    curve.min_value = *std::min_element(curve.h.begin(), curve.h.end());
    return curve;
}

struct ForwardAndBond {
    std::vector<double> forward_curve;  // V(tau, s) for Phi(s) = s, on s = S0 e^{x_k}
    std::vector<double> bond_curve;     // V(tau, s) for Phi = 1
    double bond_price = 0.0;            // bond value read at x = 0
};

/// Martingale identities: Phi(s) = s returns s (up to carry q), Phi = 1 returns e^{-r tau}.
inline ForwardAndBond price_forward_and_bond(const PricingConfig& cfg, const JumpKernel& k, double tau) {
    cfg.validate();
    detail::require_pricing_kernel(cfg.grid, k, cfg.r - cfg.q);
    ForwardAndBond out;
    const auto lin = evolve_payoff(cfg.grid, k, cfg.eta, cfg.r, tau, [](double x) { return std::exp(x); });
    out.bond_curve = evolve_payoff(cfg.grid, k, cfg.eta, cfg.r, tau, [](double) { return 1.0; });
    out.forward_curve.resize(lin.size());
    for (std::size_t i = 0; i < lin.size(); ++i) out.forward_curve[i] = cfg.s0 * lin[i];
    out.bond_price = interpolate_periodic(out.bond_curve, cfg.grid, 0.0);
    return out;
}

}  // namespace jumpspec

/**
 * @file kernel.hpp
 * @brief Jump-intensity kernels on the log-price lattice.
 *
 * Shape families give nonnegative weights w_alpha on 1 <= |alpha| <= A; a
 * single scale lambda = r / sum w_alpha (e^{alpha dx} - 1) then turns them into
 * rates gamma_alpha = lambda w_alpha that make the discounted underlying a
 * martingale. Shape fixes the jump law, the scale fixes the economics.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "jumpspec/error.hpp"

namespace jumpspec {

namespace detail {

/// Storage shared by weights and rates: values for alpha = -A..A, the alpha = 0 slot held at zero.
class SignedSupport {
public:
    SignedSupport() = default;
    SignedSupport(int support, std::vector<double> values) : support_(support), values_(std::move(values)) {
        require(support >= 1, Errc::invalid_argument, "kernel support must be >= 1");
        require(values_.size() == static_cast<std::size_t>(2 * support + 1), Errc::dimension_mismatch,
                "kernel values must cover alpha = -A..A");
        for (double v : values_)
            require(v >= 0.0 && std::isfinite(v), Errc::invalid_argument, "kernel values must be finite and >= 0");
        values_[static_cast<std::size_t>(support)] = 0.0;
    }

    int support() const noexcept { return support_; }
    double operator[](int alpha) const noexcept {
        if (alpha < -support_ || alpha > support_) return 0.0;
        return values_[static_cast<std::size_t>(alpha + support_)];
    }
    std::span<const double> values() const noexcept { return values_; }

    template <class F>
    void for_each(F&& f) const {
        for (int alpha = -support_; alpha <= support_; ++alpha) {
            if (alpha == 0) continue;
            f(alpha, values_[static_cast<std::size_t>(alpha + support_)]);
        }
    }

private:
    int support_ = 1;
    std::vector<double> values_ = {0.0, 0.0, 0.0};
};

}  // namespace detail

/// Nonnegative shape weights w_alpha on 1 <= |alpha| <= A.
class ShapeWeights : public detail::SignedSupport {
public:
    using SignedSupport::SignedSupport;

    template <class F>
    static ShapeWeights from_function(int support, F&& weight) {
        std::vector<double> w(static_cast<std::size_t>(2 * support + 1), 0.0);
        for (int alpha = -support; alpha <= support; ++alpha)
            if (alpha != 0) w[static_cast<std::size_t>(alpha + support)] = weight(alpha);
        return ShapeWeights(support, std::move(w));
    }

    double sum() const {
        double s = 0.0;
        for_each([&](int, double w) { s += w; });
        return s;
    }
};

/// Jump rates gamma_alpha >= 0 with log-price mesh dx.
class JumpKernel : public detail::SignedSupport {
public:
    JumpKernel() = default;
    JumpKernel(int support, std::vector<double> rates, double dx) : SignedSupport(support, std::move(rates)), dx_(dx) {
        detail::require(dx > 0.0 && std::isfinite(dx), Errc::invalid_argument, "kernel mesh dx must be positive");
    }

    static JumpKernel zero(int support, double dx) {
        return JumpKernel(support, std::vector<double>(static_cast<std::size_t>(2 * support + 1), 0.0), dx);
    }

    double dx() const noexcept { return dx_; }
    double rate(int alpha) const noexcept { return (*this)[alpha]; }

    /// Lambda = sum_alpha gamma_alpha.
    double total_rate() const {
        double s = 0.0;
        for_each([&](int, double g) { s += g; });
        return s;
    }

    /// sum_alpha gamma_alpha (e^{alpha dx} - 1): the drift of e^x under the generator.
    double exponential_drift() const {
        double s = 0.0;
        for_each([&](int alpha, double g) { s += g * std::expm1(static_cast<double>(alpha) * dx_); });
        return s;
    }

    bool symmetric() const {
        for (int alpha = 1; alpha <= support(); ++alpha)
            if (rate(alpha) != rate(-alpha)) return false;
        return true;
    }

private:
    double dx_ = 1.0;
};

inline ShapeWeights shape_nearfield_exp(double xi, int support) {
    detail::require(xi > 0.0 && std::isfinite(xi), Errc::invalid_argument, "near-field decay scale must be > 0");
    return ShapeWeights::from_function(support, [xi](int alpha) { return std::exp(-std::abs(alpha) / xi); });
}

inline ShapeWeights shape_heavytail_skew(double p, double skew, int support) {
    detail::require(p > 0.0 && std::isfinite(p), Errc::invalid_argument, "tail exponent must be > 0");
    detail::require(std::abs(skew) < 1.0, Errc::invalid_argument, "|skew| must be < 1 to keep weights positive");
    return ShapeWeights::from_function(support, [p, skew](int alpha) {
        const double sign = alpha > 0 ? 1.0 : -1.0;
        return std::pow(static_cast<double>(std::abs(alpha)) + 1.0, -(1.0 + p)) * (1.0 + skew * sign);
    });
}

/// Pure power law |alpha|^{-(1+mu)}; used by the fractional-scaling probe.
inline ShapeWeights shape_power_law(double mu, int support) {
    detail::require(mu > 0.0 && std::isfinite(mu), Errc::invalid_argument, "power-law exponent must be > 0");
    return ShapeWeights::from_function(support, [mu](int alpha) {
        return std::pow(static_cast<double>(std::abs(alpha)), -(1.0 + mu));
    });
}

/// gamma = lambda w with lambda = r / sum w_alpha (e^{alpha dx} - 1).
inline JumpKernel risk_neutral_scale(const ShapeWeights& w, double dx, double r) {
    detail::require(dx > 0.0, Errc::invalid_argument, "mesh dx must be positive");
    detail::require(r >= 0.0 && std::isfinite(r), Errc::invalid_argument, "short rate must be >= 0");
    double denominator = 0.0;
    w.for_each([&](int alpha, double wa) { denominator += wa * std::expm1(static_cast<double>(alpha) * dx); });
    if (r == 0.0) return JumpKernel::zero(w.support(), dx);
    if (!(denominator > 0.0))
        throw Error(Errc::unreachable_constraint,
                    "shape has sum w (e^{alpha dx} - 1) <= 0; no nonnegative scaling reaches r > 0");
    const double lambda = r / denominator;
    std::vector<double> rates(w.values().begin(), w.values().end());
    for (double& g : rates) g *= lambda;
    return JumpKernel(w.support(), std::move(rates), dx);
}

/// Risk-neutral scale factor lambda for a shape (0 when r = 0).
inline double risk_neutral_lambda(const ShapeWeights& w, double dx, double r) {
    if (r == 0.0) return 0.0;
    double denominator = 0.0;
    w.for_each([&](int alpha, double wa) { denominator += wa * std::expm1(static_cast<double>(alpha) * dx); });
    return r / denominator;
}

/**
 * Kernel with prescribed diffusion: gamma = c w + d delta_{s}, s = +1 or -1,
 * with c, d >= 0 solving
 *   sum gamma (e^{alpha dx} - 1) = r   and   sum gamma (alpha dx)^2 = sigma^2.
 * As dx -> 0 with the shape fixed in index units the jumps shrink and the
 * pricing equation tends to Black-Scholes with volatility sigma.
 */
inline JumpKernel diffusion_matched_scale(const ShapeWeights& w, double dx, double r, double sigma) {
    detail::require(sigma > 0.0 && std::isfinite(sigma), Errc::invalid_argument, "sigma must be > 0");
    detail::require(r >= 0.0, Errc::invalid_argument, "short rate must be >= 0");
    double drift = 0.0;
    double second = 0.0;
    w.for_each([&](int alpha, double wa) {
        const double y = static_cast<double>(alpha) * dx;
        drift += wa * std::expm1(y);
        second += wa * y * y;
    });
    for (int side : {1, -1}) {
        const double e = std::expm1(static_cast<double>(side) * dx);
        const double det = drift * dx * dx - e * second;
        if (det == 0.0) continue;
        const double c = (r * dx * dx - e * sigma * sigma) / det;
        const double d = (drift * sigma * sigma - second * r) / det;
        if (c >= 0.0 && d >= 0.0) {
            std::vector<double> rates(w.values().begin(), w.values().end());
            for (double& g : rates) g *= c;
            rates[static_cast<std::size_t>(side + w.support())] += d;
            return JumpKernel(w.support(), std::move(rates), dx);
        }
    }
    throw Error(Errc::unreachable_constraint, "no nonnegative (shape, nearest-neighbour) mix matches r and sigma");
}

struct KernelMoments {
    double m1 = 0.0;  // sum alpha gamma
    double m2 = 0.0;  // sum alpha^2 gamma
    double a1 = 0.0;  // m1 dx
    double a2 = 0.0;  // m2 dx^2
    double a3 = 0.0;  // sum gamma |alpha dx|^3
};

inline KernelMoments kernel_moments(const JumpKernel& k) {
    KernelMoments mo;
    // Pair +alpha with -alpha so the odd moment of a symmetric kernel cancels exactly.
    for (int alpha = 1; alpha <= k.support(); ++alpha) {
        const double up = k.rate(alpha);
        const double down = k.rate(-alpha);
        const double a = static_cast<double>(alpha);
        const double y = a * k.dx();
        mo.m1 += a * (up - down);
        mo.m2 += a * a * (up + down);
        mo.a3 += y * y * y * (up + down);
    }
    mo.a1 = mo.m1 * k.dx();
    mo.a2 = mo.m2 * k.dx() * k.dx();
    return mo;
}

/// |sum gamma (e^{alpha dx} - 1) - (r - q)|.
inline double check_dividend_constraint(const JumpKernel& k, double r, double q) {
    return std::abs(k.exponential_drift() - (r - q));
}

/// |sum gamma (e^{alpha dx} - 1) - r|.
inline double risk_neutral_residual(const JumpKernel& k, double r) { return check_dividend_constraint(k, r, 0.0); }

/**
 * Relative change of Lambda when the support grows from A to A + extra,
 * for a shape family given as a builder A -> ShapeWeights. Used to document
 * that the truncation at A is harmless (< 1e-10 for the near-field default).
 */
template <class ShapeBuilder>
double truncation_sensitivity(ShapeBuilder&& build, int support, int extra = 8) {
    const double base = build(support).sum();
    const double grown = build(support + extra).sum();
    return std::abs(grown - base) / std::abs(base);
}

/// Configuration-level description of a kernel.
struct KernelSpec {
    enum class Family { near_field_exp, heavy_tail_skew, diffusion_matched, zero };

    Family family = Family::near_field_exp;
    double xi = 6.0;
    double tail_p = 1.2;
    double skew = 0.35;
    double sigma = 0.2;
    int support = 40;
};

inline std::string family_name(KernelSpec::Family f) {
    switch (f) {
    case KernelSpec::Family::near_field_exp: return "NearFieldExp_sym";
    case KernelSpec::Family::heavy_tail_skew: return "HeavyTail_skew";
    case KernelSpec::Family::diffusion_matched: return "DiffusionMatched";
    case KernelSpec::Family::zero: return "Zero";
    }
    return "unknown";
}

inline KernelSpec::Family parse_family(const std::string& name) {
    if (name == "near_field_exp" || name == "NearFieldExp_sym") return KernelSpec::Family::near_field_exp;
    if (name == "heavy_tail_skew" || name == "HeavyTail_skew") return KernelSpec::Family::heavy_tail_skew;
    if (name == "diffusion_matched" || name == "DiffusionMatched") return KernelSpec::Family::diffusion_matched;
    if (name == "zero" || name == "Zero") return KernelSpec::Family::zero;
    throw Error(Errc::config, "unknown kernel family '" + name + "'");
}

inline ShapeWeights build_shape(const KernelSpec& spec) {
    switch (spec.family) {
    case KernelSpec::Family::heavy_tail_skew: return shape_heavytail_skew(spec.tail_p, spec.skew, spec.support);
    case KernelSpec::Family::zero:
        return ShapeWeights(spec.support, std::vector<double>(static_cast<std::size_t>(2 * spec.support + 1), 0.0));
    case KernelSpec::Family::near_field_exp:
    case KernelSpec::Family::diffusion_matched: break;
    }
    return shape_nearfield_exp(spec.xi, spec.support);
}

/// Rates on mesh dx satisfying the martingale constraint with carry r - q.
inline JumpKernel build_kernel(const KernelSpec& spec, double dx, double r, double q = 0.0) {
    const double carry = r - q;
    switch (spec.family) {
    case KernelSpec::Family::zero:
        if (carry != 0.0) throw Error(Errc::unreachable_constraint, "zero kernel is risk-neutral only when r = q");
        return JumpKernel::zero(spec.support, dx);
    case KernelSpec::Family::diffusion_matched: return diffusion_matched_scale(build_shape(spec), dx, carry, spec.sigma);
    default: return risk_neutral_scale(build_shape(spec), dx, carry);
    }
}

}  // namespace jumpspec

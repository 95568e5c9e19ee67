/**
 * @file grid.hpp
 * @brief Price and log-price lattices, spectral frequency maps and the
 *        transition-frequency algebra of observable matrices.
 *
 * A FrequencyMap f assigns a spectral value to each lattice price S_n; the
 * transition frequency between states is the difference
 * omega(n, m) = f(S_n) - f(S_m). Observables evolve entrywise by the phase
 * exp(i omega(n, m) t), and because omega telescopes the phases of a matrix
 * product collapse to the phase of the endpoints.
 */
#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "jumpspec/error.hpp"

namespace jumpspec {

/// Prices S_n = S0 + n dS on the inclusive index window [n_min, n_max].
class PriceLattice {
public:
    PriceLattice(double s0, double ds, int n_min, int n_max) : s0_(s0), ds_(ds), n_min_(n_min), n_max_(n_max) {
        detail::require(std::isfinite(s0), Errc::invalid_argument, "S0 must be finite");
        detail::require(ds > 0.0 && std::isfinite(ds), Errc::invalid_argument, "price mesh dS must be positive");
        detail::require(n_min <= n_max, Errc::invalid_argument, "empty index window");
    }

    double s0() const noexcept { return s0_; }
    double ds() const noexcept { return ds_; }
    int n_min() const noexcept { return n_min_; }
    int n_max() const noexcept { return n_max_; }
    std::size_t size() const noexcept { return static_cast<std::size_t>(n_max_ - n_min_ + 1); }

    bool contains(int n) const noexcept { return n >= n_min_ && n <= n_max_; }

    /// True when every price in the window lies in the positivity subspace.
    bool positive() const noexcept { return price_unchecked(n_min_) > 0.0; }

    double price(int n) const {
        if (!contains(n)) throw Error(Errc::out_of_range, "lattice index outside window");
        return price_unchecked(n);
    }

private:
    double price_unchecked(int n) const noexcept { return s0_ + static_cast<double>(n) * ds_; }

    double s0_;
    double ds_;
    int n_min_;
    int n_max_;
};

/// Uniform periodic log-price grid x_k = -L + k dx on [-L, L), dx = 2L/N.
class LogGrid {
public:
    LogGrid(double half_width, std::size_t n) : half_width_(half_width), n_(n) {
        detail::require(half_width > 0.0 && std::isfinite(half_width), Errc::invalid_argument,
                        "log window half-width must be positive");
        detail::require(n >= 4, Errc::invalid_argument, "log grid needs at least 4 nodes");
        detail::require((n & (n - 1)) == 0, Errc::not_power_of_two, "log grid size must be a power of two");
        dx_ = 2.0 * half_width / static_cast<double>(n);
    }

    double half_width() const noexcept { return half_width_; }
    std::size_t size() const noexcept { return n_; }
    double dx() const noexcept { return dx_; }

    double node(std::size_t k) const noexcept { return -half_width_ + static_cast<double>(k) * dx_; }

    std::vector<double> nodes() const {
        std::vector<double> x(n_);
        for (std::size_t k = 0; k < n_; ++k) x[k] = node(k);
        return x;
    }

    bool in_window(double y) const noexcept { return y >= -half_width_ && y < half_width_; }

private:
    double half_width_;
    std::size_t n_;
    double dx_;
};

/// The two canonical spectral maps: affine f(S) = aS + b and logarithmic f(S) = c log S + b.
struct FrequencyMap {
    enum class Kind { affine, logarithmic };

    Kind kind = Kind::affine;
    double coefficient = 1.0;
    double offset = 0.0;

    static FrequencyMap affine(double a, double b) { return {Kind::affine, a, b}; }
    static FrequencyMap logarithmic(double c, double b) { return {Kind::logarithmic, c, b}; }

    double operator()(double s) const {
        if (kind == Kind::affine) return coefficient * s + offset;
        if (!(s > 0.0)) throw Error(Errc::nonpositive_price, "logarithmic frequency map needs S > 0");
        return coefficient * std::log(s) + offset;
    }
};

/// Complex N x N matrix of amplitudes A[n][m] = <n|X|m>, rows indexed from the lattice n_min.
using ObservableMatrix = Eigen::MatrixXcd;

/// omega(n, m) = f(S_n) - f(S_m).
inline double omega(const FrequencyMap& fmap, const PriceLattice& lat, int n, int m) {
    const double sn = lat.price(n);
    const double sm = lat.price(m);
    if (n == m) {
        (void)fmap(sn);  // still reject nonpositive prices under the log map
        return 0.0;
    }
    if (fmap.kind == FrequencyMap::Kind::logarithmic) {
        if (!(sn > 0.0 && sm > 0.0)) throw Error(Errc::nonpositive_price, "logarithmic frequency map needs S > 0");
        return fmap.coefficient * std::log(sn / sm);
    }
    return fmap.coefficient * (static_cast<double>(n - m) * lat.ds());
}

/// |omega(n, n-a) + omega(n-a, n-a-b) - omega(n, n-a-b)|.
inline double check_telescoping(const FrequencyMap& fmap, const PriceLattice& lat, int n, int alpha, int beta) {
    const int mid = n - alpha;
    const int end = mid - beta;
    if (!lat.contains(n) || !lat.contains(mid) || !lat.contains(end))
        throw Error(Errc::out_of_range, "telescoping indices outside window");
    return std::abs(omega(fmap, lat, n, mid) + omega(fmap, lat, mid, end) - omega(fmap, lat, n, end));
}

/// Spectral levels Omega(n) = omega(n, n0) over the window; differences reproduce omega.
inline std::vector<double> spectral_levels(const FrequencyMap& fmap, const PriceLattice& lat, int n0) {
    std::vector<double> levels;
    levels.reserve(lat.size());
    for (int n = lat.n_min(); n <= lat.n_max(); ++n) levels.push_back(omega(fmap, lat, n, n0));
    return levels;
}

namespace detail {

inline void require_window_shape(const ObservableMatrix& a, const PriceLattice& lat) {
    const auto n = static_cast<Eigen::Index>(lat.size());
    if (a.rows() != n || a.cols() != n)
        throw Error(Errc::dimension_mismatch, "observable matrix must be square over the lattice window");
}

}  // namespace detail

/// Heisenberg evolution A[n][m] -> A[n][m] exp(i omega(n, m) t).
inline ObservableMatrix heisenberg_phase(const ObservableMatrix& a, const FrequencyMap& fmap, const PriceLattice& lat,
                                         double t) {
    detail::require_window_shape(a, lat);
    detail::require(std::isfinite(t), Errc::invalid_argument, "time must be finite");
    ObservableMatrix out(a.rows(), a.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        const int n = lat.n_min() + static_cast<int>(i);
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            const int m = lat.n_min() + static_cast<int>(j);
            const double phase = omega(fmap, lat, n, m) * t;
            out(i, j) = a(i, j) * std::complex<double>(std::cos(phase), std::sin(phase));
        }
    }
    return out;
}

/// heisenberg_phase(A, t) * heisenberg_phase(B, t).
inline ObservableMatrix product_phase(const ObservableMatrix& a, const ObservableMatrix& b, const FrequencyMap& fmap,
                                      const PriceLattice& lat, double t) {
    if (a.cols() != b.rows()) throw Error(Errc::dimension_mismatch, "product of non-conformable observables");
    return heisenberg_phase(a, fmap, lat, t) * heisenberg_phase(b, fmap, lat, t);
}

}  // namespace jumpspec

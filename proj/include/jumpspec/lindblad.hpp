/**
 * @file lindblad.hpp
 * @brief Shift-channel GKSL dynamics on a ring, its classical master equation,
 *        the Heisenberg jump generator and Monte-Carlo path pricing.
 *
 * With jump operators L_alpha = sqrt(gamma_alpha) T_alpha, T_alpha|n> = |n + alpha>,
 * the Lindblad generator reduces to
 *
 *   L(rho) = -(i/hbar)[H, rho] + sum_alpha gamma_alpha T_alpha rho T_alpha^dagger - Lambda rho
 *
 * because L_alpha^dagger L_alpha = gamma_alpha I. For H diagonal in the price
 * basis the diagonal of rho obeys dp/dt = Q p with the circulant generator Q.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "jumpspec/error.hpp"
#include "jumpspec/fft.hpp"
#include "jumpspec/kernel.hpp"
#include "jumpspec/random.hpp"
#include "jumpspec/spectral.hpp"

namespace jumpspec {

/// Rates indexed by ring gap g = alpha mod N (g = 0 unused).
inline std::vector<double> ring_rates(const JumpKernel& k, std::size_t n) {
    detail::require(2 * static_cast<std::size_t>(k.support()) < n, Errc::invalid_argument,
                    "kernel support must be below N/2 to avoid wrap ambiguity");
    std::vector<double> g(n, 0.0);
    k.for_each([&](int alpha, double rate) { g[detail::ring_index(alpha, n)] += rate; });
    return g;
}

/// Circulant master-equation generator Q[m][n] = gamma_{(m - n) mod N}, diagonal -Lambda.
class QMatrix {
public:
    explicit QMatrix(std::vector<double> gap_rates) : rates_(std::move(gap_rates)) {
        detail::require(rates_.size() >= 2, Errc::invalid_argument, "ring needs N >= 2");
        rates_[0] = 0.0;
        for (double g : rates_) detail::require(g >= 0.0 && std::isfinite(g), Errc::invalid_argument, "rates must be >= 0");
        total_ = std::accumulate(rates_.begin(), rates_.end(), 0.0);
    }

    std::size_t size() const noexcept { return rates_.size(); }
    double total_rate() const noexcept { return total_; }
    std::span<const double> gap_rates() const noexcept { return rates_; }

    double operator()(std::size_t m, std::size_t n) const {
        return m == n ? -total_ : rates_[(m + size() - n) % size()];
    }

    Eigen::MatrixXd dense() const {
        const auto n = static_cast<Eigen::Index>(size());
        Eigen::MatrixXd q(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j) q(i, j) = (*this)(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
        return q;
    }

    /// Eigenvalues in the DFT basis: mu_k = sum_g gamma_g (e^{-i 2 pi k g / N} - 1).
    SpectralArray spectrum() const {
        const std::size_t n = size();
        const auto table = detail::ring_phase_table(n);
        SpectralArray mu{std::vector<cplx>(n, cplx(0.0, 0.0))};
        for (std::size_t k = 1; k < n; ++k) {
            cplx s(0.0, 0.0);
            for (std::size_t g = 1; g < n; ++g)
                if (rates_[g] != 0.0) s += rates_[g] * std::conj(table[(k * g) % n]);
            mu[k] = s;
        }
        return mu;
    }

private:
    std::vector<double> rates_;
    double total_ = 0.0;
};

inline QMatrix build_qmatrix(const JumpKernel& k, std::size_t n) { return QMatrix(ring_rates(k, n)); }

/// p(t) = e^{tQ} p0 via DFT diagonalization of the circulant Q.
inline std::vector<double> evolve_master(std::span<const double> p0, const QMatrix& q, double t) {
    detail::require(p0.size() == q.size(), Errc::dimension_mismatch, "distribution and generator sizes differ");
    detail::require(is_power_of_two(q.size()), Errc::not_power_of_two, "ring size must be a power of two");
    double total = 0.0;
    for (double v : p0) {
        detail::require(v >= 0.0 && std::isfinite(v), Errc::invalid_argument, "probabilities must be >= 0");
        total += v;
    }
    detail::require(std::abs(total - 1.0) <= 1e-12, Errc::not_normalized, "probabilities must sum to 1");
    if (t == 0.0) return {p0.begin(), p0.end()};
    const auto mu = q.spectrum();
    auto spectrum = dft(p0);
    for (std::size_t k = 0; k < spectrum.n_modes(); ++k) spectrum[k] *= std::exp(t * mu[k]);
    return idft_real(spectrum);
}

/// rho with Hermiticity, trace and positivity diagnostics.
struct DensityMatrix {
    Eigen::MatrixXcd rho;

    double trace_defect() const { return std::abs(rho.trace() - cplx(1.0, 0.0)); }
    double hermiticity_defect() const { return (rho - rho.adjoint()).cwiseAbs().maxCoeff(); }
    double min_eigenvalue() const {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (rho + rho.adjoint()), Eigen::EigenvaluesOnly);
        return es.eigenvalues().minCoeff();
    }
    std::vector<double> diagonal() const {
        std::vector<double> d(static_cast<std::size_t>(rho.rows()));
        for (Eigen::Index i = 0; i < rho.rows(); ++i) d[static_cast<std::size_t>(i)] = rho(i, i).real();
        return d;
    }
};

struct GkslResult {
    DensityMatrix state;
    double max_hermiticity_defect = 0.0;  // largest defect removed by per-step symmetrization
    double trace_drift = 0.0;
    int steps = 0;
};

namespace detail {

inline Eigen::MatrixXcd gksl_rhs(const Eigen::MatrixXcd& rho, const Eigen::MatrixXcd& h, std::span<const double> rates,
                                 double total, double hbar) {
    const Eigen::Index n = rho.rows();
    Eigen::MatrixXcd out = (cplx(0.0, -1.0 / hbar)) * (h * rho - rho * h);
    out -= total * rho;
    for (std::size_t g = 1; g < rates.size(); ++g) {
        const double rate = rates[g];
        if (rate == 0.0) continue;
        const auto shift = static_cast<Eigen::Index>(g);
        // (T_g rho T_g^dagger)_{ij} = rho_{i-g, j-g}
        for (Eigen::Index j = 0; j < n; ++j) {
            const Eigen::Index jj = (j - shift + n) % n;
            for (Eigen::Index i = 0; i < n; ++i) out(i, j) += rate * rho((i - shift + n) % n, jj);
        }
    }
    return out;
}

}  // namespace detail

/// Classical RK4 for the shift-channel GKSL generator; requires (Lambda + ||H||) t / n_steps <= 0.01.
inline GkslResult evolve_gksl(const DensityMatrix& rho0, const Eigen::MatrixXcd& h, std::span<const double> gap_rates,
                              double t, int n_steps, double hbar = 1.0) {
    const Eigen::Index n = rho0.rho.rows();
    detail::require(rho0.rho.cols() == n && h.rows() == n && h.cols() == n &&
                        gap_rates.size() == static_cast<std::size_t>(n),
                    Errc::dimension_mismatch, "rho, H and rates must share the ring size");
    detail::require(n <= 64, Errc::invalid_argument, "dense GKSL evolution is limited to N <= 64");
    detail::require(n_steps >= 1 && t >= 0.0, Errc::invalid_argument, "need n_steps >= 1 and t >= 0");
    detail::require((h - h.adjoint()).cwiseAbs().maxCoeff() <= 1e-12, Errc::invalid_argument, "H must be Hermitian");

    double total = 0.0;
    for (std::size_t g = 1; g < gap_rates.size(); ++g) {
        detail::require(gap_rates[g] >= 0.0, Errc::invalid_argument, "rates must be >= 0");
        total += gap_rates[g];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
    const double h_norm = es.eigenvalues().cwiseAbs().maxCoeff() / hbar;
    if ((total + h_norm) * t / n_steps > 0.01)
        throw Error(Errc::step_size, "RK4 step too large: need (Lambda + ||H||) dt <= 0.01");

    const double dt = t / n_steps;
    const cplx trace0 = rho0.rho.trace();
    Eigen::MatrixXcd rho = rho0.rho;
    GkslResult res;
    auto rhs = [&](const Eigen::MatrixXcd& x) { return detail::gksl_rhs(x, h, gap_rates, total, hbar); };
    for (int s = 0; s < n_steps; ++s) {
        const Eigen::MatrixXcd k1 = rhs(rho);
        const Eigen::MatrixXcd k2 = rhs(rho + 0.5 * dt * k1);
        const Eigen::MatrixXcd k3 = rhs(rho + 0.5 * dt * k2);
        const Eigen::MatrixXcd k4 = rhs(rho + dt * k3);
        rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        res.max_hermiticity_defect = std::max(res.max_hermiticity_defect, (rho - rho.adjoint()).cwiseAbs().maxCoeff());
        rho = 0.5 * (rho + rho.adjoint()).eval();
    }
    res.state = DensityMatrix{rho};
    res.trace_drift = std::abs(rho.trace() - trace0);
    res.steps = n_steps;
    return res;
}

/// Pointwise (L* f)(s) = sum gamma_alpha (f(s + alpha ds) - f(s)) at each site.
inline std::vector<double> heisenberg_apply(const std::function<double(double)>& f, std::span<const double> sites,
                                            const JumpKernel& k, double ds) {
    std::vector<double> out;
    out.reserve(sites.size());
    for (double s : sites) {
        const double base = f(s);
        double acc = 0.0;
        k.for_each([&](int alpha, double g) {
            if (g != 0.0) acc += g * (f(s + alpha * ds) - base);
        });
        out.push_back(acc);
    }
    return out;
}

struct McResult {
    double price = 0.0;
    double stderr_ = 0.0;
    std::uint64_t seed = 0;
    std::size_t paths = 0;
};

/**
 * Exact continuous-time Markov chain simulation of the log-price: holding
 * times ~ Exp(Lambda), jump index drawn by inverse CDF over gamma_alpha / Lambda.
 * Each path uses its own counter-based substream; payoffs are summed with
 * compensation after all paths finish, so threading does not change the result.
 */
inline McResult mc_price(double s0, double r, const JumpKernel& k, double tau,
                         const std::function<double(double)>& payoff, std::size_t n_paths, std::uint64_t seed,
                         unsigned threads = 0) {
    detail::require(s0 > 0.0 && tau >= 0.0, Errc::invalid_argument, "need S0 > 0 and tau >= 0");
    detail::require(n_paths >= 10000, Errc::invalid_argument, "Monte-Carlo needs at least 1e4 paths");
    const double discount = std::exp(-r * tau);
    const double lambda = k.total_rate();
    McResult res;
    res.seed = seed;
    res.paths = n_paths;
    if (lambda == 0.0) {
        res.price = discount * payoff(s0);
        return res;
    }

    std::vector<int> jumps;
    std::vector<double> cdf;
    double running = 0.0;
    k.for_each([&](int alpha, double g) {
        if (g <= 0.0) return;
        running += g;
        jumps.push_back(alpha);
        cdf.push_back(running);
    });
    for (double& c : cdf) c /= running;
    cdf.back() = 1.0;

    std::vector<double> values(n_paths);
    auto simulate = [&](std::size_t begin, std::size_t end) {
        for (std::size_t path = begin; path < end; ++path) {
            CounterRng rng(seed, path);
            double clock = 0.0;
            long long position = 0;
            while (true) {
                clock -= std::log(rng.uniform()) / lambda;
                if (clock > tau) break;
                const double u = rng.uniform();
                const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
                position += jumps[static_cast<std::size_t>(it - cdf.begin())];
            }
            values[path] = payoff(s0 * std::exp(static_cast<double>(position) * k.dx()));
        }
    };

    if (threads == 0) threads = std::max(1u, std::min(8u, std::thread::hardware_concurrency()));
    if (threads == 1) {
        simulate(0, n_paths);
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (n_paths + threads - 1) / threads;
        for (unsigned i = 0; i < threads; ++i) {
            const std::size_t begin = i * chunk;
            const std::size_t end = std::min(n_paths, begin + chunk);
            if (begin < end) pool.emplace_back(simulate, begin, end);
        }
        for (auto& th : pool) th.join();
    }

    const double mean = compensated_sum(values) / static_cast<double>(n_paths);
    std::vector<double> sq(n_paths);
    for (std::size_t i = 0; i < n_paths; ++i) sq[i] = (values[i] - mean) * (values[i] - mean);
    const double var = compensated_sum(sq) / static_cast<double>(n_paths - 1);
    res.price = discount * mean;
    res.stderr_ = discount * std::sqrt(var / static_cast<double>(n_paths));
    return res;
}

}  // namespace jumpspec

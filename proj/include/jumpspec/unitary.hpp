/**
 * @file unitary.hpp
 * @brief Circulant one-step unitaries and their Born-rule transition matrices.
 *
 * A homogeneous unitary on the ring Z/N is fixed by its phase diagonal
 * e^{-i phi_r}, phi_r = H_r dt, at the frequencies theta_r = 2 pi r / N.
 * Its amplitude kernel is the inverse DFT of that diagonal,
 *
 *   u_alpha = (1/N) sum_r e^{-i phi_r} e^{+i 2 pi r alpha / N},   U_nm = u_{(n - m) mod N},
 *
 * and P_nm = |u_{n-m}|^2 is doubly stochastic. Products of propagators
 * convolve amplitudes; probabilities do not convolve.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>

#include "jumpspec/error.hpp"
#include "jumpspec/fft.hpp"

namespace jumpspec {

/// Complex amplitudes u_alpha over gaps alpha = 0..N-1 (mod N).
struct AmplitudeKernel {
    std::vector<cplx> u;

    std::size_t size() const noexcept { return u.size(); }

    double norm_squared() const {
        double s = 0.0;
        for (const auto& v : u) s += std::norm(v);
        return s;
    }
};

/// Gap probabilities p_alpha; P[n][m] = p_{(n - m) mod N}.
struct TransitionMatrix {
    std::vector<double> p;

    std::size_t size() const noexcept { return p.size(); }
    double operator()(std::size_t n, std::size_t m) const { return p[(n + p.size() - m) % p.size()]; }

    Eigen::MatrixXd dense() const {
        const auto n = static_cast<Eigen::Index>(p.size());
        Eigen::MatrixXd out(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j)
                out(i, j) = (*this)(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
        return out;
    }
};

class CirculantUnitary {
public:
    /// phases[r] = H_r dt; the kernel is the inverse DFT of e^{-i phases}.
    CirculantUnitary(std::vector<double> phases, double dt, double hbar)
        : phases_(std::move(phases)), dt_(dt), hbar_(hbar) {
        detail::require(phases_.size() >= 2, Errc::invalid_argument, "ring needs N >= 2");
        for (double v : phases_) detail::require(std::isfinite(v), Errc::invalid_argument, "phases must be finite");
        kernel_ = AmplitudeKernel{synthesize(phases_)};
    }

    /// Adopts an externally assembled kernel (e.g. the first column of a dense unitary).
    CirculantUnitary(std::vector<double> phases, double dt, double hbar, AmplitudeKernel kernel)
        : phases_(std::move(phases)), dt_(dt), hbar_(hbar), kernel_(std::move(kernel)) {
        detail::require(phases_.size() == kernel_.size(), Errc::dimension_mismatch, "phases and kernel differ in size");
    }

    std::size_t size() const noexcept { return phases_.size(); }
    double dt() const noexcept { return dt_; }
    double hbar() const noexcept { return hbar_; }
    std::span<const double> phases() const noexcept { return phases_; }
    const AmplitudeKernel& kernel() const noexcept { return kernel_; }

    cplx operator()(std::size_t n, std::size_t m) const { return kernel_.u[(n + size() - m) % size()]; }

    Eigen::MatrixXcd dense() const {
        const auto n = static_cast<Eigen::Index>(size());
        Eigen::MatrixXcd out(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j)
                out(i, j) = (*this)(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
        return out;
    }

    /// Phases recovered from the kernel on the principal branch (-pi, pi].
    std::vector<double> principal_phases() const {
        std::vector<cplx> diag = kernel_.u;
        if (is_power_of_two(diag.size())) {
            diag = dft(diag).values;
        } else {
            diag = naive_dft(kernel_.u);
        }
        std::vector<double> out(diag.size());
        for (std::size_t r = 0; r < diag.size(); ++r) {
            double phi = -std::arg(diag[r]);
            if (phi <= -std::numbers::pi) phi += 2.0 * std::numbers::pi;
            out[r] = phi;
        }
        return out;
    }

private:
    static std::vector<cplx> naive_dft(const std::vector<cplx>& x) {
        const std::size_t n = x.size();
        std::vector<cplx> out(n);
        for (std::size_t m = 0; m < n; ++m)
            for (std::size_t k = 0; k < n; ++k)
                out[m] += x[k] * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>((k * m) % n) / n);
        return out;
    }

    static std::vector<cplx> synthesize(const std::vector<double>& phases) {
        const std::size_t n = phases.size();
        std::vector<cplx> diag(n);
        for (std::size_t r = 0; r < n; ++r) diag[r] = std::polar(1.0, -phases[r]);
        if (is_power_of_two(n)) return idft(std::span<const cplx>(diag));
        std::vector<cplx> u(n);
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t r = 0; r < n; ++r)
                u[a] += diag[r] * std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>((r * a) % n) / n);
            u[a] /= static_cast<double>(n);
        }
        return u;
    }

    std::vector<double> phases_;
    double dt_;
    double hbar_;
    AmplitudeKernel kernel_;
};

/// U with diagonal e^{-i H_r dt}; hbar is carried along for the f(S) parametrization.
inline CirculantUnitary propagator_from_spectrum(std::span<const double> h_r, double dt, double hbar = 1.0) {
    detail::require(hbar > 0.0 && std::isfinite(dt), Errc::invalid_argument, "hbar must be > 0 and dt finite");
    std::vector<double> phases(h_r.size());
    for (std::size_t r = 0; r < h_r.size(); ++r) phases[r] = h_r[r] * dt;
    return CirculantUnitary(std::move(phases), dt, hbar);
}

/// P_nm = |U_nm|^2.
inline TransitionMatrix transition_matrix(const CirculantUnitary& u) {
    TransitionMatrix t;
    t.p.reserve(u.size());
    for (const auto& a : u.kernel().u) t.p.push_back(std::norm(a));
    return t;
}

/// Born probabilities of an arbitrary dense unitary.
inline Eigen::MatrixXd born_probabilities(const Eigen::MatrixXcd& u) { return u.cwiseAbs2(); }

/// Dense Fourier matrix F_nr = N^{-1/2} e^{+i 2 pi n r / N}; homogeneous unitaries are F diag F*.
inline Eigen::MatrixXcd fourier_matrix(std::size_t n) {
    const auto nn = static_cast<Eigen::Index>(n);
    Eigen::MatrixXcd f(nn, nn);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (Eigen::Index a = 0; a < nn; ++a)
        for (Eigen::Index r = 0; r < nn; ++r)
            f(a, r) = std::polar(scale, 2.0 * std::numbers::pi * static_cast<double>((a * r) % nn) / nn);
    return f;
}

/**
 * Functional-calculus route: S = F diag(s_r) F*, H_S = hbar f(S) and
 * U_S = e^{-i H_S dt} = F diag(e^{-i hbar f(s_r) dt}) F*, assembled with dense
 * matrices. The circulant kernel is read from the first column of U_S after
 * checking that U_S is circulant.
 */
inline CirculantUnitary propagator_from_fS(std::span<const double> s_r, const std::function<double(double)>& f,
                                           double dt, double hbar = 1.0) {
    const std::size_t n = s_r.size();
    detail::require(n >= 2, Errc::invalid_argument, "ring needs N >= 2");
    const auto fm = fourier_matrix(n);
    Eigen::VectorXcd diag(static_cast<Eigen::Index>(n));
    std::vector<double> phases(n);
    for (std::size_t r = 0; r < n; ++r) {
        const double h = hbar * f(s_r[r]);
        detail::require(std::isfinite(h), Errc::invalid_argument, "f must be finite on the spectrum");
        phases[r] = h * dt;
        diag(static_cast<Eigen::Index>(r)) = std::polar(1.0, -phases[r]);
    }
    const Eigen::MatrixXcd dense = fm * diag.asDiagonal() * fm.adjoint();
    AmplitudeKernel kernel{std::vector<cplx>(n)};
    for (std::size_t a = 0; a < n; ++a) kernel.u[a] = dense(static_cast<Eigen::Index>(a), 0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (std::abs(dense(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) - kernel.u[(i + n - j) % n]) >
                1e-10)
                throw Error(Errc::invalid_argument, "functional-calculus propagator is not circulant");
    return CirculantUnitary(std::move(phases), dt, hbar, std::move(kernel));
}

/// Dense U_S = e^{-i hbar f(S) dt} for a general Hermitian S (not necessarily homogeneous).
inline Eigen::MatrixXcd propagator_from_observable(const Eigen::MatrixXcd& s, const std::function<double(double)>& f,
                                                   double dt, double hbar = 1.0) {
    detail::require(s.rows() == s.cols(), Errc::dimension_mismatch, "observable must be square");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(s);
    Eigen::VectorXcd diag(s.rows());
    for (Eigen::Index i = 0; i < s.rows(); ++i) diag(i) = std::polar(1.0, -hbar * f(es.eigenvalues()(i)) * dt);
    return es.eigenvectors() * diag.asDiagonal() * es.eigenvectors().adjoint();
}

/// Cyclic convolution of gap amplitudes: the kernel of U(t) U(s).
inline AmplitudeKernel amplitude_compose(const AmplitudeKernel& ut, const AmplitudeKernel& us) {
    detail::require(ut.size() == us.size(), Errc::dimension_mismatch, "amplitude kernels on different rings");
    const std::size_t n = ut.size();
    AmplitudeKernel out{std::vector<cplx>(n)};
    for (std::size_t a = 0; a < n; ++a) {
        cplx s(0.0, 0.0);
        for (std::size_t b = 0; b < n; ++b) s += ut.u[(a + n - b) % n] * us.u[b];
        out.u[a] = s;
    }
    return out;
}

/// max entry of |M_theta T_a - e^{i theta a} T_a M_theta| with theta = 2 pi k / N.
inline double weyl_relation_check(std::size_t n, long long a, long long k) {
    detail::require(n >= 1, Errc::invalid_argument, "ring needs N >= 1");
    const auto nn = static_cast<long long>(n);
    auto phase = [&](long long idx) {
        const long long j = (((idx * k) % nn) + nn) % nn;
        return std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n));
    };
    const auto ni = static_cast<Eigen::Index>(n);
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(ni, ni);
    Eigen::MatrixXcd t = Eigen::MatrixXcd::Zero(ni, ni);
    for (long long i = 0; i < nn; ++i) {
        m(i, i) = phase(i);
        t(((i + a) % nn + nn) % nn, i) = 1.0;  // T_a |i> = |i + a>
    }
    const Eigen::MatrixXcd lhs = m * t;
    const Eigen::MatrixXcd rhs = phase(a) * (t * m);
    return (lhs - rhs).cwiseAbs().maxCoeff();
}

enum class QuadratureRule { trapezoid, gauss_legendre };

/**
 * Amplitudes on the integer lattice,
 *   u_alpha = (1/2pi) int_{-pi}^{pi} e^{-i H(theta) dt} e^{i theta alpha} dtheta,
 * for |alpha| <= max_gap (index alpha + max_gap). The trapezoid rule uses the
 * periodic nodes theta_j = 2 pi j / n folded into (-pi, pi] and is spectrally
 * accurate for periodic H; Gauss-Legendre panels (8 nodes each) are accurate
 * for any smooth H on the closed interval.
 */
inline AmplitudeKernel infinite_lattice_kernel(const std::function<double(double)>& h, double dt, std::size_t panels,
                                               int max_gap, QuadratureRule rule = QuadratureRule::gauss_legendre) {
    detail::require(panels >= 1 && max_gap >= 0, Errc::invalid_argument, "need >= 1 panel and max_gap >= 0");
    std::vector<double> theta;
    std::vector<double> weight;
    if (rule == QuadratureRule::trapezoid) {
        theta.resize(panels);
        weight.assign(panels, 1.0 / static_cast<double>(panels));
        for (std::size_t j = 0; j < panels; ++j) {
            double t = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(panels);
            if (t > std::numbers::pi) t -= 2.0 * std::numbers::pi;
            theta[j] = t;
        }
    } else {
        using rule8 = boost::math::quadrature::gauss<double, 8>;
        const auto& absc = rule8::abscissa();
        const auto& wts = rule8::weights();
        const double width = 2.0 * std::numbers::pi / static_cast<double>(panels);
        for (std::size_t p = 0; p < panels; ++p) {
            const double mid = -std::numbers::pi + (static_cast<double>(p) + 0.5) * width;
            for (std::size_t i = 0; i < absc.size(); ++i) {
                const double w = wts[i] * 0.5 * width / (2.0 * std::numbers::pi);
                if (absc[i] == 0.0) {
                    theta.push_back(mid);
                    weight.push_back(w);
                } else {
                    theta.push_back(mid - absc[i] * 0.5 * width);
                    weight.push_back(w);
                    theta.push_back(mid + absc[i] * 0.5 * width);
                    weight.push_back(w);
                }
            }
        }
    }
    std::vector<cplx> phase(theta.size());
    for (std::size_t j = 0; j < theta.size(); ++j) {
        const double hv = h(theta[j]);
        if (!std::isfinite(hv)) throw Error(Errc::invalid_argument, "H(theta) must be finite");
        phase[j] = weight[j] * std::polar(1.0, -hv * dt);
    }
    AmplitudeKernel out{std::vector<cplx>(static_cast<std::size_t>(2 * max_gap + 1))};
    for (int alpha = -max_gap; alpha <= max_gap; ++alpha) {
        cplx s(0.0, 0.0);
        for (std::size_t j = 0; j < theta.size(); ++j) s += phase[j] * std::polar(1.0, theta[j] * alpha);
        out.u[static_cast<std::size_t>(alpha + max_gap)] = s;
    }
    return out;
}

/// Doubles the panel count from `panels` until successive kernels differ by < tol; returns the last.
inline AmplitudeKernel infinite_lattice_kernel_adaptive(const std::function<double(double)>& h, double dt,
                                                        int max_gap, double tol = 1e-10, std::size_t panels = 64,
                                                        std::size_t max_panels = 1 << 16) {
    auto prev = infinite_lattice_kernel(h, dt, panels, max_gap);
    while (panels < max_panels) {
        panels *= 2;
        auto next = infinite_lattice_kernel(h, dt, panels, max_gap);
        double diff = 0.0;
        for (std::size_t i = 0; i < next.size(); ++i) diff = std::max(diff, std::abs(next.u[i] - prev.u[i]));
        prev = std::move(next);
        if (diff < tol) return prev;
    }
    throw Error(Errc::invalid_argument, "lattice kernel quadrature did not converge");
}

}  // namespace jumpspec

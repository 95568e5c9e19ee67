#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "jumpspec/unitary.hpp"
#include "oracles.hpp"

using namespace jumpspec;

namespace {

std::vector<double> random_spectrum(std::size_t n, unsigned seed, double scale = 3.0) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> d(-scale, scale);
    std::vector<double> h(n);
    for (auto& v : h) v = d(gen);
    return h;
}

double max_abs(const Eigen::MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); }

double kernel_gap(const AmplitudeKernel& a, const AmplitudeKernel& b) {
    double w = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) w = std::max(w, std::abs(a.u[i] - b.u[i]));
    return w;
}

}  // namespace

TEST(Propagator, ConstantSpectrumIsGlobalPhase) {
    std::vector<double> h(16, 1.3);
    auto u = propagator_from_spectrum(h, 0.7);
    const Eigen::MatrixXcd expected = std::polar(1.0, -1.3 * 0.7) * Eigen::MatrixXcd::Identity(16, 16);
    EXPECT_LE(max_abs(u.dense() - expected), 1e-15);
    EXPECT_LE((transition_matrix(u).dense() - Eigen::MatrixXd::Identity(16, 16)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Propagator, TwoPointSwap) {
    auto u = propagator_from_spectrum(std::vector<double>{0.0, std::numbers::pi}, 1.0);
    Eigen::MatrixXcd swap(2, 2);
    swap << 0, 1, 1, 0;
    EXPECT_LE(max_abs(u.dense() - swap), 1e-15);
    Eigen::MatrixXd pswap(2, 2);
    pswap << 0, 1, 1, 0;
    EXPECT_LE((transition_matrix(u).dense() - pswap).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Propagator, UnitaryAndHomogeneous) {
    auto u = propagator_from_spectrum(random_spectrum(64, 1), 0.9);
    auto d = u.dense();
    EXPECT_LE(max_abs(d.adjoint() * d - Eigen::MatrixXcd::Identity(64, 64)), 1e-12);
    EXPECT_LE(std::abs(u.kernel().norm_squared() - 1.0), 1e-12);
    for (Eigen::Index n = 0; n < 64; ++n)
        for (Eigen::Index m = 0; m < 64; ++m) EXPECT_EQ(d(n, m), d((n + 1) % 64, (m + 1) % 64));
}

TEST(Propagator, KernelMatchesNaiveSynthesis) {
    // u_alpha = (1/N) sum_r e^{-i phi_r} e^{+i 2 pi r alpha / N}; odd N exercises the non-FFT path.
    for (std::size_t n : {64u, 7u}) {
        auto h = random_spectrum(n, 3);
        auto u = propagator_from_spectrum(h, 1.0);
        for (std::size_t a = 0; a < n; ++a) {
            cplx s(0.0, 0.0);
            for (std::size_t r = 0; r < n; ++r)
                s += std::polar(1.0, -h[r]) * std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(r * a) / n);
            EXPECT_LE(std::abs(u.kernel().u[a] - s / static_cast<double>(n)), 1e-14);
        }
    }
}

TEST(TransitionMatrix, DoublyStochastic) {
    auto p = transition_matrix(propagator_from_spectrum(random_spectrum(64, 5), 1.1)).dense();
    EXPECT_GE(p.minCoeff(), 0.0);
    for (Eigen::Index i = 0; i < 64; ++i) {
        EXPECT_LE(std::abs(p.row(i).sum() - 1.0), 1e-12);
        EXPECT_LE(std::abs(p.col(i).sum() - 1.0), 1e-12);
    }
    auto id = transition_matrix(propagator_from_spectrum(std::vector<double>(8, 0.0), 1.0)).dense();
    EXPECT_EQ(id, Eigen::MatrixXd::Identity(8, 8));
}

TEST(FunctionalCalculus, SameDiagonalSamePropagator) {
    const double hbar = 0.7, dt = 0.4;
    auto h = random_spectrum(64, 8);
    std::vector<double> s_r(64);
    for (std::size_t r = 0; r < 64; ++r) s_r[r] = static_cast<double>(r);
    auto f = [&](double s) { return h[static_cast<std::size_t>(s)] / hbar; };
    auto via_fs = propagator_from_fS(s_r, f, dt, hbar);
    auto via_spec = propagator_from_spectrum(h, dt, hbar);
    EXPECT_LE(max_abs(via_fs.dense() - via_spec.dense()), 1e-13);
}

TEST(FunctionalCalculus, PhaseAliasingInvariance) {
    const double hbar = 1.0, dt = 0.5;
    auto base = random_spectrum(64, 12);
    std::vector<double> s_r(64);
    for (std::size_t r = 0; r < 64; ++r) s_r[r] = static_cast<double>(r);
    auto f0 = [&](double s) { return base[static_cast<std::size_t>(s)]; };
    auto f1 = [&](double s) {
        const auto r = static_cast<std::size_t>(s);
        const double k = static_cast<double>(static_cast<int>(r % 5) - 2);
        return base[r] + 2.0 * std::numbers::pi * k / (hbar * dt);
    };
    auto u0 = propagator_from_fS(s_r, f0, dt, hbar);
    auto u1 = propagator_from_fS(s_r, f1, dt, hbar);
    EXPECT_LE(max_abs(u0.dense() - u1.dense()), 1e-13);
    // Reconstruction on the principal branch returns the un-aliased phases.
    auto phases = u1.principal_phases();
    for (std::size_t r = 0; r < 64; ++r) {
        double expected = std::remainder(base[r] * dt, 2.0 * std::numbers::pi);
        if (expected <= -std::numbers::pi) expected += 2.0 * std::numbers::pi;
        EXPECT_NEAR(phases[r], expected, 1e-12);
        EXPECT_GT(phases[r], -std::numbers::pi);
        EXPECT_LE(phases[r], std::numbers::pi);
    }
}

TEST(FunctionalCalculus, DegenerateDiagonalObservable) {
    // S diagonal in the price basis: U_S is diagonal, hence no transitions.
    Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(8, 8);
    for (int i = 0; i < 8; ++i) s(i, i) = 1.0 + 0.5 * i;
    auto u = propagator_from_observable(s, [](double x) { return x * x; }, 0.8);
    EXPECT_LE((born_probabilities(u) - Eigen::MatrixXd::Identity(8, 8)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(FunctionalCalculus, HomogeneousObservableMatchesSpectrumRoute) {
    std::vector<double> s_r{0.3, -1.0, 2.0, 0.7, 1.1, -0.4, 0.0, 2.5};
    auto f = [](double s) { return std::sin(s) + s * s; };
    auto fm = fourier_matrix(8);
    Eigen::VectorXcd diag(8);
    for (int r = 0; r < 8; ++r) diag(r) = s_r[static_cast<std::size_t>(r)];
    Eigen::MatrixXcd s = fm * diag.asDiagonal() * fm.adjoint();
    s = 0.5 * (s + s.adjoint()).eval();
    auto dense = propagator_from_observable(s, f, 0.6);
    auto circ = propagator_from_fS(s_r, f, 0.6);
    EXPECT_LE(max_abs(dense - circ.dense()), 1e-12);
}

TEST(Compose, IdentityElementAndInverse) {
    auto h = random_spectrum(32, 21);
    auto ut = propagator_from_spectrum(h, 0.3).kernel();
    AmplitudeKernel delta{std::vector<cplx>(32, 0.0)};
    delta.u[0] = 1.0;
    EXPECT_LE(kernel_gap(amplitude_compose(ut, delta), ut), 1e-15);
    auto back = amplitude_compose(ut, propagator_from_spectrum(h, -0.3).kernel());
    EXPECT_LE(kernel_gap(back, delta), 1e-12);
    EXPECT_THROW(amplitude_compose(ut, AmplitudeKernel{std::vector<cplx>(16)}), Error);
}

TEST(Compose, GroupLaw) {
    auto h = random_spectrum(64, 33);
    auto lhs = amplitude_compose(propagator_from_spectrum(h, 0.3).kernel(), propagator_from_spectrum(h, 0.7).kernel());
    EXPECT_LE(kernel_gap(lhs, propagator_from_spectrum(h, 1.0).kernel()), 1e-12);
    EXPECT_LE(std::abs(lhs.norm_squared() - 1.0), 1e-12);
    // And against the dense product.
    Eigen::MatrixXcd prod = propagator_from_spectrum(h, 0.3).dense() * propagator_from_spectrum(h, 0.7).dense();
    for (Eigen::Index a = 0; a < 64; ++a) EXPECT_LE(std::abs(prod(a, 0) - lhs.u[static_cast<std::size_t>(a)]), 1e-12);
}

TEST(Compose, ProbabilitiesDoNotConvolve) {
    std::vector<double> h{0.0, 1.3, -0.4, 2.2};
    auto pt = transition_matrix(propagator_from_spectrum(h, 0.5)).dense();
    auto ps = transition_matrix(propagator_from_spectrum(h, 0.5)).dense();
    auto pts = transition_matrix(propagator_from_spectrum(h, 1.0)).dense();
    EXPECT_GT((pts - pt * ps).cwiseAbs().maxCoeff(), 1e-3);
}

TEST(Weyl, Relation) {
    EXPECT_EQ(weyl_relation_check(8, 0, 5), 0.0);
    EXPECT_EQ(weyl_relation_check(8, 3, 0), 0.0);
    EXPECT_LE(weyl_relation_check(8, 3, 5), 1e-14);
    for (long long a = -9; a <= 9; a += 3)
        for (long long k = 0; k < 16; k += 5) EXPECT_LE(weyl_relation_check(16, a, k), 1e-14);
}

TEST(InfiniteLattice, ZeroHamiltonian) {
    auto u = infinite_lattice_kernel([](double) { return 0.0; }, 1.0, 64, 5);
    for (int a = -5; a <= 5; ++a) EXPECT_NEAR(std::abs(u.u[static_cast<std::size_t>(a + 5)]), a == 0 ? 1.0 : 0.0, 1e-14);
    auto t = infinite_lattice_kernel([](double) { return 0.0; }, 1.0, 64, 5, QuadratureRule::trapezoid);
    for (int a = -5; a <= 5; ++a) EXPECT_NEAR(std::abs(t.u[static_cast<std::size_t>(a + 5)]), a == 0 ? 1.0 : 0.0, 1e-14);
}

TEST(InfiniteLattice, SmoothHamiltonianRefinement) {
    auto h = [](double th) { return th * th; };
    auto a = infinite_lattice_kernel(h, 1.0, 4096, 10);
    auto b = infinite_lattice_kernel(h, 1.0, 8192, 10);
    EXPECT_LT(kernel_gap(a, b), 1e-10);
    // Column normalization of the truncated lattice kernel approaches 1 as the window grows.
    auto wide = infinite_lattice_kernel(h, 1.0, 512, 400);
    EXPECT_NEAR(wide.norm_squared(), 1.0, 1e-3);
}

TEST(InfiniteLattice, TrapezoidOnRingNodesReproducesFiniteKernel) {
    const std::size_t n = 32;
    auto h = [](double th) { return std::cos(th) + 0.3 * th * th; };
    std::vector<double> h_r(n);
    for (std::size_t r = 0; r < n; ++r) {
        double th = 2.0 * std::numbers::pi * static_cast<double>(r) / n;
        if (th > std::numbers::pi) th -= 2.0 * std::numbers::pi;
        h_r[r] = h(th);
    }
    auto ring = propagator_from_spectrum(h_r, 0.9).kernel();
    const int gaps = 15;
    auto lat = infinite_lattice_kernel(h, 0.9, n, gaps, QuadratureRule::trapezoid);
    for (int a = -gaps; a <= gaps; ++a)
        EXPECT_LE(std::abs(lat.u[static_cast<std::size_t>(a + gaps)] - ring.u[oracle::wrap(a, n)]), 1e-14);
}

TEST(InfiniteLattice, AdaptiveConverges) {
    auto u = infinite_lattice_kernel_adaptive([](double th) { return th * th; }, 1.0, 10);
    auto ref = infinite_lattice_kernel([](double th) { return th * th; }, 1.0, 16384, 10);
    EXPECT_LT(kernel_gap(u, ref), 1e-10);
    EXPECT_THROW(infinite_lattice_kernel([](double) { return std::nan(""); }, 1.0, 8, 2), Error);
}

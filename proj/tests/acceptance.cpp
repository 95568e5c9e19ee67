// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "jumpspec/esscher.hpp"
#include "jumpspec/implied.hpp"
#include "jumpspec/lindblad.hpp"
#include "jumpspec/pricer.hpp"
#include "jumpspec/unitary.hpp"
#include "oracles.hpp"

using namespace jumpspec;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void criterion(int id, const char* name, double budget_s, const std::function<Outcome()>& body) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_budget = secs < budget_s;
    const bool pass = o.pass && in_budget;
    if (!pass) ++failures;
    std::printf("%s %2d %-28s %8.3fs (budget %gs%s)  %s\n", pass ? "PASS" : "FAIL", id, name, secs, budget_s,
                in_budget ? "" : ", exceeded", o.detail.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

PricingConfig reference_config() { return PricingConfig{}; }

JumpKernel reference_kernel(KernelSpec::Family family, const PricingConfig& cfg) {
    KernelSpec spec = cfg.kernel;
    spec.family = family;
    return build_kernel(spec, cfg.grid.dx(), cfg.r, cfg.q);
}

const KernelSpec::Family both_families[] = {KernelSpec::Family::near_field_exp, KernelSpec::Family::heavy_tail_skew};

Outcome risk_neutral() {
    double worst = 0.0;
    const auto cfg = reference_config();
    for (auto f : both_families) worst = std::max(worst, risk_neutral_residual(reference_kernel(f, cfg), cfg.r));
    for (std::size_t n : {512u, 1024u, 2048u, 4096u}) {
        KernelSpec spec = cfg.kernel;
        spec.family = KernelSpec::Family::diffusion_matched;
        const double dx = 10.0 / static_cast<double>(n);
        worst = std::max(worst, risk_neutral_residual(build_kernel(spec, dx, cfg.r), cfg.r));
    }
    return {worst <= 1e-12, fmt("max residual %.3g", worst)};
}

Outcome martingale() {
    const auto cfg = reference_config();
    double fwd = 0.0, bond = 0.0;
    for (auto f : both_families) {
        const auto fb = price_forward_and_bond(cfg, reference_kernel(f, cfg), 0.5);
        for (std::size_t i = 0; i < cfg.grid.size(); ++i) {
            const double x = cfg.grid.node(i);
            if (std::abs(x) <= 1.0) fwd = std::max(fwd, std::abs(fb.forward_curve[i] / (cfg.s0 * std::exp(x)) - 1.0));
        }
        bond = std::max(bond, std::abs(fb.bond_price - std::exp(-cfg.r * 0.5)));
    }
    return {fwd <= 1e-4 && bond <= 1e-6, fmt("forward rel %.3g, bond abs %.3g", fwd, bond)};
}

Outcome single_fft() {
    // Strikes on grid nodes spread over |ln K| <= 0.7; both routes then sample the same kink.
    const auto cfg = reference_config();
    const auto k = reference_kernel(KernelSpec::Family::near_field_exp, cfg);
    const double tau = 0.5;
    const auto curve = evolve_value(cfg, k, tau);
    std::vector<double> strikes;
    for (int j = 0; j < 20; ++j) strikes.push_back(cfg.s0 * std::exp((-286 + 30 * j) * cfg.grid.dx()));
    const auto all = price_all_strikes(curve, cfg.s0, strikes);
    double worst = 0.0;
    for (std::size_t j = 0; j < strikes.size(); ++j) {
        const double per = price_single_strike(cfg, k, tau, strikes[j]);
        worst = std::max(worst, std::abs(all[j].price - per) / per);
    }
    return {worst <= 1e-6, fmt("20 strikes, max rel gap %.3g", worst)};
}

Outcome dense_oracle() {
    double worst = 0.0;
    for (auto family : both_families) {
        PricingConfig cfg;
        cfg.grid = LogGrid(5.0, 256);
        cfg.kernel.support = 40;
        const auto k = reference_kernel(family, cfg);
        for (double tau : {0.5, 2.0}) {
            const auto curve = evolve_value(cfg, k, tau);
            const auto n = static_cast<Eigen::Index>(cfg.grid.size());
            const Eigen::MatrixXd gen =
                oracle::damped_generator(k, cfg.eta, cfg.grid.size()) - cfg.r * Eigen::MatrixXd::Identity(n, n);
            const Eigen::MatrixXd prop = (tau * gen).exp();
            auto v0 = damped_payoff(cfg.grid, cfg.eta);
            const Eigen::VectorXd v = prop * Eigen::Map<Eigen::VectorXd>(v0.data(), n);
            for (Eigen::Index i = 0; i < n; ++i) {
                const auto u = static_cast<std::size_t>(i);
                worst = std::max(worst, std::abs(curve.h[u] - std::exp(cfg.eta * cfg.grid.node(u)) * v(i)));
            }
        }
    }
    return {worst <= 1e-8, fmt("N=256, max abs %.3g", worst)};
}

Outcome classical_limit() {
    const double sigma = 0.2, tau = 0.5;
    std::vector<double> errors, ranges;
    double bs = 0.0;
    int flagged = 0;
    for (std::size_t n : {512u, 1024u, 2048u, 4096u}) {
        PricingConfig cfg;
        cfg.grid = LogGrid(5.0, n);
        KernelSpec spec = cfg.kernel;
        spec.family = KernelSpec::Family::diffusion_matched;
        spec.sigma = sigma;
        const auto k = build_kernel(spec, cfg.grid.dx(), cfg.r);
        const auto curve = evolve_value(cfg, k, tau);
        bs = bs_price(cfg.s0, cfg.s0, cfg.r, tau, sigma);
        errors.push_back(std::abs(cfg.s0 * interpolate_periodic(curve.h, cfg.grid, 0.0) - bs));
        std::vector<double> strikes;
        for (int i = 0; i < 10; ++i) strikes.push_back(cfg.s0 * (0.8 + 0.45 * i / 9.0));
        double lo = 1e300, hi = -1e300;
        for (const auto& sp : price_all_strikes(curve, cfg.s0, strikes)) {
            const auto iv = implied_vol(sp.price, cfg.s0, sp.strike, cfg.r, tau);
            if (!iv.converged) ++flagged;
            lo = std::min(lo, iv.sigma);
            hi = std::max(hi, iv.sigma);
        }
        ranges.push_back(hi - lo);
    }
    bool monotone = true;
    for (std::size_t i = 1; i < errors.size(); ++i) monotone = monotone && errors[i] < errors[i - 1] && ranges[i] < ranges[i - 1];
    const double rel = errors.back() / bs;
    return {monotone && rel <= 5e-3 && flagged == 0,
            fmt("final rel error %.3g, smile range %.3g -> %.3g", rel, ranges.front(), ranges.back())};
}

Outcome smiles() {
    const auto cfg = reference_config();
    const double dx = cfg.grid.dx();
    const int m = 41;  // about 0.1 in log-moneyness
    bool finite = true, curvature_ok = true;
    double asym[2] = {0.0, 0.0};
    std::string detail;
    int idx = 0;
    for (auto family : both_families) {
        const auto k = reference_kernel(family, cfg);
        double curv[2] = {0.0, 0.0};
        int t = 0;
        for (double tau : {0.5, 2.0}) {
            const auto curve = evolve_value(cfg, k, tau);
            auto iv_at = [&](double strike) {
                const double price = price_all_strikes(curve, cfg.s0, std::vector<double>{strike})[0].price;
                const auto iv = implied_vol(price, cfg.s0, strike, cfg.r, tau);
                if (!iv.converged || !std::isfinite(iv.sigma)) finite = false;
                return iv.sigma;
            };
            for (int i = 0; i < 10; ++i) iv_at(cfg.s0 * (0.8 + 0.45 * i / 9.0));
            const double up = iv_at(cfg.s0 * std::exp(m * dx)), mid = iv_at(cfg.s0), down = iv_at(cfg.s0 * std::exp(-m * dx));
            curv[t] = (up + down - 2.0 * mid) / ((m * dx) * (m * dx));
            if (tau == 0.5) asym[idx] = std::abs(iv_at(0.8 * cfg.s0) - iv_at(1.25 * cfg.s0));
            ++t;
        }
        curvature_ok = curvature_ok && curv[0] > curv[1];
        detail += family_name(family) + " curvature " + fmt("%.3g/%.3g; ", curv[0], curv[1]);
        ++idx;
    }
    const double ratio = asym[1] / asym[0];
    detail += fmt("asymmetry ratio %.3g", ratio);
    return {finite && curvature_ok && ratio >= 5.0, detail};
}

std::vector<double> random_spectrum(std::size_t n, unsigned seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> d(-3.0, 3.0);
    std::vector<double> h(n);
    for (auto& v : h) v = d(gen);
    return h;
}

Outcome transitions() {
    const std::size_t n = 64;
    const auto ni = static_cast<Eigen::Index>(n);
    const auto h = random_spectrum(n, 7);
    const auto u = propagator_from_spectrum(h, 0.9);
    const Eigen::MatrixXcd d = u.dense();
    const double unitarity = (d.adjoint() * d - Eigen::MatrixXcd::Identity(ni, ni)).cwiseAbs().maxCoeff();

    const Eigen::MatrixXd p = transition_matrix(u).dense();
    double stochastic = 0.0;
    for (Eigen::Index i = 0; i < ni; ++i)
        stochastic = std::max({stochastic, std::abs(p.row(i).sum() - 1.0), std::abs(p.col(i).sum() - 1.0)});

    double homogeneity = 0.0;
    for (Eigen::Index a = 0; a < ni; ++a)
        for (Eigen::Index b = 0; b < ni; ++b) homogeneity = std::max(homogeneity, std::abs(d(a, b) - d((a + 1) % ni, (b + 1) % ni)));

    const auto composed = amplitude_compose(propagator_from_spectrum(h, 0.3).kernel(), propagator_from_spectrum(h, 0.6).kernel());
    const auto whole = propagator_from_spectrum(h, 0.9).kernel();
    double group = 0.0;
    for (std::size_t a = 0; a < n; ++a) group = std::max(group, std::abs(composed.u[a] - whole.u[a]));

    std::vector<double> s_r(n);
    for (std::size_t r = 0; r < n; ++r) s_r[r] = static_cast<double>(r);
    const double dt = 0.5;
    auto f0 = [&](double s) { return h[static_cast<std::size_t>(s)]; };
    auto f1 = [&](double s) {
        const auto r = static_cast<std::size_t>(s);
        return h[r] + 2.0 * std::numbers::pi * static_cast<double>(static_cast<int>(r % 5) - 2) / dt;
    };
    const double fs_equiv = (propagator_from_fS(s_r, f0, dt).dense() - propagator_from_spectrum(h, dt).dense()).cwiseAbs().maxCoeff();
    const double aliasing = (propagator_from_fS(s_r, f0, dt).dense() - propagator_from_fS(s_r, f1, dt).dense()).cwiseAbs().maxCoeff();

    const std::vector<double> h4{0.0, 1.3, -0.4, 2.2};
    const Eigen::MatrixXd half = transition_matrix(propagator_from_spectrum(h4, 0.5)).dense();
    const Eigen::MatrixXd full = transition_matrix(propagator_from_spectrum(h4, 1.0)).dense();
    const double counter = (full - half * half).cwiseAbs().maxCoeff();

    const bool pass = unitarity <= 1e-12 && stochastic <= 1e-12 && homogeneity <= 1e-12 && group <= 1e-12 &&
                      fs_equiv <= 1e-13 && aliasing <= 1e-13 && counter > 1e-3;
    char buf[320];
    std::snprintf(buf, sizeof buf,
                  "unitarity %.2g, stochastic %.2g, homogeneity %.2g, group %.2g, f(S) %.2g, aliasing %.2g, N=4 gap %.3g",
                  unitarity, stochastic, homogeneity, group, fs_equiv, aliasing, counter);
    return {pass, buf};
}

Outcome gksl() {
    const std::size_t n = 32;
    const auto ni = static_cast<Eigen::Index>(n);
    const JumpKernel k(2, {0.4, 0.8, 0.0, 1.0, 0.5}, 0.1);
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<double> p0(n);
    double s = 0.0;
    for (auto& v : p0) s += (v = unif(gen));
    for (auto& v : p0) v /= s;
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(ni, ni);
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(ni, ni);
    for (Eigen::Index i = 0; i < ni; ++i) {
        rho(i, i) = p0[static_cast<std::size_t>(i)];
        h(i, i) = std::cos(0.3 * static_cast<double>(i));
    }
    const double t = 2.0;
    const int steps = static_cast<int>(std::ceil((k.total_rate() + 1.0) * t / 0.01));
    const auto res = evolve_gksl(DensityMatrix{rho}, h, ring_rates(k, n), t, steps);
    const auto q = build_qmatrix(k, n);
    const auto p = evolve_master(p0, q, t);
    const auto diag = res.state.diagonal();
    double gap = 0.0;
    for (std::size_t i = 0; i < n; ++i) gap = std::max(gap, std::abs(diag[i] - p[i]));

    // Moment growth from a point mass: d/dt mean = dS m1 and d/dt variance = dS^2 m2 at t = 0.
    const std::size_t big = 128;
    const double ds = 0.5;
    const JumpKernel mk(3, {0.3, 0.0, 0.0, 0.0, 0.7, 0.2, 0.4}, ds);
    const auto mq = build_qmatrix(mk, big);
    const auto mo = kernel_moments(mk);
    std::vector<double> delta(big, 0.0);
    delta[big / 2] = 1.0;
    auto moments = [&](const std::vector<double>& v) {
        double m = 0.0, m2 = 0.0;
        for (std::size_t i = 0; i < big; ++i) {
            const double x = (static_cast<double>(i) - static_cast<double>(big) / 2.0) * ds;
            m += x * v[i];
            m2 += x * x * v[i];
        }
        return std::pair{m, m2 - m * m};
    };
    const double dh = 1e-3;
    const auto [m1a, v1a] = moments(evolve_master(delta, mq, dh));
    const auto [m2a, v2a] = moments(evolve_master(delta, mq, 2 * dh));
    const auto [m0, v0] = moments(delta);
    const double dmean = (-3 * m0 + 4 * m1a - m2a) / (2 * dh);
    const double dvar = (-3 * v0 + 4 * v1a - v2a) / (2 * dh);
    const double mean_rel = std::abs(dmean - ds * mo.m1) / std::abs(ds * mo.m1);
    const double var_rel = std::abs(dvar - ds * ds * mo.m2) / (ds * ds * mo.m2);

    const bool pass = gap <= 1e-6 && res.trace_drift <= 1e-8 && mean_rel <= 1e-6 && var_rel <= 1e-6;
    char buf[200];
    std::snprintf(buf, sizeof buf, "diag gap %.2g, trace drift %.2g, moment rel %.2g/%.2g", gap, res.trace_drift, mean_rel, var_rel);
    return {pass, buf};
}

Outcome esscher() {
    double worst_lambda = 0.0, worst_residual = 0.0;
    bool entropy = true;
    for (double h : {0.01, 0.1, 1.0}) {
        const auto t = esscher_tilt(std::vector<double>{0.5, 0.0, 0.5}, 1, h);
        worst_lambda = std::max(worst_lambda, std::abs(t.lambda_star - 0.5));
        worst_residual = std::max(worst_residual, t.martingale_residual());
        entropy = entropy && tilt_entropy_check(t, 100);
    }
    return {worst_lambda <= 1e-10 && worst_residual <= 1e-12 && entropy,
            fmt("lambda gap %.2g, residual %.2g, entropy check ", worst_lambda, worst_residual) + (entropy ? "ok" : "violated")};
}

Outcome monte_carlo() {
    const auto cfg = reference_config();
    const auto k = reference_kernel(KernelSpec::Family::near_field_exp, cfg);
    const double tau = 0.5;
    const double spectral = price_all_strikes(evolve_value(cfg, k, tau), cfg.s0, std::vector<double>{cfg.s0})[0].price;
    const auto mc = mc_price(cfg.s0, cfg.r, k, tau, [&](double s) { return std::max(s - cfg.s0, 0.0); }, 100000, 20240611);
    const double z = std::abs(mc.price - spectral) / mc.stderr_;
    return {z <= 3.0, fmt("spectral %.6f, mc %.6f, %.2f stderr", spectral, mc.price, z)};
}

Outcome iv_grid() {
    int points = 0, recovered = 0, flagged = 0, silent = 0;
    double worst = 0.0;
    for (double sigma : {0.05, 0.1, 0.2, 0.5, 1.0})
        for (double k : {0.5, 0.8, 1.0, 1.25, 2.0})
            for (double tau : {0.1, 0.5, 2.0}) {
                ++points;
                const double target = bs_price(1.0, k, 0.05, tau, sigma);
                try {
                    const auto res = implied_vol(target, 1.0, k, 0.05, tau);
                    if (!res.converged) {
                        ++flagged;
                        continue;
                    }
                    const double err = std::abs(res.sigma - sigma);
                    worst = std::max(worst, err);
                    if (err <= 1e-8) ++recovered;
                    else ++silent;
                } catch (const Error&) {
                    ++flagged;
                }
            }
    char buf[160];
    std::snprintf(buf, sizeof buf, "%d points: %d recovered (max err %.2g), %d flagged, %d silent", points, recovered, worst,
                  flagged, silent);
    return {points == 75 && silent == 0 && recovered + flagged == points, buf};
}

}  // namespace

int main() {
    criterion(1, "risk-neutral constraint", 1e-3, risk_neutral);
    criterion(2, "martingale pricing", 2.0, martingale);
    criterion(3, "single-FFT identity", 30.0, single_fft);
    criterion(4, "dense-oracle equivalence", 10.0, dense_oracle);
    criterion(5, "diffusive classical limit", 30.0, classical_limit);
    criterion(6, "qualitative smiles", 10.0, smiles);
    criterion(7, "transition matrices", 1.0, transitions);
    criterion(8, "GKSL/master consistency", 20.0, gksl);
    criterion(9, "Esscher tilt", 1.0, esscher);
    criterion(10, "Monte-Carlo cross-check", 60.0, monte_carlo);
    criterion(11, "implied-vol solver", 1.0, iv_grid);
    std::printf("%s: %d of 11 criteria failed\n", failures == 0 ? "ALL PASS" : "FAILURES", failures);
    return failures == 0 ? 0 : 1;
}

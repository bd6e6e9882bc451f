#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "tnsim/config.hpp"
#include "tnsim/corrector.hpp"
#include "tnsim/drivers.hpp"
#include "tnsim/observables.hpp"

namespace tnsim {

/// Deterministic random test field: amplitudes ~ |k|^{-decay} times hashed
/// normals, fixed by the seed.
inline FourierField random_field(int cutoff, std::uint64_t seed, double decay = 1.0) {
    FourierField f(cutoff);
    const RngStream s{seed, 0};
    const auto modes = modes_up_to(cutoff);
    for (std::size_t i = 0; i < modes.size(); ++i)
        f.set(modes[i], std::pow(static_cast<double>(norm_sq(modes[i])), -0.5 * decay) *
                            normal_draw(s, 0, i));
    return f;
}

inline Point random_point(std::uint64_t seed, std::uint64_t i) {
    return {detail::to_unit_open(detail::mix64(seed ^ detail::mix64(2 * i))),
            detail::to_unit_open(detail::mix64(seed ^ detail::mix64(2 * i + 1)))};
}

struct CheckResult {
    std::string name;
    bool pass = false;
    double measured = 0.0;
    double bound = 0.0;
    std::string detail;
};

enum class VerifyLevel { fast, full };

namespace checks {

inline CheckResult bounded(std::string name, double measured, double bound, std::string detail = "") {
    return {std::move(name), measured <= bound, measured, bound, std::move(detail)};
}

/// ||grad f||_{L2} from the exact mode calculus.
inline double grad_norm(const FourierField& f) {
    const VectorField g = gradient(f);
    return std::sqrt(g.u1.l2_norm() * g.u1.l2_norm() + g.u2.l2_norm() * g.u2.l2_norm());
}

inline CheckResult isotropy_identity(const ThetaSequence& theta, std::string name) {
    double worst = 0.0;
    for (int i = 0; i < 100; ++i)
        worst = std::max(worst, isotropy_defect(theta, random_point(11, i)));
    return bounded(std::move(name), worst, 1e-10, "max Frobenius defect over 100 points");
}

inline CheckResult covariance_consistency() {
    double worst = 0.0;
    for (const ThetaSequence& theta :
         {ThetaSequence::indicator(4), ThetaSequence::power(0.5, 4)}) {
        for (int i = 0; i < 20; ++i) {
            const Point x = random_point(23, 2 * i);
            const Point y = random_point(23, 2 * i + 1);
            const Mat2 reduced = covariance(theta, {x.x1 - y.x1, x.x2 - y.x2});
            const Mat2 direct = covariance_double_sum(theta, x, y);
            worst = std::max(worst, (reduced - direct).frobenius());
        }
        const Mat2 at0 = covariance(theta, {0.0, 0.0});
        const double half = 0.5 * theta.l2_norm() * theta.l2_norm();
        worst = std::max(worst, (at0 - Mat2{half, 0.0, 0.0, half}).frobenius());
    }
    return bounded("covariance-consistency", worst, 1e-10,
                   "half-lattice form vs direct double sum, plus the value at r = 0");
}

inline CheckResult biot_savart_roundtrip() {
    const FourierField xi = random_field(8, 31);
    const VectorField u = biot_savart(xi);
    const double curl_err = (curl(u) - xi).l2_norm();
    const double div_err = divergence(u).l2_norm();
    return bounded("biot-savart-roundtrip", std::max(curl_err, div_err), 1e-12,
                   "curl(K*xi) = xi and div(K*xi) = 0");
}

inline CheckResult product_vs_quadrature() {
    const int n = 4;
    const FourierField f = random_field(n, 41);
    const FourierField g = random_field(n, 43);
    const FourierField p = product_truncated(f, g, n);
    const int m = grid_size_for(n);
    double worst = 0.0;
    // independent route: direct pointwise evaluation + discrete quadrature
    for (const LatticeIndex k : {LatticeIndex{1, 0}, {0, -1}, {2, 1}, {-1, 2}, {3, -2}, {0, 3}}) {
        double q = 0.0;
        for (int j1 = 0; j1 < m; ++j1)
            for (int j2 = 0; j2 < m; ++j2) {
                const Point x{static_cast<double>(j1) / m, static_cast<double>(j2) / m};
                q += eval_point(f, x) * eval_point(g, x) * basis_eval(k, x);
            }
        q /= static_cast<double>(m) * m;
        worst = std::max(worst, std::abs(p.at(k) - q));
    }
    return bounded("product-dealiasing", worst, 1e-12,
                   "grid product coefficients vs direct quadrature");
}

inline CheckResult advection_pairing_null() {
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
        const FourierField xi = random_field(8, 100 + i);
        const double nrm = xi.l2_norm();
        worst = std::max(worst, std::abs(inner(nonlinear_term(xi, 8), xi)) / (nrm * nrm * nrm));
    }
    return bounded("advection-pairing-null", worst, 1e-10, "<b_N(xi), xi> = 0, 50 random xi");
}

inline CheckResult transport_pairing_null() {
    double worst = 0.0;
    for (int i = 0; i < 10; ++i) {
        const FourierField xi = random_field(8, 200 + i);
        const double nrm2 = xi.l2_norm() * xi.l2_norm();
        for (const LatticeIndex k : modes_up_to(4))
            worst = std::max(worst, std::abs(inner(transport_term(k, xi, 8), xi)) / nrm2);
    }
    return bounded("transport-pairing-null", worst, 1e-12, "<G_N^k(xi), xi> = 0, all |k| <= 4");
}

/// Enstrophy drift of the dissipative scheme: the noise input
/// eps^2 sum theta_k^2 ||G_N^k(xi)||^2 never exceeds the viscous sink
/// 2 nu ||grad xi||^2. viscous_sign = -1 is a deliberate-fault hook used by
/// the mutation test; anything but +1 must make the check fail.
inline CheckResult ito_drift_inequality(double viscous_sign = 1.0) {
    const int n = 8;
    const double nu = 0.01;
    const ThetaSequence theta = ThetaSequence::indicator(n);
    const double eps = epsilon_scaling(theta, nu);
    const auto modes = modes_up_to(n);
    double worst = -1e300;
    for (int i = 0; i < 50; ++i) {
        const FourierField xi = random_field(n, 300 + i);
        double noise_input = 0.0;
        for (const LatticeIndex k : modes) {
            const double th = theta.coeff(k);
            const double g = transport_term(k, xi, n).l2_norm();
            noise_input += th * th * g * g;
        }
        const double gn = grad_norm(xi);
        const double drift = viscous_sign * (-2.0 * nu * gn * gn) + eps * eps * noise_input;
        worst = std::max(worst, drift / (gn * gn));
    }
    return bounded("ito-drift-inequality", worst, 1e-10,
                   "eps^2 sum theta^2 ||G||^2 - 2 nu ||grad xi||^2 <= 0, normalized");
}

inline CheckResult corrector_route_agreement() {
    const ThetaSequence theta = ThetaSequence::power(0.5, 4);
    const FourierField phi = random_field(4, 51, 1.5);
    const FourierField direct = corrector_apply(theta, phi);
    const FourierField multiplier = project(corrector_apply_convolution(theta, phi), direct.cutoff());
    return bounded("corrector-route-agreement", (direct - multiplier).l2_norm(), 1e-10,
                   "mode-coupling sum vs Fourier multiplier form");
}

inline CheckResult corrector_norm_bound() {
    const double nu = 0.01;
    double worst = 0.0;
    for (int i = 0; i < 5; ++i) {
        const ThetaSequence theta = ThetaSequence::indicator(8);
        const double eps = epsilon_scaling(theta, nu);
        const FourierField phi = random_field(8, 61 + i, 2.0);
        const double hess = 4.0 * pi * pi * sobolev_norm(phi, 2.0);
        const double c = corrector_apply(theta, phi).l2_norm();
        const double l2t = theta.l2_norm() * theta.l2_norm();
        worst = std::max(worst, c / (l2t * hess));
        worst = std::max(worst, (0.5 * eps * eps * c) / (2.0 * nu * hess));
    }
    return bounded("corrector-norm-bound", worst, 1.0 + 1e-12,
                   "||C_N phi|| <= ||theta||^2 ||grad^2 phi|| and (eps^2/2)||C_N phi|| <= 2 nu ||grad^2 phi||");
}

inline CheckResult interpolation_inequality() {
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const FourierField xi = random_field(8, 400 + i);
        const double l2 = xi.l2_norm();
        worst = std::max(worst,
                         l2 * l2 / (sobolev_norm(xi, 0.5) * sobolev_norm(xi, -0.5)));
    }
    return bounded("interpolation-inequality", worst, 1.0 + 1e-12,
                   "||xi||^2 <= ||xi||_{H^d} ||xi||_{H^-d}, 100 random fields");
}

inline CheckResult stratonovich_conservation(int steps, double bound, std::string name) {
    SimConfig cfg;
    cfg.nu = 0.01;
    cfg.N = 8;
    cfg.seed = 99;
    const double dt = 1e-3;
    StepperSettings s = StepperSettings::stratonovich(cfg.nu, cfg.N, dt, theta_for(cfg, cfg.N));
    SimState state(build_initial_field(cfg.initial, cfg.N));
    const RngStream stream{cfg.seed, 0};
    const double e0 = state.xi.l2_norm();
    double worst = 0.0;
    for (int i = 0; i < steps; ++i) {
        state = step_stratonovich(state, s, stream);
        worst = std::max(worst, std::abs(state.xi.l2_norm() - e0) / e0);
    }
    return bounded(std::move(name), worst, bound, "relative enstrophy drift over " +
                                                      std::to_string(steps) + " midpoint steps");
}

inline CheckResult ito_enstrophy_bound(int steps, int seeds, double allowance, std::string name) {
    SimConfig cfg;
    cfg.nu = 0.01;
    cfg.N = 8;
    const double dt = 1e-3;
    double worst = 0.0;
    for (int seed = 0; seed < seeds; ++seed) {
        StepperSettings s = StepperSettings::ito(cfg.nu, cfg.N, dt, theta_for(cfg, cfg.N));
        SimState state(build_initial_field(cfg.initial, cfg.N));
        const RngStream stream{cfg.seed + 1000 + static_cast<std::uint64_t>(seed), 0};
        const double e0 = state.xi.l2_norm();
        for (int i = 0; i < steps; ++i) {
            state = step_ito(state, s, stream);
            worst = std::max(worst, state.xi.l2_norm() / e0 - 1.0);
        }
    }
    return bounded(std::move(name), worst, allowance,
                   "max relative enstrophy overshoot across seeds");
}

inline CheckResult ns_single_mode_decay() {
    const double nu = 0.01, dt = 1e-3;
    const int steps = 100;
    StepperSettings s = StepperSettings::navier_stokes(nu, 4, dt);
    FourierField xi0(4);
    xi0.set({1, 0}, 1.0);
    SimState state(xi0);
    double worst = 0.0;
    double prev = state.xi.l2_norm();
    for (int i = 1; i <= steps; ++i) {
        state = step_navier_stokes(state, s);
        const double exact = std::exp(-4.0 * pi * pi * nu * (dt * i));
        worst = std::max(worst, std::abs(state.xi.at({1, 0}) - exact));
        const double now = state.xi.l2_norm();
        if (now > prev) worst = std::max(worst, now - prev);
        prev = now;
    }
    return bounded("ns-single-mode-decay", worst, 1e-10,
                   "exact heat decay of e_(1,0) and monotone L2 norm");
}

inline CheckResult passive_scalar_conservation() {
    const VectorField u = biot_savart(random_field(6, 71));
    FourierField rho(8);
    rho.set({1, 0}, 1.0);
    rho.set({2, -1}, 0.5);
    const double r0 = rho.l2_norm();
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        rho = step_passive_scalar(rho, u, 1e-3);
        worst = std::max(worst, std::abs(rho.l2_norm() - r0) / r0);
    }
    return bounded("passive-scalar-conservation", worst, 1e-9,
                   "relative L2 drift under frozen divergence-free advection");
}

inline CheckResult noise_divergence_free() {
    const ThetaSequence theta = ThetaSequence::indicator(8);
    const RngStream stream{5, 0};
    double worst = 0.0;
    for (int step = 0; step < 5; ++step) {
        const NoiseIncrement inc = sample_increment(stream, step, theta, 1e-3);
        const VectorField w = assemble_noise_field(theta, 1.0, inc);
        worst = std::max(worst, divergence(w).l2_norm());
    }
    return bounded("noise-divergence-free", worst, 1e-13, "assembled noise field, 5 draws");
}

inline CheckResult rng_reproducibility() {
    const RngStream s{123456789ULL, 7};
    double worst = 0.0;
    for (std::uint64_t step : {0ULL, 1ULL, 999ULL})
        for (std::uint64_t ord : {0ULL, 17ULL, 4096ULL}) {
            const double a = normal_draw(s, step, ord);
            const double b = normal_draw(s, step, ord);
            if (a != b) worst = 1.0;
        }
    const ThetaSequence theta = ThetaSequence::indicator(6);
    const NoiseIncrement i1 = sample_increment(s, 42, theta, 1e-3);
    const NoiseIncrement i2 = sample_increment(s, 42, theta, 1e-3);
    for (std::size_t i = 0; i < i1.values.size(); ++i)
        if (i1.values[i] != i2.values[i]) worst = 1.0;
    return bounded("rng-reproducibility", worst, 0.0, "identical counters give identical bits");
}

inline CheckResult theta_ratio_decreasing() {
    double worst = 0.0;  // positive when the ratio fails to decrease
    for (const bool indicator : {true, false}) {
        double prev = 1e300;
        for (const int n : {4, 8, 16, 32, 64}) {
            const ThetaSequence theta =
                indicator ? ThetaSequence::indicator(n) : ThetaSequence::power(1.0, n);
            const double ratio = theta.linf_norm() / theta.l2_norm();
            worst = std::max(worst, ratio - prev);
            prev = ratio;
        }
    }
    return bounded("theta-ratio-decreasing", worst, 0.0,
                   "linf/l2 ratio falls along N = 4..64 for both families");
}

inline CheckResult ito_trajectory_budget() {
    SimConfig cfg;
    cfg.nu = 0.01;
    cfg.N = 8;
    const double dt = 1e-3;
    const int steps = 1000;
    double worst = 0.0;
    for (int seed = 0; seed < 20; ++seed) {
        StepperSettings s = StepperSettings::ito(cfg.nu, cfg.N, dt, theta_for(cfg, cfg.N));
        SimState state(build_initial_field(cfg.initial, cfg.N));
        const RngStream stream{77 + static_cast<std::uint64_t>(seed), 0};
        const double e0 = state.xi.l2_norm();
        for (int i = 0; i < steps; ++i) {
            state = step_ito(state, s, stream);
            worst = std::max(worst, (state.xi.l2_norm() - e0) / std::sqrt(dt));
        }
    }
    return bounded("ito-trajectory-budget", worst, 10.0,
                   "||xi_t|| <= ||xi_0|| + 10 sqrt(dt) along full trajectories");
}

inline CheckResult corrector_convergence() {
    const LatticeIndex j{1, 0};
    const double nu = 0.01;
    double prev = 1e300;
    double worst_monotone = 0.0;
    double first = 0.0, last = 0.0, worst_oracle = 0.0;
    for (const int n : {4, 8, 16, 32, 64}) {
        const ThetaSequence theta = ThetaSequence::indicator(n);
        const double eps = epsilon_scaling(theta, nu);
        FourierField ej(n);
        ej.set(j, 1.0);
        FourierField diff = corrector_apply(theta, ej);
        diff *= 0.5 * eps * eps;
        diff.add(j, 4.0 * pi * pi * static_cast<double>(norm_sq(j)) * nu);
        const double err = diff.l2_norm();
        // lattice tail oracle: err = 4 pi^2 (eps^2/2) sum_{|k-j|>N} theta_k^2 (k_perp.j)^2/|k|^2
        double tail = 0.0;
        for (const LatticeIndex k : modes_up_to(n)) {
            if (norm_sq(k - j) <= static_cast<long long>(n) * n) continue;
            const double th = theta.coeff(k);
            const double pr = static_cast<double>(dot(perp(k), j));
            tail += th * th * pr * pr / static_cast<double>(norm_sq(k));
        }
        worst_oracle = std::max(worst_oracle,
                                std::abs(err - 4.0 * pi * pi * 0.5 * eps * eps * tail));
        if (n == 4) first = err;
        last = err;
        worst_monotone = std::max(worst_monotone, err - prev);
        prev = err;
    }
    double worst = worst_monotone > 0.0 ? 1.0 : 0.0;
    if (last > 0.1 * first) worst = std::max(worst, last / (0.1 * first));
    worst = std::max(worst, worst_oracle / 1e-10);
    return bounded("corrector-convergence", worst, 1.0,
                   "misfit vs nu Delta strictly decreasing over N = 4..64, final <= 0.1 x initial, "
                   "matches the tail oracle");
}

inline CheckResult corrector_tail_decreasing() {
    double worst = 0.0;
    for (const double alpha : {0.0, 0.5, 1.0}) {
        double prev = 1e300;
        for (const int n : {8, 16, 32, 64}) {
            const double tail = corrector_tail(ThetaSequence::power(alpha, n), {1, 0});
            worst = std::max(worst, tail - prev);
            prev = tail;
        }
    }
    return bounded("corrector-tail-decreasing", worst, 0.0,
                   "tail diagnostic falls along N for alpha in {0, 0.5, 1}");
}

inline FourierField reflect(const FourierField& f) {
    const int n = f.cutoff();
    FourierField out(n);
    const long long n2 = static_cast<long long>(n) * n;
    for (int k1 = -n; k1 <= n; ++k1)
        for (int k2 = -n; k2 <= n; ++k2) {
            const LatticeIndex k{k1, k2};
            if (is_zero(k) || norm_sq(k) > n2) continue;
            const double a = f.at(k);
            if (a != 0.0) out.set(k, in_positive_half(k) ? a : -a);
        }
    return out;
}

/// Point reflection x -> -x is an exact symmetry of the advection machinery:
/// b_N(R xi) = R b_N(xi) and Pi_N((Rv).grad R xi) = R Pi_N(v.grad xi) with
/// (Rv)_i = -reflect(v_i). Pins every sign convention at once.
inline CheckResult reflection_equivariance() {
    const int n = 6;
    const FourierField xi = random_field(n, 81);
    const FourierField xr = reflect(xi);
    double worst = (nonlinear_term(xr, n) - reflect(nonlinear_term(xi, n))).l2_norm();

    VectorField v = biot_savart(random_field(n, 83));
    VectorField vr(reflect(v.u1), reflect(v.u2));
    vr.u1 *= -1.0;
    vr.u2 *= -1.0;
    worst = std::max(worst,
                     (transported_by(vr, xr, n) - reflect(transported_by(v, xi, n))).l2_norm());

    // the passive scalar stepper is linear: negation commutes outright
    FourierField rho(n);
    rho.set({1, 0}, 1.0);
    rho.set({0, 2}, -0.25);
    FourierField neg = rho;
    neg *= -1.0;
    FourierField stepped = step_passive_scalar(rho, v, 1e-3);
    stepped *= -1.0;
    worst = std::max(worst, (step_passive_scalar(neg, v, 1e-3) - stepped).l2_norm());
    return bounded("reflection-equivariance", worst, 1e-11,
                   "advection and transport commute with x -> -x; scalar stepper is odd");
}

inline CheckResult weak_consistency_midpoint_vs_corrector() {
    const int n = 4;
    const double nu = 0.01, dt = 1e-3, T = 0.25;
    const int steps = static_cast<int>(T / dt);
    const int samples = 500;
    const ThetaSequence theta = ThetaSequence::indicator(n);
    const double eps = epsilon_scaling(theta, nu);

    SimConfig cfg;
    cfg.initial.preset = InitialDataSpec::Preset::two_mode;
    const FourierField xi0 = build_initial_field(cfg.initial, n);

    // Ito form of the Stratonovich system: corrector (eps^2/2) C_N applied as
    // an exact per-mode factor (C_N is diagonal on the basis).
    HeatPropagator corr;
    corr.modes = modes_up_to(n);
    corr.factor.resize(corr.modes.size());
    for (std::size_t i = 0; i < corr.modes.size(); ++i)
        corr.factor[i] =
            std::exp(0.5 * eps * eps * corrector_eigenvalue(theta, corr.modes[i]) * dt);

    StepperSettings strat = StepperSettings::stratonovich(nu, n, dt, theta);

    const LatticeIndex probe{1, 0};
    double sum_diff = 0.0, sum_diff2 = 0.0;
    for (int m = 0; m < samples; ++m) {
        const RngStream stream{424242, static_cast<std::uint64_t>(m)};
        SimState a(xi0);  // midpoint path
        FourierField b = xi0;  // Ito-with-corrector path, common noise
        for (int i = 0; i < steps; ++i) {
            const NoiseIncrement inc =
                sample_increment(stream, static_cast<std::uint64_t>(i), theta, dt);
            const VectorField dw = assemble_noise_field(theta, eps, inc);
            FourierField drift = nonlinear_term(b, n);
            drift *= -dt;
            b += drift;
            b += transported_by(dw, b, n);
            corr.apply(b);
            a = step_stratonovich(a, strat, stream);
        }
        const double d = a.xi.at(probe) - b.at(probe);
        sum_diff += d;
        sum_diff2 += d * d;
    }
    const double mean = sum_diff / samples;
    const double var = std::max(0.0, sum_diff2 / samples - mean * mean);
    const double se = std::sqrt(var / samples);
    // 4 sigma of the common-noise difference plus an O(dt) bias allowance
    return bounded("weak-consistency-midpoint-vs-corrector", std::abs(mean), 4.0 * se + 5.0 * dt,
                   "mean <xi_T, e_(1,0)> gap, midpoint vs Ito+corrector, 500 common-noise paths");
}

}  // namespace checks

inline std::vector<CheckResult> run_verification(VerifyLevel level) {
    using namespace checks;
    std::vector<CheckResult> out;
    out.push_back(isotropy_identity(ThetaSequence::indicator(8), "isotropy-identity-indicator"));
    out.push_back(isotropy_identity(ThetaSequence::power(1.0, 6), "isotropy-identity-power"));
    out.push_back(covariance_consistency());
    out.push_back(biot_savart_roundtrip());
    out.push_back(product_vs_quadrature());
    out.push_back(advection_pairing_null());
    out.push_back(transport_pairing_null());
    out.push_back(ito_drift_inequality());
    out.push_back(corrector_route_agreement());
    out.push_back(corrector_norm_bound());
    out.push_back(interpolation_inequality());
    out.push_back(stratonovich_conservation(200, 1e-9, "stratonovich-conservation"));
    out.push_back(ito_enstrophy_bound(200, 2, 1e-3, "ito-enstrophy-bound"));
    out.push_back(ns_single_mode_decay());
    out.push_back(passive_scalar_conservation());
    out.push_back(noise_divergence_free());
    out.push_back(rng_reproducibility());
    out.push_back(theta_ratio_decreasing());
    if (level == VerifyLevel::full) {
        out.push_back(stratonovich_conservation(10000, 1e-6, "stratonovich-conservation-long"));
        out.push_back(ito_enstrophy_bound(1000, 5, 1e-3, "ito-enstrophy-bound-long"));
        out.push_back(ito_trajectory_budget());
        out.push_back(corrector_convergence());
        out.push_back(corrector_tail_decreasing());
        out.push_back(reflection_equivariance());
        out.push_back(weak_consistency_midpoint_vs_corrector());
    }
    return out;
}

/// Run the invariant suite, print one line per check, never short-circuit.
inline int cmd_verify(VerifyLevel level) {
    const std::vector<CheckResult> results = run_verification(level);
    int failures = 0;
    for (const CheckResult& r : results) {
        if (!r.pass) ++failures;
        std::printf("[%s] %-42s measured %.3e (bound %.3e)%s%s\n", r.pass ? "PASS" : "FAIL",
                    r.name.c_str(), r.measured, r.bound, r.detail.empty() ? "" : " - ",
                    r.detail.c_str());
    }
    std::printf("verification: %zu/%zu checks passed (level %s)\n", results.size() - failures,
                results.size(), level == VerifyLevel::fast ? "fast" : "full");
    return failures == 0 ? exit_ok : exit_verification_failure;
}

}  // namespace tnsim

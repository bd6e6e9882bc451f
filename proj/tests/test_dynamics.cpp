#include <catch2/catch.hpp>

#include <algorithm>
#include <cmath>

#include "tnsim/dynamics.hpp"
#include "tnsim/verify.hpp"

#include "oracle_helpers.hpp"

using namespace tnsim;

namespace {

// brute-force Galerkin advection: same diagonal operators, product through
// the O(N^4) convolution instead of the grid
FourierField nonlinear_term_oracle(const FourierField& xi, int n) {
    const FourierField xin = project(xi, n);
    const VectorField u = biot_savart(xin);
    const VectorField g = gradient(xin);
    FourierField out = oracle::product_convolution(u.u1, g.u1, n);
    out += oracle::product_convolution(u.u2, g.u2, n);
    return out;
}

}  // namespace

TEST_CASE("Galerkin advection term", "[dynamics]") {
    SECTION("pairs to zero against the state, 50 random fields at N=8") {
        double worst = 0.0;
        for (int i = 0; i < 50; ++i) {
            const FourierField xi = random_field(8, 500 + i);
            const double nrm = xi.l2_norm();
            worst = std::max(worst, std::abs(inner(nonlinear_term(xi, 8), xi)) / (nrm * nrm * nrm));
        }
        REQUIRE(worst <= 1e-10);
    }
    SECTION("single modes are steady Euler states") {
        for (const LatticeIndex k : {LatticeIndex{1, 0}, {2, -1}, {0, -3}}) {
            FourierField xi(4);
            xi.set(k, 1.7);
            REQUIRE(nonlinear_term(xi, 4).l2_norm() <= 1e-12);
        }
    }
    SECTION("matches the mode-coupling oracle at N=4") {
        for (int i = 0; i < 3; ++i) {
            const FourierField xi = random_field(4, 600 + i);
            const FourierField fast = nonlinear_term(xi, 4);
            const FourierField slow = nonlinear_term_oracle(xi, 4);
            REQUIRE((fast - slow).l2_norm() <= 1e-11);
        }
    }
}

TEST_CASE("transport vector fields", "[dynamics]") {
    SECTION("pair to zero against the state for all |k| <= 4") {
        const FourierField xi = random_field(8, 700);
        const double nrm2 = xi.l2_norm() * xi.l2_norm();
        for (const LatticeIndex k : modes_up_to(4))
            REQUIRE(std::abs(inner(transport_term(k, xi, 8), xi)) / nrm2 <= 1e-12);
    }
    SECTION("vanish identically once |k| > 2N") {
        const int n = 4;
        const FourierField xi = random_field(n, 701);
        REQUIRE(transport_term({2 * n + 1, 0}, xi, n).l2_norm() == 0.0);
        REQUIRE(transport_term({0, -(2 * n + 1)}, xi, n).l2_norm() == 0.0);
    }
    SECTION("projection only shrinks the transported field") {
        const int n = 6;
        const FourierField xi = random_field(n, 702);
        for (const LatticeIndex k : {LatticeIndex{1, 0}, {3, 2}, {-2, 4}}) {
            const double inv = 1.0 / norm(k);
            const FourierField d =
                directional_derivative(perp(k).k1 * inv, perp(k).k2 * inv, project(xi, n));
            const double full = multiply_by_basis(d, k, 2 * n + 2).l2_norm();
            REQUIRE(transport_term(k, xi, n).l2_norm() <= full * (1.0 + 1e-12));
        }
    }
    SECTION("k = 0 rejected") {
        REQUIRE_THROWS_AS(transport_term({0, 0}, random_field(4, 703), 4),
                          std::invalid_argument);
    }
}

TEST_CASE("dissipative Euler-Maruyama stepper", "[dynamics]") {
    const double nu = 0.01;
    const int n = 8;
    const ThetaSequence theta = ThetaSequence::indicator(n);
    const double eps = epsilon_scaling(theta, nu);

    SECTION("continuous-time enstrophy drift is nonpositive on random states") {
        const auto modes = modes_up_to(n);
        for (int i = 0; i < 10; ++i) {
            const FourierField xi = random_field(n, 800 + i);
            double noise_input = 0.0;
            for (const LatticeIndex k : modes) {
                const double g = transport_term(k, xi, n).l2_norm();
                noise_input += theta.coeff(k) * theta.coeff(k) * g * g;
            }
            const VectorField grad = gradient(xi);
            const double gn2 = grad.u1.l2_norm() * grad.u1.l2_norm() +
                               grad.u2.l2_norm() * grad.u2.l2_norm();
            REQUIRE(eps * eps * noise_input - 2.0 * nu * gn2 <= 1e-10 * gn2);
        }
    }
    SECTION("zero noise single mode reproduces exact heat decay in one step") {
        StepperSettings s = StepperSettings::ito(nu, n, 1e-3, theta, /*noise_scale=*/0.0);
        FourierField xi(n);
        xi.set({1, 0}, 0.8);
        SimState state(xi);
        state = step_ito(state, s, RngStream{1, 0});
        REQUIRE(state.xi.at({1, 0}) ==
                Approx(0.8 * std::exp(-4.0 * pi * pi * nu * 1e-3)).margin(1e-15));
        REQUIRE(state.t == Approx(1e-3));
        REQUIRE(state.step == 1);
    }
    SECTION("pathwise enstrophy budget along full trajectories") {
        const double dt = 1e-3;
        SimConfig cfg;  // two_mode initial data
        for (int seed = 0; seed < 5; ++seed) {
            StepperSettings s = StepperSettings::ito(nu, n, dt, theta);
            SimState state(build_initial_field(cfg.initial, n));
            const RngStream stream{9000 + static_cast<std::uint64_t>(seed), 0};
            const double e0 = state.xi.l2_norm();
            for (int i = 0; i < 1000; ++i) {
                state = step_ito(state, s, stream);
                REQUIRE(state.xi.l2_norm() <= e0 + 10.0 * std::sqrt(dt));
            }
        }
    }
}

TEST_CASE("conservative midpoint stepper", "[dynamics]") {
    const double nu = 0.01;
    const int n = 8;
    const ThetaSequence theta = ThetaSequence::indicator(n);

    SECTION("enstrophy conserved to solver tolerance each step") {
        StepperSettings s = StepperSettings::stratonovich(nu, n, 1e-3, theta);
        SimConfig cfg;
        for (const std::uint64_t seed : {11ULL, 12ULL}) {
            SimState state(build_initial_field(cfg.initial, n));
            const RngStream stream{seed, 0};
            const double e0 = state.xi.l2_norm();
            double prev = e0;
            for (int i = 0; i < 300; ++i) {
                state = step_stratonovich(state, s, stream);
                const double now = state.xi.l2_norm();
                REQUIRE(std::abs(now - prev) <= 1e-10 * e0);
                prev = now;
            }
            REQUIRE(std::abs(prev - e0) <= 1e-8 * e0);
        }
    }
    SECTION("zero increments leave single modes fixed") {
        StepperSettings s = StepperSettings::stratonovich(nu, n, 1e-3, theta, 0.0);
        FourierField xi(n);
        xi.set({2, 1}, 1.3);
        SimState state(xi);
        state = step_stratonovich(state, s, RngStream{1, 0});
        REQUIRE((state.xi - xi).l2_norm() == 0.0);
    }
    SECTION("oversized steps fall back to bridged half steps and still conserve") {
        const int nn = 4;
        const ThetaSequence th = ThetaSequence::indicator(nn);
        StepperSettings s = StepperSettings::stratonovich(1.0, nn, 0.5, th);
        FourierField xi(nn);
        xi.set({1, 0}, 1.0);
        xi.set({1, 1}, 1.0);
        SimState state(xi);
        StepStats stats;
        state = step_stratonovich(state, s, RngStream{21, 0}, &stats);
        REQUIRE(stats.rejected_steps > 0);
        REQUIRE(state.xi.l2_norm() == Approx(xi.l2_norm()).epsilon(1e-9));
    }
    SECTION("weak consistency with the Ito-corrector formulation") {
        // Common-noise comparison of <xi_T, e_(1,0)> between the midpoint
        // scheme and the Ito scheme carrying the exact per-mode corrector
        // factor; the Ito-Stratonovich conversion is the oracle here.
        const int nn = 4;
        const double dt = 1e-3, T = 0.25;
        const int steps = static_cast<int>(T / dt);
        const int samples = 100;
        const ThetaSequence th = ThetaSequence::indicator(nn);
        const double eps = epsilon_scaling(th, nu);
        SimConfig cfg;
        const FourierField xi0 = build_initial_field(cfg.initial, nn);

        HeatPropagator corr;
        corr.modes = modes_up_to(nn);
        corr.factor.resize(corr.modes.size());
        for (std::size_t i = 0; i < corr.modes.size(); ++i)
            corr.factor[i] =
                std::exp(0.5 * eps * eps * corrector_eigenvalue(th, corr.modes[i]) * dt);

        StepperSettings strat = StepperSettings::stratonovich(nu, nn, dt, th);
        double sum = 0.0, sum2 = 0.0;
        for (int m = 0; m < samples; ++m) {
            const RngStream stream{606060, static_cast<std::uint64_t>(m)};
            SimState a(xi0);
            FourierField b = xi0;
            for (int i = 0; i < steps; ++i) {
                const NoiseIncrement inc =
                    sample_increment(stream, static_cast<std::uint64_t>(i), th, dt);
                const VectorField dw = assemble_noise_field(th, eps, inc);
                FourierField drift = nonlinear_term(b, nn);
                drift *= -dt;
                b += drift;
                b += transported_by(dw, b, nn);
                corr.apply(b);
                a = step_stratonovich(a, strat, stream);
            }
            const double d = a.xi.at({1, 0}) - b.at({1, 0});
            sum += d;
            sum2 += d * d;
        }
        const double mean = sum / samples;
        const double se = std::sqrt(std::max(0.0, sum2 / samples - mean * mean) / samples);
        REQUIRE(std::abs(mean) <= 4.0 * se + 5.0 * dt);
    }
}

TEST_CASE("deterministic reference stepper", "[dynamics]") {
    const double nu = 0.01;
    SECTION("single-mode trajectory matches the closed form at t = 1") {
        const double dt = 1e-3;
        StepperSettings s = StepperSettings::navier_stokes(nu, 4, dt);
        FourierField xi(4);
        xi.set({1, 0}, 1.0);
        SimState state(xi);
        for (int i = 0; i < 1000; ++i) state = step_navier_stokes(state, s);
        REQUIRE(std::abs(state.xi.at({1, 0}) - std::exp(-4.0 * pi * pi * nu)) <= 1e-8);
    }
    SECTION("enstrophy and energy envelopes along a two-mode trajectory") {
        const double dt = 1e-3;
        const int n = 8;
        StepperSettings s = StepperSettings::navier_stokes(nu, n, dt);
        SimConfig cfg;
        SimState state(build_initial_field(cfg.initial, n));
        const double i0 = enstrophy(state.xi);
        const double e0 = energy(state.xi);
        const double alpha = mixing_rate(nu);
        double prev_i = i0, prev_e = e0;
        for (int i = 1; i <= 500; ++i) {
            state = step_navier_stokes(state, s);
            const double envelope = std::exp(-alpha * state.t);
            REQUIRE(enstrophy(state.xi) <= i0 * envelope * (1.0 + 1e-9));
            REQUIRE(energy(state.xi) <= e0 * envelope * (1.0 + 1e-9));
            REQUIRE(enstrophy(state.xi) <= prev_i);
            REQUIRE(energy(state.xi) <= prev_e);
            prev_i = enstrophy(state.xi);
            prev_e = energy(state.xi);
        }
    }
    SECTION("euler variant coincides with the zero-noise dissipative stepper") {
        const int n = 6;
        StepperSettings ns = StepperSettings::navier_stokes(nu, n, 1e-3, /*rk2=*/false);
        StepperSettings ito = StepperSettings::ito(nu, n, 1e-3, ThetaSequence::indicator(n), 0.0);
        SimState a(random_field(n, 909));
        SimState b = a;
        for (int i = 0; i < 20; ++i) {
            a = step_navier_stokes(a, ns);
            b = step_ito(b, ito, RngStream{1, 1});
            REQUIRE((a.xi - b.xi).l2_norm() <= 1e-12);
        }
    }
    SECTION("blow-up raises the sentinel instead of emitting garbage") {
        StepperSettings s = StepperSettings::navier_stokes(1e-12, 4, 1e-3, /*rk2=*/false);
        FourierField xi(4);
        xi.set({1, 0}, 1e200);
        xi.set({1, 1}, 1e200);
        SimState state(xi);
        REQUIRE_THROWS_AS(
            [&] {
                for (int i = 0; i < 10; ++i) state = step_navier_stokes(state, s);
            }(),
            BlowupError);
    }
}

TEST_CASE("passive scalar stepper", "[dynamics]") {
    SECTION("zero velocity leaves the scalar untouched") {
        FourierField rho(4);
        rho.set({1, 0}, 1.0);
        const FourierField next = step_passive_scalar(rho, VectorField(4), 1e-2);
        REQUIRE((next - rho).l2_norm() == 0.0);
    }
    SECTION("L2 norm conserved under frozen divergence-free advection") {
        const VectorField u = biot_savart(random_field(6, 1001));
        FourierField rho(8);
        rho.set({1, 0}, 1.0);
        rho.set({3, -2}, 0.4);
        const double r0 = rho.l2_norm();
        for (int i = 0; i < 200; ++i) {
            rho = step_passive_scalar(rho, u, 1e-3);
            REQUIRE(std::abs(rho.l2_norm() - r0) <= 1e-10 * r0);
        }
    }
    SECTION("non-divergence-free velocity rejected") {
        VectorField u(2);
        u.u1.set({1, 0}, 1.0);  // gradient-like, div != 0
        FourierField rho(2);
        rho.set({1, 0}, 1.0);
        REQUIRE_THROWS_AS(step_passive_scalar(rho, u, 1e-3), std::invalid_argument);
    }
    SECTION("shear advection matches the characteristics solution") {
        // rho_0 = e_(1,0) advected by the frozen field sigma_(0,1)
        const double dt = 1e-4, T = 0.1;
        const VectorField u = sigma_field({0, 1});
        FourierField rho(16);
        rho.set({1, 0}, 1.0);
        const int steps = static_cast<int>(T / dt);
        for (int i = 0; i < steps; ++i) rho = step_passive_scalar(rho, u, dt);
        const int m = 64;
        const GridBuffer values = to_grid(rho, m);
        double err2 = 0.0;
        for (int j1 = 0; j1 < m; ++j1)
            for (int j2 = 0; j2 < m; ++j2) {
                const double exact = oracle::sheared_mode_solution(
                    {static_cast<double>(j1) / m, static_cast<double>(j2) / m}, T);
                const double d = values.at(j1, j2) - exact;
                err2 += d * d;
            }
        REQUIRE(std::sqrt(err2 / (m * m)) <= 1e-3);
    }
}

TEST_CASE("stepper equivariance under point reflection", "[dynamics]") {
    const CheckResult r = checks::reflection_equivariance();
    INFO(r.detail);
    REQUIRE(r.pass);
}

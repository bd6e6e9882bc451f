#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tnsim/noise.hpp"
#include "tnsim/rng.hpp"
#include "tnsim/spectral.hpp"
#include "tnsim/theta.hpp"

namespace tnsim {

/// A trajectory produced a non-finite coefficient. The harness records the
/// sample as failed instead of crashing the ensemble.
struct BlowupError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class SchemeKind { ito_dissipative, stratonovich_conservative, deterministic_ns };

inline std::string to_string(SchemeKind s) {
    switch (s) {
        case SchemeKind::ito_dissipative: return "ito_dissipative";
        case SchemeKind::stratonovich_conservative: return "stratonovich_conservative";
        case SchemeKind::deterministic_ns: return "deterministic_ns";
    }
    return "?";
}

/// b_N(xi) = Pi_N( (K * Pi_N xi) . grad(Pi_N xi) ), the Galerkin advection.
inline FourierField nonlinear_term(const FourierField& xi, int n) {
    const FourierField xin = project(xi, n);
    const VectorField u = biot_savart(xin);
    const VectorField g = gradient(xin);
    const int m = grid_size_for(n);
    GridBuffer p(m);
    {
        const GridBuffer u1 = to_grid(u.u1, m), u2 = to_grid(u.u2, m);
        const GridBuffer g1 = to_grid(g.u1, m), g2 = to_grid(g.u2, m);
        for (std::size_t i = 0; i < p.values().size(); ++i)
            p.values()[i] = u1.values()[i] * g1.values()[i] + u2.values()[i] * g2.values()[i];
    }
    return from_grid(p, n);
}

/// G_N^k(xi) = Pi_N( sigma_k . grad(Pi_N xi) ); identically zero once |k| > 2N.
inline FourierField transport_term(LatticeIndex k, const FourierField& xi, int n) {
    if (is_zero(k)) throw std::invalid_argument("transport_term: k = 0");
    const double inv = 1.0 / norm(k);
    const FourierField d =
        directional_derivative(perp(k).k1 * inv, perp(k).k2 * inv, project(xi, n));
    return multiply_by_basis(d, k, n);
}

/// Pi_N( v . grad(Pi_N xi) ) for an arbitrary divergence-free spectral field v,
/// one alias-free pseudo-spectral pass regardless of how many modes v carries.
inline FourierField transported_by(const VectorField& v, const FourierField& xi, int n) {
    const int m = grid_size_for(std::max(n, v.cutoff()));
    const VectorField g = gradient(project(xi, n));
    GridBuffer p(m);
    {
        const GridBuffer v1 = to_grid(v.u1, m), v2 = to_grid(v.u2, m);
        const GridBuffer g1 = to_grid(g.u1, m), g2 = to_grid(g.u2, m);
        for (std::size_t i = 0; i < p.values().size(); ++i)
            p.values()[i] = v1.values()[i] * g1.values()[i] + v2.values()[i] * g2.values()[i];
    }
    return from_grid(p, n);
}

/// Exact per-mode heat semigroup exp(nu dt Delta): factor e^{-4 pi^2 |k|^2 nu dt}.
struct HeatPropagator {
    std::vector<LatticeIndex> modes;
    std::vector<double> factor;

    static HeatPropagator make(int cutoff, double nu_dt) {
        HeatPropagator h;
        h.modes = modes_up_to(cutoff);
        h.factor.resize(h.modes.size());
        for (std::size_t i = 0; i < h.modes.size(); ++i)
            h.factor[i] = std::exp(-4.0 * pi * pi * static_cast<double>(norm_sq(h.modes[i])) * nu_dt);
        return h;
    }

    void apply(FourierField& f) const {
        for (std::size_t i = 0; i < modes.size(); ++i)
            f.set(modes[i], f.at(modes[i]) * factor[i]);
    }
};

struct StepperSettings {
    SchemeKind scheme = SchemeKind::deterministic_ns;
    double nu = 0.0;
    int cutoff = 0;
    double dt = 0.0;
    std::optional<ThetaSequence> theta;
    double eps = 0.0;         // 2 sqrt(nu) / ||theta||
    double noise_scale = 1.0; // diagnostic knob; 0 silences the noise entirely
    bool ns_rk2 = true;
    int midpoint_max_iter = 50;
    double midpoint_tol = 1e-12;
    HeatPropagator heat;      // only used by the viscous schemes

    static StepperSettings ito(double nu, int cutoff, double dt, ThetaSequence theta,
                               double noise_scale = 1.0) {
        StepperSettings s;
        s.scheme = SchemeKind::ito_dissipative;
        s.nu = nu;
        s.cutoff = cutoff;
        s.dt = dt;
        s.eps = epsilon_scaling(theta, nu);
        s.theta = std::move(theta);
        s.noise_scale = noise_scale;
        s.heat = HeatPropagator::make(cutoff, nu * dt);
        return s;
    }

    static StepperSettings stratonovich(double nu, int cutoff, double dt, ThetaSequence theta,
                                        double noise_scale = 1.0) {
        StepperSettings s;
        s.scheme = SchemeKind::stratonovich_conservative;
        s.nu = nu;
        s.cutoff = cutoff;
        s.dt = dt;
        s.eps = epsilon_scaling(theta, nu);
        s.theta = std::move(theta);
        s.noise_scale = noise_scale;
        return s;
    }

    static StepperSettings navier_stokes(double nu, int cutoff, double dt, bool rk2 = true) {
        StepperSettings s;
        s.scheme = SchemeKind::deterministic_ns;
        s.nu = nu;
        s.cutoff = cutoff;
        s.dt = dt;
        s.ns_rk2 = rk2;
        s.heat = HeatPropagator::make(cutoff, nu * dt);
        return s;
    }
};

struct SimState {
    double t = 0.0;
    std::uint64_t step = 0;
    FourierField xi;
    std::optional<FourierField> rho;

    explicit SimState(FourierField x) : xi(std::move(x)) {}
    SimState(double time, std::uint64_t s, FourierField x, std::optional<FourierField> r)
        : t(time), step(s), xi(std::move(x)), rho(std::move(r)) {}
};

struct StepStats {
    long midpoint_iterations = 0;
    long rejected_steps = 0;
};

namespace detail {

inline void check_finite(const FourierField& f, double t) {
    if (!f.all_finite())
        throw BlowupError("non-finite coefficient at t = " + std::to_string(t));
}

/// One implicit-midpoint solve xi+ = xi + dt F((xi + xi+)/2) with
/// F(eta) = -b_N(eta) + (1/dt) Pi_N(dW . grad eta). Exactly enstrophy
/// preserving at the fixed point: both parts of F pair to zero against the
/// midpoint state. A step whose iteration stalls is split into two bridged
/// half steps (fresh normals from lane = node; heap numbering keeps every
/// draw addressable).
inline FourierField midpoint_advance(const FourierField& xi, const std::vector<double>& incs,
                                     double dt, const StepperSettings& s, const RngStream& stream,
                                     std::uint64_t step, std::uint64_t node, StepStats* stats) {
    const int n = s.cutoff;
    const ThetaSequence& theta = *s.theta;
    NoiseIncrement inc{dt, theta.cutoff(), incs};
    const VectorField dw = assemble_noise_field(theta, s.eps * s.noise_scale, inc);
    const int vc = std::max(n, dw.cutoff());

    FourierField next = xi;
    for (int iter = 1; iter <= s.midpoint_max_iter; ++iter) {
        FourierField mid = xi;
        mid += next;
        mid *= 0.5;
        // combined advecting field dt*(-u) + dW, one transport pass for drift + noise
        VectorField adv = project(biot_savart(project(mid, n)), vc);
        adv.u1 *= -dt;
        adv.u2 *= -dt;
        adv.u1 += project(dw.u1, vc);
        adv.u2 += project(dw.u2, vc);
        FourierField candidate = xi;
        candidate += transported_by(adv, mid, n);
        candidate -= next;
        const double res = candidate.l2_norm();
        candidate += next;
        next = std::move(candidate);
        if (stats) stats->midpoint_iterations += 1;
        if (res <= s.midpoint_tol) return next;
    }

    // No convergence: Brownian-bridge split into two half steps.
    if (stats) stats->rejected_steps += 1;
    if (node >= (1ULL << 16))
        throw BlowupError("midpoint iteration failed at minimum substep, t-step " +
                          std::to_string(step));
    std::vector<double> first(incs.size()), second(incs.size());
    const double half_sd = 0.5 * std::sqrt(dt);
    for (std::size_t i = 0; i < incs.size(); ++i) {
        const double z = normal_draw(stream, step, i, node);
        first[i] = 0.5 * incs[i] + half_sd * z;
        second[i] = incs[i] - first[i];
    }
    const FourierField mid_state =
        midpoint_advance(xi, first, 0.5 * dt, s, stream, step, 2 * node, stats);
    return midpoint_advance(mid_state, second, 0.5 * dt, s, stream, step, 2 * node + 1, stats);
}

}  // namespace detail

/// Implicit-midpoint step for d rho + u . grad rho = 0 with u frozen over the
/// step; ||rho|| is conserved to solver tolerance.
inline FourierField step_passive_scalar(const FourierField& rho, const VectorField& u, double dt,
                                        int max_iter = 50, double tol = 1e-12, int depth = 0) {
    if (!(dt > 0.0)) throw std::invalid_argument("step_passive_scalar: dt must be positive");
    {
        const FourierField div = divergence(u);
        if (div.l2_norm() > 1e-8 * std::max(1.0, u.u1.l2_norm() + u.u2.l2_norm()))
            throw std::invalid_argument("step_passive_scalar: velocity is not divergence-free");
    }
    const int n = rho.cutoff();
    FourierField next = rho;
    for (int iter = 1; iter <= max_iter; ++iter) {
        FourierField mid = rho;
        mid += next;
        mid *= 0.5;
        FourierField candidate = transported_by(u, mid, n);
        candidate *= -dt;
        candidate += rho;
        FourierField delta = candidate;
        delta -= next;
        next = std::move(candidate);
        if (delta.l2_norm() <= tol) return next;
    }
    if (depth >= 12)
        throw BlowupError("passive scalar midpoint failed at minimum substep");
    const FourierField half = step_passive_scalar(rho, u, 0.5 * dt, max_iter, tol, depth + 1);
    return step_passive_scalar(half, u, 0.5 * dt, max_iter, tol, depth + 1);
}

/// Euler-Maruyama step for the dissipative Galerkin system
///   d xi = [-b_N(xi) + nu Delta xi] dt + eps sum theta_k G_N^k(xi) dW^k,
/// with the stiff viscous part applied exactly per mode and the whole noise
/// sum evaluated as one transported field.
inline SimState step_ito(const SimState& state, const StepperSettings& s, const RngStream& stream,
                         StepStats* stats = nullptr) {
    (void)stats;
    const int n = s.cutoff;
    const FourierField& xi = state.xi;
    const ThetaSequence& theta = *s.theta;

    const VectorField u = biot_savart(project(xi, n));
    const NoiseIncrement inc = sample_increment(stream, state.step, theta, s.dt);
    const VectorField dw = assemble_noise_field(theta, s.eps * s.noise_scale, inc);
    const int vc = std::max(n, dw.cutoff());

    // dt*(-u) + dW advects xi in a single pass: drift + diffusion share grids
    VectorField adv = project(u, vc);
    adv.u1 *= -s.dt;
    adv.u2 *= -s.dt;
    adv.u1 += project(dw.u1, vc);
    adv.u2 += project(dw.u2, vc);

    FourierField next = xi;
    next += transported_by(adv, xi, n);
    s.heat.apply(next);
    detail::check_finite(next, state.t + s.dt);

    std::optional<FourierField> rho;
    if (state.rho) rho = step_passive_scalar(*state.rho, u, s.dt);
    return {state.t + s.dt, state.step + 1, std::move(next), std::move(rho)};
}

/// Implicit-midpoint step for the conservative Stratonovich Galerkin system
///   d xi = -b_N(xi) dt + eps sum theta_k G_N^k(xi) o dW^k.
inline SimState step_stratonovich(const SimState& state, const StepperSettings& s,
                                  const RngStream& stream, StepStats* stats = nullptr) {
    const ThetaSequence& theta = *s.theta;
    const NoiseIncrement inc = sample_increment(stream, state.step, theta, s.dt);
    FourierField next =
        detail::midpoint_advance(state.xi, inc.values, s.dt, s, stream, state.step, 1, stats);
    detail::check_finite(next, state.t + s.dt);

    std::optional<FourierField> rho;
    if (state.rho) {
        const VectorField u = biot_savart(project(state.xi, s.cutoff));
        rho = step_passive_scalar(*state.rho, u, s.dt);
    }
    return {state.t + s.dt, state.step + 1, std::move(next), std::move(rho)};
}

/// Deterministic Navier-Stokes reference step: exact viscous factor plus
/// second-order Runge-Kutta (Lawson form) on the advection, or plain Euler
/// when configured for cross-scheme consistency checks.
inline SimState step_navier_stokes(const SimState& state, const StepperSettings& s) {
    const int n = s.cutoff;
    const FourierField& xi = state.xi;

    FourierField next(n);
    if (s.ns_rk2) {
        FourierField k1 = nonlinear_term(xi, n);
        k1 *= -1.0;
        FourierField pred = xi;
        pred.axpy(s.dt, k1);
        s.heat.apply(pred);
        FourierField k2 = nonlinear_term(pred, n);
        k2 *= -1.0;
        next = xi;
        next.axpy(s.dt / 2.0, k1);
        s.heat.apply(next); // E(xi + dt/2 k1)
        next.axpy(s.dt / 2.0, k2);
    } else {
        FourierField k1 = nonlinear_term(xi, n);
        next = xi;
        next.axpy(-s.dt, k1);
        s.heat.apply(next);
    }
    detail::check_finite(next, state.t + s.dt);

    std::optional<FourierField> rho;
    if (state.rho) {
        const VectorField u = biot_savart(project(xi, n));
        rho = step_passive_scalar(*state.rho, u, s.dt);
    }
    return {state.t + s.dt, state.step + 1, std::move(next), std::move(rho)};
}

/// Dispatch on the configured scheme.
inline SimState advance(const SimState& state, const StepperSettings& s, const RngStream& stream,
                        StepStats* stats = nullptr) {
    switch (s.scheme) {
        case SchemeKind::ito_dissipative: return step_ito(state, s, stream, stats);
        case SchemeKind::stratonovich_conservative: return step_stratonovich(state, s, stream, stats);
        case SchemeKind::deterministic_ns: return step_navier_stokes(state, s);
    }
    throw std::logic_error("advance: unknown scheme");
}

}  // namespace tnsim

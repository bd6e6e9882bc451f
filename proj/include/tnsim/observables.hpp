#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tnsim/dynamics.hpp"
#include "tnsim/spectral.hpp"

namespace tnsim {

/// Kinetic energy (1/2)||K * xi||^2 = (1/2) sum a_k^2 / (4 pi^2 |k|^2).
inline double energy(const FourierField& xi) {
    const int n = xi.cutoff();
    const long long n2 = static_cast<long long>(n) * n;
    double s = 0.0;
    for (int k1 = -n; k1 <= n; ++k1) {
        for (int k2 = -n; k2 <= n; ++k2) {
            const LatticeIndex k{k1, k2};
            if (is_zero(k) || norm_sq(k) > n2) continue;
            const double a = xi.at(k);
            if (a != 0.0) s += a * a / static_cast<double>(norm_sq(k));
        }
    }
    return 0.5 * s / (4.0 * pi * pi);
}

/// Enstrophy ||xi||^2 (squared L2 norm of the vorticity).
inline double enstrophy(const FourierField& xi) {
    const double r = xi.l2_norm();
    return r * r;
}

/// L^p norm via grid quadrature (exact for p = 2; high-order accurate
/// otherwise since the integrand is a resolved trigonometric polynomial
/// composed with |.|^p).
inline double lp_norm(const FourierField& f, double p) {
    if (!(p >= 1.0)) throw std::invalid_argument("lp_norm: p must be >= 1");
    const int m = grid_size_for(f.cutoff());
    const GridBuffer g = to_grid(f, m);
    double s = 0.0;
    for (double v : g.values()) s += std::pow(std::abs(v), p);
    return std::pow(s / (static_cast<double>(m) * m), 1.0 / p);
}

/// Per-sample time series of scalar diagnostics at the checkpoint times.
struct TrajectoryRecord {
    int sample = 0;
    std::string scheme;
    int cutoff = 0;
    std::uint64_t seed = 0;
    double delta = 0.5;

    std::vector<double> t;
    std::vector<double> energy;
    std::vector<double> enstrophy;
    std::vector<double> h_neg;  // sobolev_norm(xi_t, -delta)
    std::vector<double> h_pos;  // sobolev_norm(xi_t, +delta)

    std::vector<double> rho_p;                    // recorded L^p exponents
    std::vector<std::vector<double>> rho_norms;   // [exponent][time]
    std::vector<LatticeIndex> tracked;            // modes with recorded pairings
    std::vector<std::vector<double>> pairings;    // [mode][time]

    bool failed = false;
    std::string failure_reason;
    long rejected_steps = 0;

    std::size_t size() const { return t.size(); }
};

inline constexpr double mixing_rate(double nu) { return 8.0 * nu * pi * pi; }

namespace detail {

inline void require_record_delta(const TrajectoryRecord& rec, double delta) {
    if (std::abs(rec.delta - delta) > 1e-12)
        throw std::invalid_argument("bound indicator: record was taken at a different delta");
}

}  // namespace detail

/// True iff ||xi_t||^2_{H^-delta} <= e^{-alpha t} (||xi_0||^2_{L2} + slack) at
/// every recorded time, alpha = 8 nu pi^2.
inline bool decay_bound_indicator(const TrajectoryRecord& rec, double nu, double slack,
                                  double delta) {
    detail::require_record_delta(rec, delta);
    if (rec.size() == 0) throw std::invalid_argument("decay_bound_indicator: empty record");
    const double alpha = mixing_rate(nu);
    const double base = rec.enstrophy.front() + slack;
    for (std::size_t i = 0; i < rec.size(); ++i) {
        if (rec.h_neg[i] * rec.h_neg[i] > std::exp(-alpha * rec.t[i]) * base) return false;
    }
    return true;
}

/// True iff e(t) <= e^{-alpha t} (e(0) + slack) at every recorded time.
inline bool energy_bound_indicator(const TrajectoryRecord& rec, double nu, double slack) {
    if (rec.size() == 0) throw std::invalid_argument("energy_bound_indicator: empty record");
    const double alpha = mixing_rate(nu);
    const double base = rec.energy.front() + slack;
    for (std::size_t i = 0; i < rec.size(); ++i) {
        if (rec.energy[i] > std::exp(-alpha * rec.t[i]) * base) return false;
    }
    return true;
}

/// True iff ||xi_t||_{H^delta} >= (1/2) e^{alpha t / 2} ||xi_0||_{L2} at every
/// recorded time. Only meaningful for the enstrophy-conserving scheme; the
/// derivation interpolates through a constant L2 norm, so other schemes are
/// rejected.
inline bool growth_bound_indicator(const TrajectoryRecord& rec, double nu, double delta) {
    detail::require_record_delta(rec, delta);
    if (rec.scheme != to_string(SchemeKind::stratonovich_conservative))
        throw std::invalid_argument(
            "growth_bound_indicator: record must come from the Stratonovich scheme");
    if (rec.size() == 0) throw std::invalid_argument("growth_bound_indicator: empty record");
    const double alpha = mixing_rate(nu);
    const double l2_0 = std::sqrt(rec.enstrophy.front());
    for (std::size_t i = 0; i < rec.size(); ++i) {
        if (rec.h_pos[i] < 0.5 * std::exp(0.5 * alpha * rec.t[i]) * l2_0) return false;
    }
    return true;
}

/// Duality pairing and its H^{-delta} x H^{delta} bound:
/// returns (|<xi, f>|, ||xi||_{H^-delta} ||f||_{H^delta}); first <= second.
inline std::pair<double, double> mixing_pairing(const FourierField& xi, const FourierField& f,
                                                double delta) {
    return {std::abs(inner(xi, f)), sobolev_norm(xi, -delta) * sobolev_norm(f, delta)};
}

/// ||a - b||_{H^-delta} with fields of possibly different cutoffs.
inline double hneg_distance(const FourierField& a, const FourierField& b, double delta) {
    const int n = std::max(a.cutoff(), b.cutoff());
    const long long n2 = static_cast<long long>(n) * n;
    double s = 0.0;
    for (int k1 = -n; k1 <= n; ++k1) {
        for (int k2 = -n; k2 <= n; ++k2) {
            const LatticeIndex k{k1, k2};
            if (is_zero(k) || norm_sq(k) > n2) continue;
            const double d = a.at(k) - b.at(k);
            if (d != 0.0) s += std::pow(static_cast<double>(norm_sq(k)), -delta) * d * d;
        }
    }
    return std::sqrt(s);
}

/// sup over checkpoints of ||sample_t - ref_t||_{H^-delta}.
inline double sup_hneg_distance(const std::vector<FourierField>& sample,
                                const std::vector<FourierField>& reference, double delta) {
    if (sample.size() != reference.size())
        throw std::invalid_argument("sup_hneg_distance: checkpoint count mismatch");
    if (sample.empty()) throw std::invalid_argument("sup_hneg_distance: empty snapshot lists");
    double sup = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i)
        sup = std::max(sup, hneg_distance(sample[i], reference[i], delta));
    return sup;
}

/// D_N = ( (1/M) sum_m sup_t ||xi^m_t - xi^ref_t||^p_{H^-delta} )^{1/p}, the
/// p-th-moment distance of the ensemble to the deterministic reference path.
/// Coupling against the point mass makes it an upper bound for the Wasserstein
/// distance d_p between the ensemble law and the reference.
inline double ensemble_distance(const std::vector<std::vector<FourierField>>& samples,
                                const std::vector<FourierField>& reference, double delta,
                                double p) {
    if (!(p >= 1.0)) throw std::invalid_argument("ensemble_distance: p must be >= 1");
    if (samples.empty()) throw std::invalid_argument("ensemble_distance: no samples");
    double acc = 0.0;
    for (const auto& snap : samples) acc += std::pow(sup_hneg_distance(snap, reference, delta), p);
    return std::pow(acc / static_cast<double>(samples.size()), 1.0 / p);
}

/// Wilson 95% score interval for an empirical probability.
struct WilsonInterval {
    double p = 0.0;
    double lo = 0.0;
    double hi = 0.0;
};

inline WilsonInterval wilson_interval(int successes, int trials) {
    if (trials <= 0) throw std::invalid_argument("wilson_interval: trials must be positive");
    const double z = 1.959963984540054;  // 97.5% normal quantile
    const double n = trials;
    const double phat = successes / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (phat + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n)) / denom;
    return {phat, std::max(0.0, center - half), std::min(1.0, center + half)};
}

}  // namespace tnsim

#pragma once

#include <cmath>
#include <stdexcept>

#include "tnsim/spectral.hpp"
#include "tnsim/theta.hpp"

namespace tnsim {

namespace detail {

inline void require_corrector_input(const ThetaSequence& theta, const FourierField& phi) {
    if (phi.cutoff() > theta.cutoff())
        throw std::invalid_argument(
            "corrector: input cutoff exceeds the Galerkin cutoff; project first");
}

}  // namespace detail

/// The Stratonovich-to-Ito corrector
///   C_N phi = sum_k theta_k^2  sigma_k . grad( Pi_N( sigma_k . grad phi ) ),
/// evaluated term by term with exact mode coupling. The returned field is kept
/// at cutoff 2N; the modes above N cancel in the k-sum (checked by tests), so
/// no outer projection is applied.
inline FourierField corrector_apply(const ThetaSequence& theta, const FourierField& phi) {
    detail::require_corrector_input(theta, phi);
    const int n = theta.cutoff();
    FourierField out(2 * n);
    for (const LatticeIndex k : modes_up_to(n)) {
        const double th = theta.coeff(k);
        if (th == 0.0) continue;
        const double inv = 1.0 / norm(k);
        const double w1 = perp(k).k1 * inv;
        const double w2 = perp(k).k2 * inv;
        const FourierField inner = multiply_by_basis(directional_derivative(w1, w2, phi), k, n);
        const FourierField outer = multiply_by_basis(directional_derivative(w1, w2, inner), k, 2 * n);
        out.axpy(th * th, outer);
    }
    return out;
}

/// Fourier-multiplier eigenvalue of C_N: C_N e_j = lambda_N(j) e_j with
///   lambda_N(j) = -4 pi^2 sum_{k != j, |j - k| <= N} theta_k^2 (k_perp . j)^2 / |k|^2,
/// the spectral form of the convolution (Pi_N A_N) * grad^2 phi.
inline double corrector_eigenvalue(const ThetaSequence& theta, LatticeIndex j) {
    if (is_zero(j)) throw std::invalid_argument("corrector_eigenvalue: j = 0");
    const int n = theta.cutoff();
    const long long n2 = static_cast<long long>(n) * n;
    double sum = 0.0;
    for (const LatticeIndex k : modes_up_to(n)) {
        if (k == j || norm_sq(j - k) > n2) continue;
        const double th = theta.coeff(k);
        if (th == 0.0) continue;
        const double proj = static_cast<double>(dot(perp(k), j));
        sum += th * th * proj * proj / static_cast<double>(norm_sq(k));
    }
    return -4.0 * pi * pi * sum;
}

/// C_N phi through the convolution form: a diagonal Fourier multiplier.
/// Must agree with corrector_apply (the two routes validate each other).
inline FourierField corrector_apply_convolution(const ThetaSequence& theta,
                                                const FourierField& phi) {
    detail::require_corrector_input(theta, phi);
    const int c = phi.cutoff();
    FourierField out(c);
    const long long c2 = static_cast<long long>(c) * c;
    for (int j1 = -c; j1 <= c; ++j1) {
        for (int j2 = -c; j2 <= c; ++j2) {
            const LatticeIndex j{j1, j2};
            if (is_zero(j) || norm_sq(j) > c2) continue;
            const double a = phi.at(j);
            if (a == 0.0) continue;
            out.set(j, corrector_eigenvalue(theta, j) * a);
        }
    }
    return out;
}

namespace detail {

template <class ThetaFn>
double corrector_tail_over(const std::vector<LatticeIndex>& support, ThetaFn&& theta_at,
                           LatticeIndex j, int n) {
    const long long n2 = static_cast<long long>(n) * n;
    double tail = 0.0, total = 0.0;
    for (const LatticeIndex k : support) {
        const double th = theta_at(k);
        total += th * th;
        if (norm_sq(k - j) > n2) tail += th * th;
    }
    if (!(total > 0.0)) throw std::invalid_argument("corrector_tail: theta has zero l2 norm");
    return tail / total;
}

}  // namespace detail

/// Tail diagnostic ||theta||^{-2} sum_{|k - j| > N} theta_k^2; its vanishing
/// as N grows is what drives (eps^2/2) C_N -> nu Delta.
inline double corrector_tail(const ThetaSequence& theta, LatticeIndex j) {
    if (is_zero(j)) throw std::invalid_argument("corrector_tail: j = 0");
    const int n = theta.cutoff();
    return detail::corrector_tail_over(
        modes_up_to(n), [&](LatticeIndex k) { return theta.coeff(k); }, j, n);
}

}  // namespace tnsim

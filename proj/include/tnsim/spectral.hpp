#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>

#include "tnsim/field.hpp"
#include "tnsim/grid.hpp"

namespace tnsim {

namespace detail {

/// Complex amplitude c_m of a real-coefficient field (c_m = (a_m + i a_{-m})/sqrt(2)
/// on Z^2_+, conjugate-symmetric elsewhere, zero at the origin).
inline std::complex<double> complex_amp(const FourierField& f, LatticeIndex m) {
    if (is_zero(m)) return {0.0, 0.0};
    if (in_positive_half(m)) return {f.at(m) / sqrt2, f.at(negate(m)) / sqrt2};
    return {f.at(negate(m)) / sqrt2, -f.at(m) / sqrt2};
}

}  // namespace detail

/// grad f, exact mode calculus: each component of grad e_k is 2 pi k_i e_{-k}.
inline VectorField gradient(const FourierField& f) {
    const int n = f.cutoff();
    VectorField out(n);
    const long long n2 = static_cast<long long>(n) * n;
    for (int k1 = -n; k1 <= n; ++k1) {
        for (int k2 = -n; k2 <= n; ++k2) {
            const LatticeIndex k{k1, k2};
            if (is_zero(k) || norm_sq(k) > n2) continue;
            const double a = f.at(k);
            if (a == 0.0) continue;
            out.u1.set(negate(k), two_pi * k1 * a);
            out.u2.set(negate(k), two_pi * k2 * a);
        }
    }
    return out;
}

/// Laplacian: a_k -> -4 pi^2 |k|^2 a_k.
inline FourierField laplacian(const FourierField& f) {
    const int n = f.cutoff();
    FourierField out(n);
    const long long n2 = static_cast<long long>(n) * n;
    for (int k1 = -n; k1 <= n; ++k1) {
        for (int k2 = -n; k2 <= n; ++k2) {
            const LatticeIndex k{k1, k2};
            if (is_zero(k) || norm_sq(k) > n2) continue;
            out.set(k, -4.0 * pi * pi * static_cast<double>(norm_sq(k)) * f.at(k));
        }
    }
    return out;
}

/// div u = d1 u1 + d2 u2.
inline FourierField divergence(const VectorField& v) {
    const int n = v.cutoff();
    FourierField out(n);
    const long long n2 = static_cast<long long>(n) * n;
    for (int m1 = -n; m1 <= n; ++m1) {
        for (int m2 = -n; m2 <= n; ++m2) {
            const LatticeIndex m{m1, m2};
            if (is_zero(m) || norm_sq(m) > n2) continue;
            const LatticeIndex mm = negate(m);
            out.set(m, two_pi * (-m1 * v.u1.at(mm) - m2 * v.u2.at(mm)));
        }
    }
    return out;
}

/// Scalar curl with the sign convention xi = d2 u1 - d1 u2.
inline FourierField curl(const VectorField& v) {
    const int n = v.cutoff();
    FourierField out(n);
    const long long n2 = static_cast<long long>(n) * n;
    for (int m1 = -n; m1 <= n; ++m1) {
        for (int m2 = -n; m2 <= n; ++m2) {
            const LatticeIndex m{m1, m2};
            if (is_zero(m) || norm_sq(m) > n2) continue;
            const LatticeIndex mm = negate(m);
            out.set(m, two_pi * (-m2 * v.u1.at(mm) + m1 * v.u2.at(mm)));
        }
    }
    return out;
}

/// Biot-Savart: the zero-mean divergence-free u with curl(u) = xi.
/// Stream function route: psi_k = -a_k / (4 pi^2 |k|^2), u = (d2 psi, -d1 psi).
inline VectorField biot_savart(const FourierField& xi) {
    const int n = xi.cutoff();
    VectorField out(n);
    const long long n2 = static_cast<long long>(n) * n;
    for (int m1 = -n; m1 <= n; ++m1) {
        for (int m2 = -n; m2 <= n; ++m2) {
            const LatticeIndex m{m1, m2};
            if (is_zero(m) || norm_sq(m) > n2) continue;
            const double amp = xi.at(negate(m)) / (two_pi * static_cast<double>(norm_sq(m)));
            out.u1.set(m, m2 * amp);
            out.u2.set(m, -m1 * amp);
        }
    }
    return out;
}

/// sigma_k = (k_perp / |k|) e_k, the divergence-free noise mode.
inline VectorField sigma_field(LatticeIndex k) {
    if (is_zero(k)) throw std::invalid_argument("sigma_field: k = 0 is not a noise mode");
    const int cutoff = static_cast<int>(std::ceil(norm(k)));
    VectorField out(cutoff);
    const double inv = 1.0 / norm(k);
    out.u1.set(k, k.k2 * inv);
    out.u2.set(k, -k.k1 * inv);
    return out;
}

/// Galerkin projection onto span{e_k : |k| <= n}; embeds when n exceeds the
/// field's cutoff.
inline FourierField project(const FourierField& f, int n) {
    if (n < 1) throw std::invalid_argument("project: cutoff must be >= 1");
    FourierField out(n);
    const int c = std::min(n, f.cutoff());
    const long long c2 = static_cast<long long>(n) * n;
    for (int k1 = -c; k1 <= c; ++k1) {
        for (int k2 = -c; k2 <= c; ++k2) {
            const LatticeIndex k{k1, k2};
            if (is_zero(k) || norm_sq(k) > c2) continue;
            const double a = f.at(k);
            if (a != 0.0) out.set(k, a);
        }
    }
    return out;
}

inline VectorField project(const VectorField& v, int n) {
    return {project(v.u1, n), project(v.u2, n)};
}

/// H^s norm (sum |k|^{2s} a_k^2)^{1/2}. Plain Euclidean |k| weights, no 2 pi
/// factor; only the constants differ from the 2 pi convention.
inline double sobolev_norm(const FourierField& f, double s) {
    const int n = f.cutoff();
    const long long n2 = static_cast<long long>(n) * n;
    double sum = 0.0;
    for (int k1 = -n; k1 <= n; ++k1) {
        for (int k2 = -n; k2 <= n; ++k2) {
            const LatticeIndex k{k1, k2};
            if (is_zero(k) || norm_sq(k) > n2) continue;
            const double a = f.at(k);
            if (a == 0.0) continue;
            sum += std::pow(static_cast<double>(norm_sq(k)), s) * a * a;
        }
    }
    return std::sqrt(sum);
}

/// Pi_N(f * g), exact: pseudo-spectral product on an alias-free grid
/// (side >= 4N), truncated to the ball. The mean of f*g is discarded; every
/// use pairs the product against zero-mean fields.
inline FourierField product_truncated(const FourierField& f, const FourierField& g, int n) {
    if (f.cutoff() > n || g.cutoff() > n)
        throw std::invalid_argument("product_truncated: operand cutoff exceeds target cutoff");
    const int m = grid_size_for(n);
    GridBuffer gf = to_grid(f, m);
    const GridBuffer gg = to_grid(g, m);
    for (std::size_t i = 0; i < gf.values().size(); ++i) gf.values()[i] *= gg.values()[i];
    return from_grid(gf, n);
}

/// Pi_out(e_k * f), exact single-mode product via the two-term complex shift
/// (e_k couples m only to m +- k). The mean mode is discarded.
inline FourierField multiply_by_basis(const FourierField& f, LatticeIndex k, int out_cutoff) {
    if (is_zero(k)) throw std::invalid_argument("multiply_by_basis: k = 0");
    // amplitudes of e_k at +k / -k
    std::complex<double> ap, am;
    if (in_positive_half(k)) {
        ap = {1.0 / sqrt2, 0.0};
        am = {1.0 / sqrt2, 0.0};
    } else {
        ap = {0.0, -1.0 / sqrt2};
        am = {0.0, 1.0 / sqrt2};
    }
    FourierField out(out_cutoff);
    const long long c2 = static_cast<long long>(out_cutoff) * out_cutoff;
    for (int t1 = -out_cutoff; t1 <= out_cutoff; ++t1) {
        for (int t2 = -out_cutoff; t2 <= out_cutoff; ++t2) {
            const LatticeIndex t{t1, t2};
            if (!in_positive_half(t) || norm_sq(t) > c2) continue;
            const std::complex<double> c =
                ap * detail::complex_amp(f, t - k) + am * detail::complex_amp(f, t + k);
            if (c.real() != 0.0) out.set(t, sqrt2 * c.real());
            if (c.imag() != 0.0) out.set(negate(t), sqrt2 * c.imag());
        }
    }
    return out;
}

/// w . grad f for a constant direction w, exact mode calculus.
inline FourierField directional_derivative(double w1, double w2, const FourierField& f) {
    const int n = f.cutoff();
    FourierField out(n);
    const long long n2 = static_cast<long long>(n) * n;
    for (int m1 = -n; m1 <= n; ++m1) {
        for (int m2 = -n; m2 <= n; ++m2) {
            const LatticeIndex m{m1, m2};
            if (is_zero(m) || norm_sq(m) > n2) continue;
            const double src = f.at(negate(m));
            if (src == 0.0) continue;
            out.set(m, -two_pi * (w1 * m1 + w2 * m2) * src);
        }
    }
    return out;
}

}  // namespace tnsim

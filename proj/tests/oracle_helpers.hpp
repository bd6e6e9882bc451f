#pragma once

// Brute-force reference implementations used as independent oracles. These
// deliberately avoid the FFT/grid path of the library: products go through a
// full O(N^4) mode-coupling convolution in complex form, derivatives through
// finite differences on pointwise evaluations.

#include <cmath>
#include <complex>
#include <vector>

#include "tnsim/field.hpp"

namespace oracle {

using tnsim::FourierField;
using tnsim::LatticeIndex;
using tnsim::Point;

struct ComplexField {
    int c = 0;
    std::vector<std::complex<double>> z;

    explicit ComplexField(int cutoff)
        : c(cutoff), z((2 * static_cast<std::size_t>(cutoff) + 1) *
                           (2 * static_cast<std::size_t>(cutoff) + 1),
                       {0.0, 0.0}) {}

    std::complex<double>& at(int k1, int k2) {
        const std::size_t side = 2 * static_cast<std::size_t>(c) + 1;
        return z[static_cast<std::size_t>(k1 + c) * side + static_cast<std::size_t>(k2 + c)];
    }
    std::complex<double> get(int k1, int k2) const {
        if (std::abs(k1) > c || std::abs(k2) > c) return {0.0, 0.0};
        const std::size_t side = 2 * static_cast<std::size_t>(c) + 1;
        return z[static_cast<std::size_t>(k1 + c) * side + static_cast<std::size_t>(k2 + c)];
    }
};

// c_k = (a_k + i a_{-k}) / sqrt(2) on Z^2_+, conjugate-symmetric completion
// (e_{-k} = -sqrt(2) sin(2 pi k.x) fixes the sign)
inline ComplexField complexify(const FourierField& f) {
    ComplexField out(f.cutoff());
    const int n = f.cutoff();
    for (int k1 = -n; k1 <= n; ++k1)
        for (int k2 = -n; k2 <= n; ++k2) {
            const LatticeIndex k{k1, k2};
            if (!tnsim::in_positive_half(k)) continue;
            const std::complex<double> c{f.at(k) / tnsim::sqrt2,
                                         f.at(tnsim::negate(k)) / tnsim::sqrt2};
            out.at(k1, k2) = c;
            out.at(-k1, -k2) = std::conj(c);
        }
    return out;
}

inline FourierField realify(const ComplexField& zf, int cutoff) {
    FourierField out(cutoff);
    const long long c2 = static_cast<long long>(cutoff) * cutoff;
    for (int k1 = -cutoff; k1 <= cutoff; ++k1)
        for (int k2 = -cutoff; k2 <= cutoff; ++k2) {
            const LatticeIndex k{k1, k2};
            if (!tnsim::in_positive_half(k) || tnsim::norm_sq(k) > c2) continue;
            const std::complex<double> c = zf.get(k1, k2);
            out.set(k, tnsim::sqrt2 * c.real());
            out.set(tnsim::negate(k), tnsim::sqrt2 * c.imag());
        }
    return out;
}

inline ComplexField convolve(const ComplexField& a, const ComplexField& b) {
    ComplexField out(a.c + b.c);
    for (int p1 = -a.c; p1 <= a.c; ++p1)
        for (int p2 = -a.c; p2 <= a.c; ++p2) {
            const std::complex<double> ap = a.get(p1, p2);
            if (ap == std::complex<double>{0.0, 0.0}) continue;
            for (int q1 = -b.c; q1 <= b.c; ++q1)
                for (int q2 = -b.c; q2 <= b.c; ++q2) {
                    const std::complex<double> bq = b.get(q1, q2);
                    if (bq == std::complex<double>{0.0, 0.0}) continue;
                    out.at(p1 + q1, p2 + q2) += ap * bq;
                }
        }
    return out;
}

/// Pi_cut(f * g) by direct mode coupling; the oracle for the grid product.
inline FourierField product_convolution(const FourierField& f, const FourierField& g, int cut) {
    return realify(convolve(complexify(f), complexify(g)), cut);
}

/// Exactly advected profile for the frozen shear u = sigma_(0,1) acting on
/// rho_0 = e_(1,0): characteristics move x1 by sqrt(2) t cos(2 pi x2).
inline double sheared_mode_solution(Point x, double t) {
    return tnsim::sqrt2 * std::cos(tnsim::two_pi * (x.x1 - tnsim::sqrt2 * t * std::cos(tnsim::two_pi * x.x2)));
}

}  // namespace oracle

#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace tnsim {

/// Wavevector k in Z^2. The origin is never a valid field mode.
struct LatticeIndex {
    int k1 = 0;
    int k2 = 0;

    friend constexpr bool operator==(LatticeIndex a, LatticeIndex b) {
        return a.k1 == b.k1 && a.k2 == b.k2;
    }
    friend constexpr bool operator!=(LatticeIndex a, LatticeIndex b) { return !(a == b); }
    // lexicographic; this is the canonical enumeration order
    friend constexpr bool operator<(LatticeIndex a, LatticeIndex b) {
        return a.k1 != b.k1 ? a.k1 < b.k1 : a.k2 < b.k2;
    }
};

constexpr LatticeIndex perp(LatticeIndex k) { return {k.k2, -k.k1}; }
constexpr LatticeIndex negate(LatticeIndex k) { return {-k.k1, -k.k2}; }
constexpr LatticeIndex operator+(LatticeIndex a, LatticeIndex b) { return {a.k1 + b.k1, a.k2 + b.k2}; }
constexpr LatticeIndex operator-(LatticeIndex a, LatticeIndex b) { return {a.k1 - b.k1, a.k2 - b.k2}; }

constexpr long long norm_sq(LatticeIndex k) {
    return static_cast<long long>(k.k1) * k.k1 + static_cast<long long>(k.k2) * k.k2;
}
inline double norm(LatticeIndex k) { return std::sqrt(static_cast<double>(norm_sq(k))); }
constexpr bool is_zero(LatticeIndex k) { return k.k1 == 0 && k.k2 == 0; }
constexpr long long dot(LatticeIndex a, LatticeIndex b) {
    return static_cast<long long>(a.k1) * b.k1 + static_cast<long long>(a.k2) * b.k2;
}

/// Half-lattice split: Z^2_+ carries the cosine modes, Z^2_- = -Z^2_+ the sine modes.
constexpr bool in_positive_half(LatticeIndex k) {
    return k.k1 > 0 || (k.k1 == 0 && k.k2 > 0);
}

/// All k in Z^2 \ {0} with |k| <= n, in lexicographic order.
///
/// The order doubles as the RNG stream layout (mode ordinal = position in
/// this list), so it is part of the reproducibility contract and must never
/// change.
inline std::vector<LatticeIndex> modes_up_to(int n) {
    if (n < 1) throw std::invalid_argument("modes_up_to: cutoff must be >= 1");
    std::vector<LatticeIndex> out;
    const long long n2 = static_cast<long long>(n) * n;
    for (int k1 = -n; k1 <= n; ++k1) {
        for (int k2 = -n; k2 <= n; ++k2) {
            const LatticeIndex k{k1, k2};
            const long long r2 = norm_sq(k);
            if (r2 >= 1 && r2 <= n2) out.push_back(k);
        }
    }
    return out;
}

}  // namespace tnsim

#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "tnsim/lattice.hpp"

namespace tnsim {

inline constexpr double pi = std::numbers::pi_v<double>;
inline constexpr double two_pi = 2.0 * std::numbers::pi_v<double>;
inline constexpr double sqrt2 = std::numbers::sqrt2_v<double>;

/// A point on the unit torus [0,1)^2.
struct Point {
    double x1 = 0.0;
    double x2 = 0.0;
};

/// e_k(x) = sqrt(2) cos(2 pi k.x) for k in Z^2_+, sqrt(2) sin(2 pi k.x) for k in Z^2_-.
inline double basis_eval(LatticeIndex k, Point x) {
    if (is_zero(k)) throw std::invalid_argument("basis_eval: k = 0 is not a field mode");
    const double phase = two_pi * (k.k1 * x.x1 + k.k2 * x.x2);
    return in_positive_half(k) ? sqrt2 * std::cos(phase) : sqrt2 * std::sin(phase);
}

/// Zero-mean scalar field on the torus, stored as real coefficients a_k on
/// the ball |k| <= cutoff (dense square array; entries outside the ball stay
/// zero, the mean mode does not exist).
class FourierField {
  public:
    explicit FourierField(int cutoff) : cutoff_(cutoff) {
        if (cutoff < 1) throw std::invalid_argument("FourierField: cutoff must be >= 1");
        const std::size_t side = 2 * static_cast<std::size_t>(cutoff) + 1;
        a_.assign(side * side, 0.0);
    }

    int cutoff() const { return cutoff_; }

    bool contains(LatticeIndex k) const {
        return std::abs(k.k1) <= cutoff_ && std::abs(k.k2) <= cutoff_;
    }

    /// Coefficient a_k; zero for any mode outside the stored square.
    double at(LatticeIndex k) const { return contains(k) ? a_[index_of(k)] : 0.0; }

    void set(LatticeIndex k, double v) {
        check_writable(k);
        a_[index_of(k)] = v;
    }
    void add(LatticeIndex k, double v) {
        check_writable(k);
        a_[index_of(k)] += v;
    }

    FourierField& operator+=(const FourierField& o) {
        require_same_cutoff(o);
        for (std::size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
        return *this;
    }
    FourierField& operator-=(const FourierField& o) {
        require_same_cutoff(o);
        for (std::size_t i = 0; i < a_.size(); ++i) a_[i] -= o.a_[i];
        return *this;
    }
    FourierField& operator*=(double c) {
        for (double& v : a_) v *= c;
        return *this;
    }
    /// this += c * o
    void axpy(double c, const FourierField& o) {
        require_same_cutoff(o);
        for (std::size_t i = 0; i < a_.size(); ++i) a_[i] += c * o.a_[i];
    }

    double l2_norm() const {
        double s = 0.0;
        for (double v : a_) s += v * v;
        return std::sqrt(s);
    }

    bool all_finite() const {
        for (double v : a_) {
            if (!std::isfinite(v)) return false;
        }
        return true;
    }

    std::size_t index_of(LatticeIndex k) const {
        const std::size_t side = 2 * static_cast<std::size_t>(cutoff_) + 1;
        return static_cast<std::size_t>(k.k1 + cutoff_) * side + static_cast<std::size_t>(k.k2 + cutoff_);
    }

  private:
    void check_writable(LatticeIndex k) const {
        if (is_zero(k)) throw std::invalid_argument("FourierField: mean mode does not exist");
        if (norm_sq(k) > static_cast<long long>(cutoff_) * cutoff_)
            throw std::out_of_range("FourierField: mode outside the |k| <= cutoff ball");
    }
    void require_same_cutoff(const FourierField& o) const {
        if (o.cutoff_ != cutoff_) throw std::invalid_argument("FourierField: cutoff mismatch");
    }

    int cutoff_;
    std::vector<double> a_;
};

inline FourierField operator+(FourierField a, const FourierField& b) { return a += b; }
inline FourierField operator-(FourierField a, const FourierField& b) { return a -= b; }
inline FourierField operator*(double c, FourierField f) { return f *= c; }

/// L^2 inner product via Parseval (the e_k are orthonormal).
inline double inner(const FourierField& f, const FourierField& g) {
    const FourierField& small = f.cutoff() <= g.cutoff() ? f : g;
    const FourierField& big = f.cutoff() <= g.cutoff() ? g : f;
    const int n = small.cutoff();
    double s = 0.0;
    for (int k1 = -n; k1 <= n; ++k1)
        for (int k2 = -n; k2 <= n; ++k2) {
            const LatticeIndex k{k1, k2};
            s += small.at(k) * big.at(k);
        }
    return s;
}

/// Pointwise evaluation by direct summation over modes. O(N^2) per point;
/// meant for diagnostics, not for bulk transforms.
inline double eval_point(const FourierField& f, Point x) {
    const int n = f.cutoff();
    double s = 0.0;
    for (int k1 = -n; k1 <= n; ++k1)
        for (int k2 = -n; k2 <= n; ++k2) {
            const LatticeIndex k{k1, k2};
            if (is_zero(k)) continue;
            const double a = f.at(k);
            if (a != 0.0) s += a * basis_eval(k, x);
        }
    return s;
}

/// A two-component spectral field (velocity, noise field, gradient).
struct VectorField {
    FourierField u1;
    FourierField u2;

    explicit VectorField(int cutoff) : u1(cutoff), u2(cutoff) {}
    VectorField(FourierField a, FourierField b) : u1(std::move(a)), u2(std::move(b)) {
        if (u1.cutoff() != u2.cutoff())
            throw std::invalid_argument("VectorField: component cutoffs differ");
    }
    int cutoff() const { return u1.cutoff(); }
};

}  // namespace tnsim

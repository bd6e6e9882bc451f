#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "tnsim/field.hpp"
#include "tnsim/spectral.hpp"

namespace tnsim {

enum class ThetaFamily { indicator, power };

inline std::string to_string(ThetaFamily f) {
    return f == ThetaFamily::indicator ? "indicator" : "power";
}

/// Radially symmetric noise coefficients theta_k supported on |k| <= cutoff.
///   indicator : theta_k = 1
///   power     : theta_k = |k|^{-alpha}
/// alpha in [0,1] is the range with a proven vanishing tail; other exponents
/// are accepted for diagnostic studies.
class ThetaSequence {
  public:
    static ThetaSequence indicator(int cutoff) { return ThetaSequence(ThetaFamily::indicator, 0.0, cutoff); }
    static ThetaSequence power(double alpha, int cutoff) { return ThetaSequence(ThetaFamily::power, alpha, cutoff); }

    double coeff(LatticeIndex k) const {
        const long long r2 = norm_sq(k);
        if (r2 < 1 || r2 > static_cast<long long>(cutoff_) * cutoff_) return 0.0;
        if (family_ == ThetaFamily::indicator) return 1.0;
        return std::pow(static_cast<double>(r2), -0.5 * alpha_);
    }

    ThetaFamily family() const { return family_; }
    double alpha() const { return alpha_; }
    int cutoff() const { return cutoff_; }
    double l2_norm() const { return l2_; }
    double linf_norm() const { return linf_; }

  private:
    ThetaSequence(ThetaFamily family, double alpha, int cutoff)
        : family_(family), alpha_(alpha), cutoff_(cutoff) {
        if (cutoff < 1) throw std::invalid_argument("ThetaSequence: cutoff must be >= 1");
        double sum = 0.0, mx = 0.0;
        for (const LatticeIndex k : modes_up_to(cutoff)) {
            const double th = coeff(k);
            sum += th * th;
            mx = std::max(mx, th);
        }
        l2_ = std::sqrt(sum);
        linf_ = mx;
    }

    ThetaFamily family_;
    double alpha_;
    int cutoff_;
    double l2_ = 0.0;
    double linf_ = 0.0;
};

/// The noise scaling that balances the Ito-Stratonovich correction against
/// nu Delta: eps = 2 sqrt(nu) / ||theta||_{l2}.
inline double epsilon_scaling(const ThetaSequence& theta, double nu) {
    if (!(nu > 0.0)) throw std::invalid_argument("epsilon_scaling: nu must be positive");
    if (!(theta.l2_norm() > 0.0))
        throw std::invalid_argument("epsilon_scaling: theta has zero l2 norm");
    return 2.0 * std::sqrt(nu) / theta.l2_norm();
}

/// 2x2 real matrix (covariance values, Hessian contractions).
struct Mat2 {
    double a11 = 0.0, a12 = 0.0, a21 = 0.0, a22 = 0.0;

    Mat2& operator+=(const Mat2& o) {
        a11 += o.a11; a12 += o.a12; a21 += o.a21; a22 += o.a22;
        return *this;
    }
    double trace() const { return a11 + a22; }
    double frobenius() const {
        return std::sqrt(a11 * a11 + a12 * a12 + a21 * a21 + a22 * a22);
    }
};

inline Mat2 operator-(const Mat2& a, const Mat2& b) {
    return {a.a11 - b.a11, a.a12 - b.a12, a.a21 - b.a21, a.a22 - b.a22};
}

namespace detail {

/// Frobenius defect of sum theta_k^2 sigma_k(x) (x) sigma_k(x) against
/// (||theta||^2 / 2) I over an explicit coefficient table. Exposed so tests
/// can feed deliberately broken (non-radial) tables.
template <class ThetaFn>
double isotropy_defect_table(const std::vector<LatticeIndex>& modes, ThetaFn&& theta_at, Point x) {
    Mat2 sum;
    double l2sq = 0.0;
    for (const LatticeIndex k : modes) {
        const double th = theta_at(k);
        if (th == 0.0) continue;
        l2sq += th * th;
        const double e = basis_eval(k, x);
        const double w = th * th * e * e / static_cast<double>(norm_sq(k));
        const LatticeIndex p = perp(k);
        sum.a11 += w * p.k1 * p.k1;
        sum.a12 += w * p.k1 * p.k2;
        sum.a21 += w * p.k2 * p.k1;
        sum.a22 += w * p.k2 * p.k2;
    }
    const double half = 0.5 * l2sq;
    const Mat2 target{half, 0.0, 0.0, half};
    return (sum - target).frobenius();
}

}  // namespace detail

/// How far sum theta_k^2 sigma_k(x) (x) sigma_k(x) is from (||theta||^2/2) I2.
/// Vanishes identically (up to roundoff) for radially symmetric theta.
inline double isotropy_defect(const ThetaSequence& theta, Point x) {
    const auto modes = modes_up_to(theta.cutoff());
    return detail::isotropy_defect_table(modes, [&](LatticeIndex k) { return theta.coeff(k); }, x);
}

/// Noise covariance A_N(r) = sum_k theta_k^2 sigma_k(x) (x) sigma_k(y) at
/// r = x - y, reduced over the positive half-lattice:
/// A_N(r) = sum_{k in Z^2_+} 2 theta_k^2 (k_perp (x) k_perp / |k|^2) cos(2 pi k.r).
inline Mat2 covariance(const ThetaSequence& theta, Point r) {
    Mat2 out;
    for (const LatticeIndex k : modes_up_to(theta.cutoff())) {
        if (!in_positive_half(k)) continue;
        const double th = theta.coeff(k);
        if (th == 0.0) continue;
        const double c = 2.0 * th * th * std::cos(two_pi * (k.k1 * r.x1 + k.k2 * r.x2)) /
                         static_cast<double>(norm_sq(k));
        const LatticeIndex p = perp(k);
        out.a11 += c * p.k1 * p.k1;
        out.a12 += c * p.k1 * p.k2;
        out.a21 += c * p.k2 * p.k1;
        out.a22 += c * p.k2 * p.k2;
    }
    return out;
}

/// Direct double-basis sum over the full lattice; consistency oracle for
/// covariance().
inline Mat2 covariance_double_sum(const ThetaSequence& theta, Point x, Point y) {
    Mat2 out;
    for (const LatticeIndex k : modes_up_to(theta.cutoff())) {
        const double th = theta.coeff(k);
        if (th == 0.0) continue;
        const double c = th * th * basis_eval(k, x) * basis_eval(k, y) /
                         static_cast<double>(norm_sq(k));
        const LatticeIndex p = perp(k);
        out.a11 += c * p.k1 * p.k1;
        out.a12 += c * p.k1 * p.k2;
        out.a21 += c * p.k2 * p.k1;
        out.a22 += c * p.k2 * p.k2;
    }
    return out;
}

}  // namespace tnsim

#pragma once

#include <complex>
#include <map>
#include <mutex>
#include <stdexcept>
#include <vector>

#include <fftw3.h>

#include "tnsim/field.hpp"

namespace tnsim {

/// Real values on the uniform grid x_j = (j1/M, j2/M), row-major in j1.
class GridBuffer {
  public:
    explicit GridBuffer(int m) : m_(m), v_(static_cast<std::size_t>(m) * m, 0.0) {
        if (m < 2) throw std::invalid_argument("GridBuffer: grid side must be >= 2");
    }

    int size() const { return m_; }
    double at(int j1, int j2) const { return v_[idx(j1, j2)]; }
    double& ref(int j1, int j2) { return v_[idx(j1, j2)]; }
    const std::vector<double>& values() const { return v_; }
    std::vector<double>& values() { return v_; }

  private:
    std::size_t idx(int j1, int j2) const {
        return static_cast<std::size_t>(j1) * m_ + static_cast<std::size_t>(j2);
    }
    int m_;
    std::vector<double> v_;
};

/// Smallest power of two >= 4*cutoff. A product of two degree-<=N trigonometric
/// polynomials has degree <= 2N; on an M-point grid its aliases sit at
/// |index| >= M - 2N >= 2N + 1, so every retained mode |k| <= N is exact.
inline int grid_size_for(int cutoff) {
    if (cutoff < 1) throw std::invalid_argument("grid_size_for: cutoff must be >= 1");
    int m = 4;
    while (m < 4 * cutoff) m *= 2;
    return m;
}

namespace detail {

// One FFTW plan pair per grid side, shared by all threads. Plans are created
// with FFTW_ESTIMATE | FFTW_UNALIGNED so plan selection (and hence rounding)
// does not depend on buffer addresses; fftw_execute_dft is thread-safe.
struct FftPlans {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
};

inline FftPlans& fft_plans(int m) {
    static std::map<int, FftPlans> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(m);
    if (it == cache.end()) {
        std::vector<std::complex<double>> scratch(static_cast<std::size_t>(m) * m);
        auto* p = reinterpret_cast<fftw_complex*>(scratch.data());
        FftPlans plans;
        plans.fwd = fftw_plan_dft_2d(m, m, p, p, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
        plans.bwd = fftw_plan_dft_2d(m, m, p, p, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
        it = cache.emplace(m, plans).first;
    }
    return it->second;
}

inline void dft2_inplace(std::complex<double>* z, int m, bool forward) {
    FftPlans& plans = fft_plans(m);
    auto* p = reinterpret_cast<fftw_complex*>(z);
    fftw_execute_dft(forward ? plans.fwd : plans.bwd, p, p);
}

inline std::size_t wrap_index(int k, int m) {
    return static_cast<std::size_t>(k >= 0 ? k : k + m);
}

}  // namespace detail

/// Evaluate the field on the M x M grid. Exact for cutoff <= M/2 - 1.
inline GridBuffer to_grid(const FourierField& f, int m) {
    const int n = f.cutoff();
    if (2 * n >= m)
        throw std::invalid_argument("to_grid: grid too small for the field cutoff");
    std::vector<std::complex<double>> z(static_cast<std::size_t>(m) * m, {0.0, 0.0});
    // complex amplitudes: c_k = (a_k + i a_{-k}) / sqrt(2) for k in Z^2_+,
    // c_{-k} = conj(c_k); the sign follows from e_{-k} = -sqrt(2) sin(2 pi k.x)
    for (int k1 = -n; k1 <= n; ++k1) {
        for (int k2 = -n; k2 <= n; ++k2) {
            const LatticeIndex k{k1, k2};
            if (!in_positive_half(k) || norm_sq(k) > static_cast<long long>(n) * n) continue;
            const std::complex<double> c{f.at(k) / sqrt2, f.at(negate(k)) / sqrt2};
            z[detail::wrap_index(k1, m) * m + detail::wrap_index(k2, m)] = c;
            z[detail::wrap_index(-k1, m) * m + detail::wrap_index(-k2, m)] = std::conj(c);
        }
    }
    detail::dft2_inplace(z.data(), m, /*forward=*/false);
    GridBuffer g(m);
    for (std::size_t i = 0; i < z.size(); ++i) g.values()[i] = z[i].real();
    return g;
}

/// Project grid values back onto spectral coefficients with |k| <= cutoff.
/// The zero mode is discarded (fields are zero-mean by construction).
inline FourierField from_grid(const GridBuffer& g, int cutoff) {
    const int m = g.size();
    if (2 * cutoff >= m)
        throw std::invalid_argument("from_grid: grid too small for requested cutoff");
    std::vector<std::complex<double>> z(static_cast<std::size_t>(m) * m);
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = {g.values()[i], 0.0};
    detail::dft2_inplace(z.data(), m, /*forward=*/true);
    const double scale = 1.0 / (static_cast<double>(m) * m);
    FourierField f(cutoff);
    const long long c2 = static_cast<long long>(cutoff) * cutoff;
    for (int k1 = -cutoff; k1 <= cutoff; ++k1) {
        for (int k2 = -cutoff; k2 <= cutoff; ++k2) {
            const LatticeIndex k{k1, k2};
            if (!in_positive_half(k) || norm_sq(k) > c2) continue;
            const std::complex<double> c =
                z[detail::wrap_index(k1, m) * m + detail::wrap_index(k2, m)] * scale;
            f.set(k, sqrt2 * c.real());
            f.set(negate(k), sqrt2 * c.imag());
        }
    }
    return f;
}

/// (1/M^2) sum of v^2 over grid nodes; equals the integral of f^2 when the
/// grid resolves f exactly.
inline double quadrature_mean_sq(const GridBuffer& g) {
    double s = 0.0;
    for (double v : g.values()) s += v * v;
    return s / (static_cast<double>(g.size()) * g.size());
}

}  // namespace tnsim

#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "tnsim/rng.hpp"
#include "tnsim/spectral.hpp"
#include "tnsim/theta.hpp"

namespace tnsim {

/// One time step's Brownian increments, one N(0, dt) per mode in
/// modes_up_to(cutoff) order.
struct NoiseIncrement {
    double dt = 0.0;
    int cutoff = 0;
    std::vector<double> values;
};

/// Draw the increments for a step. Pure in (stream, step, lane), so the same
/// coordinates always reproduce the same bits.
inline NoiseIncrement sample_increment(const RngStream& stream, std::uint64_t step,
                                       const ThetaSequence& theta, double dt,
                                       std::uint64_t lane = 0) {
    if (!(dt > 0.0)) throw std::invalid_argument("sample_increment: dt must be positive");
    const auto modes = modes_up_to(theta.cutoff());
    NoiseIncrement inc;
    inc.dt = dt;
    inc.cutoff = theta.cutoff();
    inc.values.resize(modes.size());
    const double scale = std::sqrt(dt);
    for (std::size_t i = 0; i < modes.size(); ++i)
        inc.values[i] = scale * normal_draw(stream, step, i, lane);
    return inc;
}

/// eps * sum_k theta_k sigma_k dW^k as a spectral vector field; divergence
/// free since every sigma_k is.
inline VectorField assemble_noise_field(const ThetaSequence& theta, double eps,
                                        const NoiseIncrement& inc) {
    const auto modes = modes_up_to(theta.cutoff());
    if (inc.cutoff != theta.cutoff() || inc.values.size() != modes.size())
        throw std::invalid_argument("assemble_noise_field: increment not indexed by modes_up_to(N)");
    VectorField out(theta.cutoff());
    for (std::size_t i = 0; i < modes.size(); ++i) {
        const LatticeIndex k = modes[i];
        const double w = eps * theta.coeff(k) * inc.values[i] / norm(k);
        if (w == 0.0) continue;
        out.u1.add(k, w * k.k2);
        out.u2.add(k, -w * k.k1);
    }
    return out;
}

}  // namespace tnsim

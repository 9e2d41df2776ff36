#pragma once

#include <cstddef>
#include <cstdint>

#include <Eigen/Dense>

#include "augtrunc/truncation.hpp"

namespace augtrunc {

struct SimConfig {
    std::uint64_t seed = 1;
    std::size_t replications = 10000;
    std::size_t start = 0;
    std::size_t anchor = 0;
    std::uint64_t max_steps = 100000000;  ///< total over all replications
    unsigned threads = 1;
};

struct SimEstimate {
    double value = 0.0;
    double se = 0.0;
    std::size_t count = 0;
};

/// Monte Carlo estimates of the first-return quantities from `start` to
/// `anchor`. For continuous kernels tau is the return time and zeta the
/// integral of g up to it.
struct SimResult {
    SimEstimate tau, tau2, zeta, zeta2, zeta_tau;
    /// mean((zeta - mu tau)^2) / mean(tau) with mu = pi^T g from the kernel;
    /// the variance constant when start == anchor.
    SimEstimate sigma2;
};

/// Results depend only on (kernel, g, seed, replications, start, anchor), not
/// on the thread count. Throws CapExceeded when max_steps is used up.
SimResult simulate_return(const FiniteKernel& k, const SimConfig& cfg, const Eigen::VectorXd& g);

}  // namespace augtrunc

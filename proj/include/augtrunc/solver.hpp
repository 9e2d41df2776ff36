#pragma once

#include <cstddef>

#include <Eigen/Dense>

#include "augtrunc/forcing.hpp"
#include "augtrunc/truncation.hpp"

namespace augtrunc {

struct PoissonSolution {
    std::size_t anchor = 0;
    Eigen::VectorXd f;   ///< f(anchor) == 0
    Eigen::VectorXd pi;
    double mean = 0.0;   ///< pi^T g
    double residual = 0.0;  ///< |(P-I)f + g_bar|_inf or |Qf + g_bar|_inf
};

/// First-return quantities to the anchor j, indexed by start state. For
/// continuous kernels the times are in time units (delta_j) and the
/// functionals are integrals (xi_j).
struct ReturnMoments {
    std::size_t anchor = 0;
    Eigen::VectorXd m1;  ///< E_i[tau_j]
    Eigen::VectorXd m2;  ///< E_i[tau_j^2]
    Eigen::VectorXd h;   ///< E_i[zeta_j(g)]
    Eigen::VectorXd s;   ///< E_i[zeta_j(g)^2]
    Eigen::VectorXd u;   ///< E_i[zeta_j(g) tau_j]
};

enum class VarianceRoute { Regenerative, StationaryIdentity };

struct VarianceConstant {
    double sigma2 = 0.0;  ///< the stationary-identity value, clipped at 0
    VarianceRoute route = VarianceRoute::StationaryIdentity;
    double regenerative = 0.0;
    double stationary = 0.0;
};

/// Stationary vector by subtraction-free state elimination on the closed
/// class; transient states get 0.
Eigen::VectorXd invariant_gth(const FiniteKernel& k);

/// |pi^T (P - I)|_inf or |pi^T Q|_inf.
double invariant_residual(const FiniteKernel& k, const Eigen::VectorXd& pi);

PoissonSolution poisson_solve(const FiniteKernel& k, const Eigen::VectorXd& g, std::size_t j);
PoissonSolution poisson_solve(const FiniteKernel& k, const ForcingFunction& g, std::size_t j);

ReturnMoments return_moments_dtmc(const FiniteKernel& k, const Eigen::VectorXd& g, std::size_t j);
ReturnMoments return_moments_ctmc(const FiniteKernel& k, const Eigen::VectorXd& g, std::size_t j);
/// Dispatches on the kernel kind.
ReturnMoments return_moments(const FiniteKernel& k, const Eigen::VectorXd& g, std::size_t j);

/// Both routes, with the regenerative one checked against the stationary one.
VarianceConstant variance_dtmc(const FiniteKernel& k, const Eigen::VectorXd& g, std::size_t j);
VarianceConstant variance_ctmc(const FiniteKernel& k, const Eigen::VectorXd& g, std::size_t j);
VarianceConstant variance(const FiniteKernel& k, const Eigen::VectorXd& g, std::size_t j);

/// Everything for one kernel, sharing the intermediate results.
struct Analysis {
    PoissonSolution poisson;
    ReturnMoments moments;
    VarianceConstant variance;
};

/// Combines the variance routes from precomputed pieces; throws RouteMismatch
/// when they disagree.
VarianceConstant combine_variance(const FiniteKernel& k, const Eigen::VectorXd& g,
                                  const PoissonSolution& p, const ReturnMoments& m);

Analysis analyze(const FiniteKernel& k, const Eigen::VectorXd& g, std::size_t j);

}  // namespace augtrunc

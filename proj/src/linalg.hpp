#pragma once

// Linear solves for the M-matrices that arise from Markov kernels: I - P or
// -Q restricted to a set of states. Elimination follows the chain structure
// (each eliminated state's mass is rerouted to its neighbours and to the
// outside), so no subtraction ever touches a pivot. Zero entries are skipped,
// which makes Hessenberg (skip-free) kernels cost O(n^2).

#include <vector>

#include <Eigen/Dense>

namespace augtrunc::detail {

/// Off-diagonal weights and slack of an M-matrix A = diag(s + W e) - W.
struct MMatrix {
    Eigen::MatrixXd weight;  ///< W >= 0, zero diagonal
    Eigen::VectorXd slack;   ///< s >= 0, mass leaving the index set
};

/// Restriction of a kernel to the index set `idx`: weights are the off-diagonal
/// entries inside the set, slack the off-diagonal mass leaving it.
MMatrix restrict_kernel(const Eigen::MatrixXd& kernel, const std::vector<Eigen::Index>& idx);

/// Solves A X = B in place. Returns false when a pivot vanishes, i.e. some
/// state cannot leave the set.
bool solve(MMatrix a, Eigen::MatrixXd& b);

}  // namespace augtrunc::detail

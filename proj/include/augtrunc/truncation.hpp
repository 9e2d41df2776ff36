#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <variant>

#include <Eigen/Dense>

#include "augtrunc/chain.hpp"

namespace augtrunc {

namespace scheme {

/// Each row's deficit goes to column `anchor`.
struct LinearColumn {
    std::size_t anchor = 0;
};

/// LinearColumn with anchor = n.
struct LastColumn {};

/// Chain watched only on {0..n}. `outer` fixes the outer truncation level N;
/// when empty, single-death chains are censored exactly and everything else
/// picks N adaptively. `exact` rejects chains that cannot be censored exactly.
struct Censored {
    std::optional<std::size_t> outer;
    bool exact = false;
};

}  // namespace scheme

using AugmentationScheme = std::variant<scheme::LinearColumn, scheme::LastColumn, scheme::Censored>;

std::string scheme_name(const AugmentationScheme& s);

/// A proper finite stochastic matrix or conservative generator on {0..n}.
struct FiniteKernel {
    ChainKind kind = ChainKind::Discrete;
    std::size_t level = 0;
    Eigen::MatrixXd entries;  ///< continuous: diagonal holds -q_i
    std::string scheme_tag;

    std::size_t size() const { return static_cast<std::size_t>(entries.rows()); }
    /// q_i (continuous) or 1 - p_ii (discrete), from the off-diagonal entries.
    double exit_rate(std::size_t i) const;
};

/// Wrap a finite matrix, validating it. Row sums are checked with the
/// kernel tolerances; the continuous diagonal is recomputed from off-diagonals.
FiniteKernel make_kernel(ChainKind kind, Eigen::MatrixXd entries, std::string tag = "explicit");

/// Adds each row deficit to column j. Deficits in [-1e-12, 0) are clipped.
FiniteKernel augment_linear(const SubKernel& sub, std::size_t j);

/// Stochastic complement of `outer` on {0..n}.
FiniteKernel censor(const FiniteKernel& outer, std::size_t n);

/// Exact censoring of a single-death generator: the last-column augmentation
/// with last-column rates taken from the tail sums.
FiniteKernel censor_single_death(const ChainSpec& spec, std::size_t n);

/// Censoring of a last-column outer truncation at level N, with N = max(4n, n+8)
/// doubled until the censored entries move by less than 1e-10.
FiniteKernel censor_adaptive(const ChainSpec& spec, std::size_t n);

/// Builds the kernel on {0..n} for the given scheme.
FiniteKernel build_kernel(const ChainSpec& spec, const AugmentationScheme& s, std::size_t n);

/// Checks the kernel invariants: row sums, signs, a unique closed class that
/// every state reaches. Throws on the first violation.
void validate(const FiniteKernel& k);

/// Membership of each state in the unique closed class.
std::vector<bool> closed_class(const FiniteKernel& k);

}  // namespace augtrunc

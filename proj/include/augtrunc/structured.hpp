#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "augtrunc/chain.hpp"
#include "augtrunc/forcing.hpp"
#include "augtrunc/tolerances.hpp"

namespace augtrunc {

/// F_m^{(i)} for 0 <= i <= m <= M of a single-birth DTMC. Entries are kept
/// in extended precision: the Poisson sums built from them cancel heavily
/// when F grows geometrically.
class FTable {
public:
    FTable(const ChainSpec& spec, std::size_t max_level);

    std::size_t max_level() const { return rows_.size() - 1; }
    long double F(std::size_t m, std::size_t i) const { return rows_[m][i]; }
    /// p_{m,m+1}
    long double birth(std::size_t m) const { return birth_[m]; }
    /// p_m^{(k)} = sum_{t <= k} p_mt, for k < m.
    long double cumulative(std::size_t m, std::size_t k) const { return cum_[m][k]; }
    /// Largest |F - recursion(F)| / max(1, F) over the table.
    double recursion_residual() const;

private:
    std::vector<std::vector<long double>> rows_;
    std::vector<std::vector<long double>> cum_;
    std::vector<long double> birth_;
};

/// G_m^{(i)} for 1 <= m <= i <= K of a single-death CTMC, extendable in K.
class GTable {
public:
    GTable(const ChainSpec& spec, std::size_t max_level);

    void extend(std::size_t max_level);
    std::size_t max_level() const { return cols_.size() - 1; }
    double G(std::size_t m, std::size_t i) const { return cols_[i][m]; }
    /// q_{k,k-1}
    double death(std::size_t k) const { return death_[k]; }
    /// q_m^{(k)} = sum_{t >= k} q_mt, for k > m.
    double tail(std::size_t m, std::size_t k) const { return tails_[k][m]; }
    double recursion_residual() const;

private:
    const ChainSpec* spec_;
    std::vector<std::vector<double>> cols_;   // cols_[i][m], m <= i
    std::vector<std::vector<double>> tails_;  // tails_[k][m], m < k
    std::vector<double> death_;
};

/// Cutoff policy for the infinite sums of the single-death formulas.
struct TailControl {
    std::size_t initial_cutoff = 64;
    std::size_t max_cutoff = 2048;
    double tolerance = tol::kTail;  ///< relative to max(1, |value|)
};

struct StructuredResult {
    Eigen::VectorXd values;
    std::size_t cutoff = 0;
    double achieved = 0.0;  ///< change at the last doubling
};

/// f_j on {0..max_state} for a single-birth DTMC with stationary mean `mean`.
Eigen::VectorXd single_birth_poisson(const ChainSpec& spec, const ForcingFunction& g, State j, double mean,
                                     std::size_t max_state);

/// f_j on {0..max_state} for a single-death CTMC; the sums over k >= m are
/// cut at K and K is doubled until the values settle.
StructuredResult single_death_poisson(const ChainSpec& spec, const ForcingFunction& g, State j, double mean,
                                      std::size_t max_state, const TailControl& tail = {});

/// The same formula with every sum cut at the truncation level n. With the
/// truncated chain's own mean this is exactly the Poisson solution of the
/// exact censored (last-column) truncation on {0..n}.
Eigen::VectorXd single_death_poisson_truncated(const ChainSpec& spec, const ForcingFunction& g, State j,
                                               double mean, std::size_t n);

using StationaryFn = std::function<double(State)>;

/// sigma^2 = 2 sum_{i>=1} pi(i) g_bar(i) sum_{m<=i} sum_{k>=m} G_m^{(k)} g_bar(k) / q_{k,k-1}.
/// values(0) holds sigma^2.
StructuredResult single_death_variance(const ChainSpec& spec, const ForcingFunction& g, const StationaryFn& pi,
                                       double mean, const TailControl& tail = {});

/// Partial sums of the variance series over i <= n, for n = 1..n_max, with
/// the inner sums cut at `cutoff`.
std::vector<double> single_death_variance_partial(const ChainSpec& spec, const ForcingFunction& g,
                                                  const StationaryFn& pi, double mean, std::size_t n_max,
                                                  std::size_t cutoff);

/// sigma^2 = 2 sum_i S_i^2 / (q_{i,i+1} pi(i)) with S_i = sum_{k<=i} pi(k) g_bar(k).
StructuredResult birth_death_variance(const ChainSpec& spec, const ForcingFunction& g, const StationaryFn& pi,
                                      double mean, const TailControl& tail = {});

}  // namespace augtrunc

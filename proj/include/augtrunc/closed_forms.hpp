#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "augtrunc/chain.hpp"
#include "augtrunc/families.hpp"

// Closed-form reference values for the built-in example families. These are
// evaluated from the analytical expressions only and serve as golden values
// for tests and sweep reports.
namespace augtrunc::reference {

/// The two-column DTMC: p_i = 1/2 for i = 0 or odd i, 1 - 3^{-i/2} for even i >= 2.
class Section2 {
public:
    Section2();

    static double p(State i);
    /// 1 - p_i, evaluated without cancellation.
    static double q(State i);
    /// a_i = prod_{k<i} p_k, so pi(i) = a_i pi(0).
    double a(State i) const;
    double pi(State i) const;
    /// c = sum_i (2i+1) a_{2i+1} / sum_i a_{2i+1}.
    double balancing_constant() const { return c_; }
    /// pi^T g for g(i) = i (choice 1) or the balanced alternative (choice 2).
    double mean(int g_choice) const;
    double g(int g_choice, State i) const;

    /// Invariant vector of the last-column augmentation at level n.
    std::vector<double> last_column_pi(std::size_t n) const;
    double last_column_mean(std::size_t n, int g_choice) const;

    /// f_0(i) for a chain with stationary mean `mean` and forcing g.
    static double f0(State i, double mean, const std::function<double(State)>& g);

private:
    std::vector<double> a_;
    double pi0_ = 0.0;
    double c_ = 0.0;
};

class Example52 {
public:
    explicit Example52(double b);

    double pi(State i) const;
    double mean_identity() const;
    /// f_j(i) for g(i) = i.
    double f(State j, State i) const;
    double sigma2() const;
    /// q_n^{(k)} = sum_{i>=k} q_{ni}.
    double tail_rate(State n, State k) const;
    /// G_n^{(i)} for 1 <= n <= i.
    double G(State n, State i) const;

private:
    double b_;
};

class Example53 {
public:
    static double pi(State i);
    static double mean_identity();
    /// h_n = sum_{k>=n} G_n^{(k)} / q_{k,k-1}, via the convergent tail series.
    static double h(State n);
    /// h_n via the logarithmic closed form; loses accuracy for large n.
    static double h_log_form(State n);
    static double f(State j, State i);
    static double tail_rate(State n, State k);
    static double G(State n, State i);
    /// i-th term of the variance series (i >= 1).
    static double sigma2_term(State i);
    /// Sum of the first n terms.
    static double sigma2_partial(std::size_t n);
    /// Series summed until the terms vanish in double precision.
    static double sigma2();
    /// sum_{i>=n} i / 2^{i-2}, an upper bound on sigma2() - sigma2_partial(n).
    static double error_bound(std::size_t n);
};

/// Reference values bundled for a family with known closed forms.
struct GoldenRecord {
    std::function<double(State)> pi;
    double mean = 0.0;
    std::function<double(State j, State i)> poisson;
    std::optional<double> sigma2;
    std::function<double(std::size_t)> sigma2_partial;  ///< may be empty
    std::function<double(std::size_t)> error_bound;     ///< may be empty
};

/// Throws Error{InvalidParams} for families without closed forms.
GoldenRecord example_closed_forms(const FamilyParams& family);

}  // namespace augtrunc::reference

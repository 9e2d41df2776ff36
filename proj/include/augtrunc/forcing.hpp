#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "augtrunc/chain.hpp"

namespace augtrunc {

/// Reward function g on the state space.
struct ForcingFunction {
    std::function<double(State)> eval;
    std::optional<double> known_mean;  ///< pi^T g when available in closed form
    std::string label;

    double operator()(State i) const { return eval(i); }

    /// g restricted to {0..n}.
    Eigen::VectorXd restrict(std::size_t n) const;
    ForcingFunction abs() const;

    static ForcingFunction identity();
    static ForcingFunction constant(double c);
    static ForcingFunction indicator(State k);
    static ForcingFunction power(double exponent);
    /// Explicit values, `fill` beyond the end.
    static ForcingFunction values(std::vector<double> v, double fill = 0.0);
};

}  // namespace augtrunc

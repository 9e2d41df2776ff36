#include "augtrunc/forcing.hpp"

#include <cmath>
#include <utility>

namespace augtrunc {

Eigen::VectorXd ForcingFunction::restrict(std::size_t n) const {
    Eigen::VectorXd g(n + 1);
    for (State i = 0; i <= n; ++i) g(i) = eval(i);
    return g;
}

ForcingFunction ForcingFunction::abs() const {
    auto f = eval;
    return {[f](State i) { return std::abs(f(i)); }, std::nullopt, "|" + label + "|"};
}

ForcingFunction ForcingFunction::identity() {
    return {[](State i) { return static_cast<double>(i); }, std::nullopt, "identity"};
}

ForcingFunction ForcingFunction::constant(double c) {
    return {[c](State) { return c; }, c, "constant"};
}

ForcingFunction ForcingFunction::indicator(State k) {
    return {[k](State i) { return i == k ? 1.0 : 0.0; }, std::nullopt, "indicator"};
}

ForcingFunction ForcingFunction::power(double exponent) {
    return {[exponent](State i) { return std::pow(static_cast<double>(i), exponent); },
            std::nullopt, "power"};
}

ForcingFunction ForcingFunction::values(std::vector<double> v, double fill) {
    return {[v = std::move(v), fill](State i) { return i < v.size() ? v[i] : fill; }, std::nullopt,
            "values"};
}

}  // namespace augtrunc

#include <cmath>

#include "augtrunc/error.hpp"
#include "augtrunc/families.hpp"
#include "augtrunc/simulate.hpp"
#include "augtrunc/solver.hpp"
#include "doctest.h"
#include "generators.hpp"

using namespace augtrunc;

namespace {

FiniteKernel two_state() {
    Eigen::Matrix2d p;
    p << 0.5, 0.5, 0.5, 0.5;
    return make_kernel(ChainKind::Discrete, p);
}

// Within 4 standard errors, with room for rounding when the estimate is exact.
bool covers(const SimEstimate& e, double exact) {
    return std::abs(e.value - exact) <= 4.0 * e.se + 1e-12 * std::max(1.0, std::abs(exact));
}

bool same(const SimEstimate& a, const SimEstimate& b) {
    return a.value == b.value && a.se == b.se && a.count == b.count;
}

}  // namespace

TEST_CASE("two-state chain, 10^6 replications") {
    SimConfig c;
    c.replications = 1000000;
    const SimResult r = simulate_return(two_state(), c, Eigen::Vector2d(1.0, 0.0));
    CHECK(covers(r.tau, 2.0));
    CHECK(covers(r.sigma2, 0.25));
    CHECK(r.tau.count == 1000000);
    CHECK(r.tau.se > 0.0);
    // every cycle starting in 0 collects g(0) = 1 once
    CHECK(r.zeta.value == 1.0);
}

TEST_CASE("zero forcing") {
    gen::Gen g(5);
    for (auto kind : {ChainKind::Discrete, ChainKind::Continuous}) {
        const FiniteKernel k = g.irreducible(kind, 5);
        SimConfig c;
        c.replications = 5000;
        c.anchor = c.start = 2;
        const SimResult r = simulate_return(k, c, Eigen::VectorXd::Zero(5));
        CHECK(r.zeta.value == 0.0);
        CHECK(r.zeta2.value == 0.0);
        CHECK(r.sigma2.value == 0.0);
    }
}

TEST_CASE("censored example52 at n = 40") {
    const FiniteKernel k = build_kernel(make_builtin(family::Example52{3.0}), scheme::Censored{}, 40);
    SimConfig c;
    c.replications = 200000;
    c.seed = 42;
    const SimResult r = simulate_return(k, c, ForcingFunction::identity().restrict(40));
    CHECK(covers(r.sigma2, 20.0));
}

TEST_CASE("results do not depend on the thread count") {
    gen::Gen g(9);
    const FiniteKernel k = g.irreducible(ChainKind::Continuous, 7);
    const Eigen::VectorXd f = g.forcing(7);
    SimConfig c;
    c.replications = 30000;
    c.seed = 123;
    c.start = 3;
    const SimResult a = simulate_return(k, c, f);
    c.threads = 3;
    const SimResult b = simulate_return(k, c, f);
    const SimResult again = simulate_return(k, c, f);
    for (auto [x, y] : {std::pair{a.tau, b.tau}, {a.tau2, b.tau2}, {a.zeta, b.zeta}, {a.zeta2, b.zeta2},
                        {a.zeta_tau, b.zeta_tau}, {a.sigma2, b.sigma2}, {b.sigma2, again.sigma2}})
        CHECK(same(x, y));
    c.seed = 124;
    CHECK(simulate_return(k, c, f).tau.value != a.tau.value);
}

TEST_CASE("step cap") {
    SimConfig c;
    c.replications = 100000;
    c.max_steps = 1000;
    CHECK_THROWS_AS(simulate_return(two_state(), c, Eigen::Vector2d(1, 0)), Error);
    try {
        simulate_return(two_state(), c, Eigen::Vector2d(1, 0));
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::CapExceeded);
    }
    // the anchor is never reached from a transient start
    gen::Gen g(4);
    const FiniteKernel k = g.with_transients(ChainKind::Discrete, 3, 2);
    SimConfig d;
    d.replications = 10;
    d.start = 0;
    d.anchor = 4;
    d.max_steps = 200000;
    CHECK_THROWS_AS(simulate_return(k, d, Eigen::VectorXd::Ones(5)), Error);
}

TEST_CASE("configuration errors") {
    SimConfig c;
    c.replications = 0;
    CHECK_THROWS_AS(simulate_return(two_state(), c, Eigen::Vector2d(1, 0)), Error);
    SimConfig d;
    d.anchor = 5;
    CHECK_THROWS_AS(simulate_return(two_state(), d, Eigen::Vector2d(1, 0)), Error);
}

TEST_CASE("property: coverage of exact values") {
    std::size_t hit = 0, total = 0;
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
        gen::Gen g(seed * 7919);
        const auto kind = seed % 2 ? ChainKind::Discrete : ChainKind::Continuous;
        const FiniteKernel k = g.irreducible(kind, g.index(2, 10));
        const Eigen::VectorXd f = g.forcing(k.size());
        const std::size_t j = g.index(0, k.size() - 1), i = g.index(0, k.size() - 1);
        const ReturnMoments m = return_moments(k, f, j);
        SimConfig c;
        c.seed = seed;
        c.replications = 20000;
        c.start = i;
        c.anchor = j;
        const SimResult r = simulate_return(k, c, f);
        const auto ii = static_cast<Eigen::Index>(i);
        for (auto [e, x] : {std::pair{r.tau, m.m1(ii)}, {r.tau2, m.m2(ii)}, {r.zeta, m.h(ii)}, {r.zeta2, m.s(ii)},
                            {r.zeta_tau, m.u(ii)}}) {
            ++total;
            hit += covers(e, x);
        }
        if (i == j) {
            ++total;
            hit += covers(r.sigma2, variance(k, f, j).sigma2);
        }
    }
    CHECK(static_cast<double>(hit) >= 0.99 * static_cast<double>(total));
}

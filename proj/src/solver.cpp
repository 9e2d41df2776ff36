#include "augtrunc/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "augtrunc/error.hpp"
#include "augtrunc/tolerances.hpp"
#include "linalg.hpp"

namespace augtrunc {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

using Index = Eigen::Index;

void check_anchor(const FiniteKernel& k, std::size_t j) {
    if (j > k.level)
        throw Error(ErrorCode::InvalidParams,
                    "anchor " + std::to_string(j) + " beyond level " + std::to_string(k.level));
}

void check_forcing(const FiniteKernel& k, const Eigen::VectorXd& g) {
    if (static_cast<std::size_t>(g.size()) != k.size())
        throw Error(ErrorCode::InvalidParams, "forcing vector length does not match kernel");
    if (!g.allFinite()) throw Error(ErrorCode::InvalidParams, "forcing vector is not finite");
}

std::vector<Index> all_but(std::size_t n, std::size_t j) {
    std::vector<Index> idx;
    idx.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        if (i != j) idx.push_back(static_cast<Index>(i));
    return idx;
}

// Solves the first-passage system on {0..n} \ {j} for several right-hand
// sides (rows indexed by the kept states).
Eigen::MatrixXd passage_solve(const FiniteKernel& k, std::size_t j, Eigen::MatrixXd rhs) {
    const auto idx = all_but(k.size(), j);
    if (!detail::solve(detail::restrict_kernel(k.entries, idx), rhs))
        throw Error(ErrorCode::SingularSystem, "some state cannot reach anchor " + std::to_string(j));
    return rhs;
}

// sum_{k != j, k != i} K_ik x_k, plus K_ii x_i for discrete kernels (a
// self-loop does not end the excursion).
double step_sum(const FiniteKernel& k, std::size_t j, Index i, const Eigen::VectorXd& x) {
    double s = 0.0;
    for (Index c = 0; c < k.entries.cols(); ++c) {
        if (c == static_cast<Index>(j)) continue;
        if (c == i && k.kind == ChainKind::Continuous) continue;
        s += k.entries(i, c) * x(c);
    }
    return s;
}

Eigen::VectorXd scatter(const Eigen::VectorXd& inner, std::size_t n, std::size_t j) {
    Eigen::VectorXd full = Eigen::VectorXd::Zero(static_cast<Index>(n));
    Index r = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (i != j) full(static_cast<Index>(i)) = inner(r++);
    return full;
}

double dot(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    // Neumaier summation
    double sum = 0.0, comp = 0.0;
    for (Index i = 0; i < a.size(); ++i) {
        const double x = a(i) * b(i);
        const double t = sum + x;
        comp += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
        sum = t;
    }
    return sum + comp;
}

}  // namespace

Eigen::VectorXd invariant_gth(const FiniteKernel& k) {
    const auto member = closed_class(k);
    std::vector<Index> idx;
    for (std::size_t i = 0; i < member.size(); ++i)
        if (member[i]) idx.push_back(static_cast<Index>(i));
    const auto m = static_cast<Index>(idx.size());

    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, m);
    for (Index r = 0; r < m; ++r)
        for (Index c = 0; c < m; ++c)
            if (r != c) a(r, c) = k.entries(idx[static_cast<std::size_t>(r)], idx[static_cast<std::size_t>(c)]);

    std::vector<Index> rows, cols;
    for (Index n = m - 1; n > 0; --n) {
        double s = 0.0;
        cols.clear();
        for (Index c = 0; c < n; ++c)
            if (a(n, c) != 0.0) {
                s += a(n, c);
                cols.push_back(c);
            }
        if (!(s > 0.0)) throw Error(ErrorCode::NoClosedClass, "state elimination hit an absorbing state");
        rows.clear();
        for (Index r = 0; r < n; ++r)
            if (a(r, n) != 0.0) {
                a(r, n) /= s;
                rows.push_back(r);
            }
        for (auto r : rows)
            for (auto c : cols)
                if (r != c) a(r, c) += a(r, n) * a(n, c);
    }
    Eigen::VectorXd w(m);
    w(0) = 1.0;
    for (Index n = 1; n < m; ++n) {
        double s = 0.0;
        for (Index r = 0; r < n; ++r) s += w(r) * a(r, n);
        w(n) = s;
    }
    w /= w.sum();
    Eigen::VectorXd pi = Eigen::VectorXd::Zero(static_cast<Index>(k.size()));
    for (Index r = 0; r < m; ++r) pi(idx[static_cast<std::size_t>(r)]) = w(r);
    return pi;
}

double invariant_residual(const FiniteKernel& k, const Eigen::VectorXd& pi) {
    Eigen::RowVectorXd r = pi.transpose() * k.entries;
    if (k.kind == ChainKind::Discrete) r -= pi.transpose();
    return r.cwiseAbs().maxCoeff();
}

PoissonSolution poisson_solve(const FiniteKernel& k, const Eigen::VectorXd& g, std::size_t j) {
    check_anchor(k, j);
    check_forcing(k, g);
    PoissonSolution sol;
    sol.anchor = j;
    sol.pi = invariant_gth(k);
    sol.mean = dot(sol.pi, g);
    const Eigen::VectorXd gbar = g.array() - sol.mean;
    const std::size_t n = k.size();

    Eigen::MatrixXd rhs(static_cast<Index>(n - 1), 1);
    Index r = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (i != j) rhs(r++, 0) = gbar(static_cast<Index>(i));
    sol.f = scatter(passage_solve(k, j, std::move(rhs)).col(0), n, j);

    // Residual in difference form: sum_{k != i} K_ik (f_k - f_i) + g_bar_i.
    // The rounding floor of this evaluation is tracked alongside it.
    double worst = 0.0, floor = 0.0;
    for (Index i = 0; i < static_cast<Index>(n); ++i) {
        double s = gbar(i), scale = std::abs(gbar(i));
        for (Index c = 0; c < static_cast<Index>(n); ++c) {
            if (c == i) continue;
            const double t = k.entries(i, c) * (sol.f(c) - sol.f(i));
            s += t;
            scale += std::abs(t) + std::abs(k.entries(i, c)) * (std::abs(sol.f(c)) + std::abs(sol.f(i)));
        }
        worst = std::max(worst, std::abs(s));
        floor = std::max(floor, scale);
    }
    sol.residual = worst;
    const double allowed = tol::kResidual * (1.0 + gbar.cwiseAbs().maxCoeff()) + 64.0 * kEps * floor;
    if (!(worst <= allowed))
        throw Error(ErrorCode::NumericalFailure,
                    "Poisson residual " + std::to_string(worst) + " above " + std::to_string(allowed));
    return sol;
}

PoissonSolution poisson_solve(const FiniteKernel& k, const ForcingFunction& g, std::size_t j) {
    return poisson_solve(k, g.restrict(k.level), j);
}

ReturnMoments return_moments_dtmc(const FiniteKernel& k, const Eigen::VectorXd& g, std::size_t j) {
    if (k.kind != ChainKind::Discrete) throw Error(ErrorCode::InvalidParams, "expected a discrete kernel");
    check_anchor(k, j);
    check_forcing(k, g);
    const std::size_t n = k.size();
    const auto idx = all_but(n, j);
    const auto m = static_cast<Index>(idx.size());

    Eigen::MatrixXd first(m, 2);
    for (Index r = 0; r < m; ++r) {
        first(r, 0) = 1.0;
        first(r, 1) = g(idx[static_cast<std::size_t>(r)]);
    }
    first = passage_solve(k, j, std::move(first));
    ReturnMoments mo;
    mo.anchor = j;
    mo.m1 = scatter(first.col(0), n, j);
    mo.h = scatter(first.col(1), n, j);

    auto second_rhs = [&](Index i, Eigen::Vector3d& out) {
        const double pm = step_sum(k, j, i, mo.m1);
        const double ph = step_sum(k, j, i, mo.h);
        const double gi = g(i);
        out(0) = 1.0 + 2.0 * pm;                // m2
        out(1) = gi * gi + 2.0 * gi * ph;       // s
        out(2) = gi + gi * pm + ph;             // u
    };
    Eigen::MatrixXd second(m, 3);
    Eigen::Vector3d row;
    for (Index r = 0; r < m; ++r) {
        second_rhs(idx[static_cast<std::size_t>(r)], row);
        second.row(r) = row.transpose();
    }
    second = passage_solve(k, j, std::move(second));
    mo.m2 = scatter(second.col(0), n, j);
    mo.s = scatter(second.col(1), n, j);
    mo.u = scatter(second.col(2), n, j);

    // Anchor row: one step, then the excursion continues from the landing state.
    const auto jj = static_cast<Index>(j);
    second_rhs(jj, row);
    mo.m1(jj) = 1.0 + step_sum(k, j, jj, mo.m1);
    mo.h(jj) = g(jj) + step_sum(k, j, jj, mo.h);
    mo.m2(jj) = row(0) + step_sum(k, j, jj, mo.m2);
    mo.s(jj) = row(1) + step_sum(k, j, jj, mo.s);
    mo.u(jj) = row(2) + step_sum(k, j, jj, mo.u);
    return mo;
}

ReturnMoments return_moments_ctmc(const FiniteKernel& k, const Eigen::VectorXd& g, std::size_t j) {
    if (k.kind != ChainKind::Continuous) throw Error(ErrorCode::InvalidParams, "expected a continuous kernel");
    check_anchor(k, j);
    check_forcing(k, g);
    const std::size_t n = k.size();
    Eigen::VectorXd q(static_cast<Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        q(static_cast<Index>(i)) = k.exit_rate(i);
        if (!(q(static_cast<Index>(i)) > 0.0))
            throw Error(ErrorCode::ZeroRate, "state " + std::to_string(i) + " has zero exit rate");
    }
    const auto idx = all_but(n, j);
    const auto m = static_cast<Index>(idx.size());

    // Each equation is multiplied through by q_i, giving the -Q system.
    Eigen::MatrixXd first(m, 2);
    for (Index r = 0; r < m; ++r) {
        first(r, 0) = 1.0;
        first(r, 1) = g(idx[static_cast<std::size_t>(r)]);
    }
    first = passage_solve(k, j, std::move(first));
    ReturnMoments mo;
    mo.anchor = j;
    mo.m1 = scatter(first.col(0), n, j);
    mo.h = scatter(first.col(1), n, j);

    auto second_rhs = [&](Index i, Eigen::Vector3d& out) {
        const double qm = step_sum(k, j, i, mo.m1);
        const double qh = step_sum(k, j, i, mo.h);
        const double gi = g(i), qi = q(i);
        out(0) = 2.0 / qi * (1.0 + qm);                    // m2
        out(1) = 2.0 * gi / qi * (gi + qh);                // s
        out(2) = 2.0 * gi / qi + gi / qi * qm + qh / qi;   // u
    };
    Eigen::MatrixXd second(m, 3);
    Eigen::Vector3d row;
    for (Index r = 0; r < m; ++r) {
        second_rhs(idx[static_cast<std::size_t>(r)], row);
        second.row(r) = row.transpose();
    }
    second = passage_solve(k, j, std::move(second));
    mo.m2 = scatter(second.col(0), n, j);
    mo.s = scatter(second.col(1), n, j);
    mo.u = scatter(second.col(2), n, j);

    const auto jj = static_cast<Index>(j);
    const double qj = q(jj);
    second_rhs(jj, row);
    mo.m1(jj) = (1.0 + step_sum(k, j, jj, mo.m1)) / qj;
    mo.h(jj) = (g(jj) + step_sum(k, j, jj, mo.h)) / qj;
    mo.m2(jj) = (row(0) + step_sum(k, j, jj, mo.m2)) / qj;
    mo.s(jj) = (row(1) + step_sum(k, j, jj, mo.s)) / qj;
    mo.u(jj) = (row(2) + step_sum(k, j, jj, mo.u)) / qj;
    return mo;
}

ReturnMoments return_moments(const FiniteKernel& k, const Eigen::VectorXd& g, std::size_t j) {
    return k.kind == ChainKind::Discrete ? return_moments_dtmc(k, g, j) : return_moments_ctmc(k, g, j);
}

VarianceConstant combine_variance(const FiniteKernel& k, const Eigen::VectorXd& g,
                                  const PoissonSolution& p, const ReturnMoments& m) {
    const auto j = static_cast<Index>(p.anchor);
    const double mu = p.mean;
    const Eigen::VectorXd gbar = g.array() - mu;

    VarianceConstant v;
    v.regenerative = (m.s(j) - 2.0 * mu * m.u(j) + mu * mu * m.m2(j)) / m.m1(j);
    if (k.kind == ChainKind::Discrete) {
        const Eigen::VectorXd terms = 2.0 * gbar.cwiseProduct(p.f) - gbar.cwiseProduct(gbar);
        v.stationary = dot(p.pi, terms);
    } else {
        v.stationary = 2.0 * dot(p.pi, gbar.cwiseProduct(p.f));
    }

    // The regenerative route cancels s - 2 mu u + mu^2 m2; its rounding floor
    // scales with the magnitude of those terms.
    const double scale = (std::abs(m.s(j)) + 2.0 * std::abs(mu * m.u(j)) + mu * mu * m.m2(j)) / m.m1(j);
    const double allowed = tol::kRouteAgreement * (1.0 + std::abs(v.stationary)) + 64.0 * kEps * scale;
    if (!(std::abs(v.regenerative - v.stationary) <= allowed))
        throw Error(ErrorCode::RouteMismatch, "regenerative " + std::to_string(v.regenerative) +
                                                  " vs stationary " + std::to_string(v.stationary));
    if (v.stationary < -tol::kConsistency)
        throw Error(ErrorCode::NumericalFailure, "negative variance " + std::to_string(v.stationary));
    v.sigma2 = std::max(0.0, v.stationary);
    v.route = VarianceRoute::StationaryIdentity;
    return v;
}

Analysis analyze(const FiniteKernel& k, const Eigen::VectorXd& g, std::size_t j) {
    Analysis a;
    a.poisson = poisson_solve(k, g, j);
    a.moments = return_moments(k, g, j);
    a.variance = combine_variance(k, g, a.poisson, a.moments);
    return a;
}

VarianceConstant variance_dtmc(const FiniteKernel& k, const Eigen::VectorXd& g, std::size_t j) {
    if (k.kind != ChainKind::Discrete) throw Error(ErrorCode::InvalidParams, "expected a discrete kernel");
    return analyze(k, g, j).variance;
}

VarianceConstant variance_ctmc(const FiniteKernel& k, const Eigen::VectorXd& g, std::size_t j) {
    if (k.kind != ChainKind::Continuous) throw Error(ErrorCode::InvalidParams, "expected a continuous kernel");
    return analyze(k, g, j).variance;
}

VarianceConstant variance(const FiniteKernel& k, const Eigen::VectorXd& g, std::size_t j) {
    return analyze(k, g, j).variance;
}

}  // namespace augtrunc

#include "augtrunc/truncation.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "augtrunc/error.hpp"
#include "augtrunc/tolerances.hpp"
#include "linalg.hpp"

namespace augtrunc {

namespace {

// Largest outer level tried by adaptive censoring.
constexpr std::size_t kMaxOuterLevel = 4096;

double off_sum(const Eigen::MatrixXd& m, Eigen::Index i) {
    double s = 0.0;
    for (Eigen::Index k = 0; k < m.cols(); ++k)
        if (k != i) s += m(i, k);
    return s;
}

void fix_generator_diagonal(Eigen::MatrixXd& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, i) = -off_sum(m, i);
}

std::string linear_tag(std::size_t j) { return "linear(j=" + std::to_string(j) + ")"; }

}  // namespace

std::string scheme_name(const AugmentationScheme& s) {
    if (const auto* l = std::get_if<scheme::LinearColumn>(&s)) return linear_tag(l->anchor);
    if (std::holds_alternative<scheme::LastColumn>(s)) return "last_column";
    const auto& c = std::get<scheme::Censored>(s);
    if (c.exact) return "censored(exact)";
    return c.outer ? "censored(N=" + std::to_string(*c.outer) + ")" : "censored(auto)";
}

double FiniteKernel::exit_rate(std::size_t i) const {
    return off_sum(entries, static_cast<Eigen::Index>(i));
}

FiniteKernel make_kernel(ChainKind kind, Eigen::MatrixXd entries, std::string tag) {
    if (entries.rows() == 0 || entries.rows() != entries.cols())
        throw Error(ErrorCode::InvalidParams, "kernel matrix must be square and non-empty");
    FiniteKernel k{kind, static_cast<std::size_t>(entries.rows() - 1), std::move(entries), std::move(tag)};
    if (kind == ChainKind::Continuous) fix_generator_diagonal(k.entries);
    validate(k);
    return k;
}

FiniteKernel augment_linear(const SubKernel& sub, std::size_t j) {
    const std::size_t n = sub.level;
    if (j > n) throw Error(ErrorCode::InvalidParams, "anchor column beyond truncation level");
    FiniteKernel k{sub.kind, n, sub.entries, linear_tag(j)};
    for (std::size_t i = 0; i <= n; ++i) {
        double d = sub.deficit(static_cast<Eigen::Index>(i));
        if (d < -tol::kClip)
            throw Error(ErrorCode::NegativeDeficit, "row " + std::to_string(i) + " deficit " + std::to_string(d));
        if (d < 0.0) d = 0.0;
        k.entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) += d;
    }
    if (k.kind == ChainKind::Continuous) fix_generator_diagonal(k.entries);
    validate(k);
    return k;
}

FiniteKernel censor(const FiniteKernel& outer, std::size_t n) {
    const std::size_t big = outer.level;
    if (n > big) throw Error(ErrorCode::InvalidParams, "censoring level above outer level");
    if (n == big) {
        FiniteKernel k = outer;
        k.scheme_tag = "censored(N=" + std::to_string(big) + ")";
        return k;
    }

    const auto na = static_cast<Eigen::Index>(n + 1);
    const auto nb = static_cast<Eigen::Index>(big - n);
    const Eigen::MatrixXd& p = outer.entries;

    std::vector<Eigen::Index> idx_b(static_cast<std::size_t>(nb));
    for (Eigen::Index r = 0; r < nb; ++r) idx_b[static_cast<std::size_t>(r)] = na + r;
    // Solve (I - P_BB) X = P_BA, or (-Q_BB) X = Q_BA.
    Eigen::MatrixXd x = p.block(na, 0, nb, na);
    if (!detail::solve(detail::restrict_kernel(p, idx_b), x))
        throw Error(ErrorCode::SingularComplement, "censored block is not transient to {0.." + std::to_string(n) + "}");

    Eigen::MatrixXd c = p.topLeftCorner(na, na) + p.block(0, na, na, nb) * x;
    if (outer.kind == ChainKind::Continuous) {
        fix_generator_diagonal(c);
    } else {
        for (Eigen::Index i = 0; i < na; ++i) {
            const double s = c.row(i).sum();
            if (s > 0.0) c.row(i) /= s;  // removes rounding residue only
        }
    }
    FiniteKernel k{outer.kind, n, std::move(c), "censored(N=" + std::to_string(big) + ")"};
    validate(k);
    return k;
}

FiniteKernel censor_single_death(const ChainSpec& spec, std::size_t n) {
    if (spec.kind() != ChainKind::Continuous || !spec.is_single_death())
        throw Error(ErrorCode::NotSingleDeath, "exact censoring needs a single-death generator");
    SubKernel sub = truncate(spec, n);
    Eigen::MatrixXd& q = sub.entries;
    const auto nn = static_cast<Eigen::Index>(n);
    for (Eigen::Index i = 1; i <= nn; ++i) {
        if (!(q(i, i - 1) > 0.0))
            throw Error(ErrorCode::NotSingleDeath, "zero death rate in row " + std::to_string(i));
        for (Eigen::Index k = 0; k + 1 < i; ++k)
            if (q(i, k) != 0.0)
                throw Error(ErrorCode::NotSingleDeath, "row " + std::to_string(i) + " jumps down by more than one");
    }
    // Last column collects q_i^{(n)} = sum_{k >= n} q_ik in one closed-form tail.
    for (Eigen::Index i = 0; i < nn; ++i) q(i, nn) = spec.tail(static_cast<State>(i), n);
    fix_generator_diagonal(q);
    FiniteKernel k{ChainKind::Continuous, n, std::move(q), "censored(exact)"};
    validate(k);
    return k;
}

FiniteKernel censor_adaptive(const ChainSpec& spec, std::size_t n) {
    std::size_t outer = std::max<std::size_t>(4 * n, n + 8);
    if (spec.size()) outer = std::min(outer, *spec.size() - 1);
    auto at = [&](std::size_t level) {
        return censor(augment_linear(truncate(spec, level), level), n);
    };
    FiniteKernel prev = at(outer);
    if (spec.size() && outer == *spec.size() - 1) return prev;  // exact for finite chains
    while (true) {
        std::size_t next = 2 * outer;
        if (spec.size()) next = std::min(next, *spec.size() - 1);
        if (next > kMaxOuterLevel)
            throw Error(ErrorCode::NotConverged,
                        "censored entries still moving at outer level " + std::to_string(outer));
        FiniteKernel cur = at(next);
        const double change = (cur.entries - prev.entries).cwiseAbs().maxCoeff();
        if (change < tol::kCensorStable || (spec.size() && next == *spec.size() - 1)) {
            cur.scheme_tag = "censored(auto,N=" + std::to_string(next) + ")";
            return cur;
        }
        prev = std::move(cur);
        outer = next;
    }
}

FiniteKernel build_kernel(const ChainSpec& spec, const AugmentationScheme& s, std::size_t n) {
    if (const auto* l = std::get_if<scheme::LinearColumn>(&s)) return augment_linear(truncate(spec, n), l->anchor);
    if (std::holds_alternative<scheme::LastColumn>(s)) {
        FiniteKernel k = augment_linear(truncate(spec, n), n);
        k.scheme_tag = "last_column";
        return k;
    }
    const auto& c = std::get<scheme::Censored>(s);
    if (c.exact) return censor_single_death(spec, n);
    if (c.outer) {
        if (*c.outer < n) throw Error(ErrorCode::InvalidParams, "outer level below censoring level");
        return censor(augment_linear(truncate(spec, *c.outer), *c.outer), n);
    }
    if (spec.kind() == ChainKind::Continuous && spec.is_single_death()) return censor_single_death(spec, n);
    return censor_adaptive(spec, n);
}

std::vector<bool> closed_class(const FiniteKernel& k) {
    const auto n = static_cast<std::size_t>(k.entries.rows());
    std::vector<std::vector<std::size_t>> adj(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j && k.entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) > 0.0)
                adj[i].push_back(j);

    // Iterative Tarjan.
    constexpr std::size_t kUnset = static_cast<std::size_t>(-1);
    std::vector<std::size_t> index(n, kUnset), low(n, 0), comp(n, kUnset), stack;
    std::vector<bool> on_stack(n, false);
    std::vector<std::pair<std::size_t, std::size_t>> call;
    std::size_t counter = 0, ncomp = 0;
    for (std::size_t root = 0; root < n; ++root) {
        if (index[root] != kUnset) continue;
        call.push_back({root, 0});
        index[root] = low[root] = counter++;
        stack.push_back(root);
        on_stack[root] = true;
        while (!call.empty()) {
            auto& [v, pos] = call.back();
            if (pos < adj[v].size()) {
                const std::size_t w = adj[v][pos++];
                if (index[w] == kUnset) {
                    index[w] = low[w] = counter++;
                    stack.push_back(w);
                    on_stack[w] = true;
                    call.push_back({w, 0});
                } else if (on_stack[w]) {
                    low[v] = std::min(low[v], index[w]);
                }
                continue;
            }
            if (low[v] == index[v]) {
                std::size_t w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = false;
                    comp[w] = ncomp;
                } while (w != v);
                ++ncomp;
            }
            const std::size_t done = v;
            call.pop_back();
            if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[done]);
        }
    }

    std::vector<bool> closed(ncomp, true);
    for (std::size_t i = 0; i < n; ++i)
        for (auto j : adj[i])
            if (comp[j] != comp[i]) closed[comp[i]] = false;
    const auto count = std::count(closed.begin(), closed.end(), true);
    if (count == 0) throw Error(ErrorCode::NoClosedClass, "kernel has no closed class");
    if (count > 1)
        throw Error(ErrorCode::MultipleClosedClasses, std::to_string(count) + " closed classes");
    std::vector<bool> member(n);
    for (std::size_t i = 0; i < n; ++i) member[i] = closed[comp[i]];
    return member;
}

void validate(const FiniteKernel& k) {
    const auto& m = k.entries;
    if (m.rows() == 0 || m.rows() != m.cols() || static_cast<std::size_t>(m.rows()) != k.level + 1)
        throw Error(ErrorCode::NumericalFailure, "kernel shape does not match its level");
    if (!m.allFinite()) throw Error(ErrorCode::NumericalFailure, "kernel has non-finite entries");
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        const std::string row = "row " + std::to_string(i);
        if (k.kind == ChainKind::Discrete) {
            for (Eigen::Index j = 0; j < m.cols(); ++j)
                if (m(i, j) < 0.0 || m(i, j) > 1.0 + tol::kRowSum)
                    throw Error(ErrorCode::NumericalFailure, row + " has an entry outside [0,1]");
            if (std::abs(m.row(i).sum() - 1.0) > tol::kRowSum)
                throw Error(ErrorCode::NumericalFailure, row + " does not sum to 1");
        } else {
            const double q = off_sum(m, i);
            for (Eigen::Index j = 0; j < m.cols(); ++j)
                if (j != i && m(i, j) < 0.0)
                    throw Error(ErrorCode::NumericalFailure, row + " has a negative rate");
            if (std::abs(q + m(i, i)) > tol::kRowSum * std::max(1.0, q))
                throw Error(ErrorCode::NumericalFailure, row + " does not sum to 0");
        }
    }
    closed_class(k);
}

}  // namespace augtrunc

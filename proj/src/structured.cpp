#include "augtrunc/structured.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "augtrunc/error.hpp"

namespace augtrunc {

namespace {

std::size_t clamp_level(const ChainSpec& spec, std::size_t level) {
    if (spec.size()) return std::min(level, *spec.size() - 1);
    return level;
}

bool is_exhaustive(const ChainSpec& spec, std::size_t level) {
    return spec.size() && level >= *spec.size() - 1;
}

double max_abs(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

// Repeats `eval(K)` with doubling K until successive results agree.
template <class Eval>
StructuredResult settle(const ChainSpec& spec, std::size_t start, const TailControl& tc, Eval eval) {
    std::size_t k = clamp_level(spec, std::max(start, tc.initial_cutoff));
    Eigen::VectorXd prev = eval(k);
    if (is_exhaustive(spec, k)) return {prev, k, 0.0};
    while (true) {
        const std::size_t next = clamp_level(spec, 2 * k);
        if (next > tc.max_cutoff)
            throw Error(ErrorCode::TailNotConverged, "tail sums still moving at cutoff " + std::to_string(k));
        Eigen::VectorXd cur = eval(next);
        const double change = max_abs(cur - prev);
        if (change <= tc.tolerance * std::max(1.0, max_abs(cur)) || is_exhaustive(spec, next))
            return {cur, next, change};
        prev = std::move(cur);
        k = next;
    }
}

// D_m = sum_{k=m}^{K} G_m^{(k)} g_bar(k) / q_{k,k-1}, m = 1..K (index 0 unused).
std::vector<double> death_increments(const GTable& t, const ForcingFunction& g, double mean, std::size_t cutoff) {
    std::vector<double> w(cutoff + 1, 0.0), d(cutoff + 1, 0.0);
    for (std::size_t k = 1; k <= cutoff; ++k) w[k] = (g(k) - mean) / t.death(k);
    for (std::size_t m = 1; m <= cutoff; ++m) {
        double s = 0.0;
        for (std::size_t k = m; k <= cutoff; ++k) s += t.G(m, k) * w[k];
        d[m] = s;
    }
    return d;
}

Eigen::VectorXd death_poisson_values(const std::vector<double>& d, State j, std::size_t max_state) {
    Eigen::VectorXd f = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(max_state + 1));
    for (State i = 0; i <= max_state; ++i) {
        double s = 0.0;
        if (i < j) {
            for (State m = i + 1; m <= j; ++m) s -= d[m];
        } else {
            for (State m = j + 1; m <= i; ++m) s += d[m];
        }
        f(static_cast<Eigen::Index>(i)) = s;
    }
    return f;
}

void check_single_death(const ChainSpec& spec) {
    if (spec.kind() != ChainKind::Continuous || !spec.is_single_death())
        throw Error(ErrorCode::NotSingleDeath, "expected a single-death generator");
}

}  // namespace

// ---- F table ---------------------------------------------------------------

FTable::FTable(const ChainSpec& spec, std::size_t max_level) {
    if (spec.kind() != ChainKind::Discrete || !spec.is_single_birth())
        throw Error(ErrorCode::NotSingleBirth, "expected a single-birth transition matrix");
    if (spec.size() && max_level + 1 >= *spec.size())
        throw Error(ErrorCode::InvalidParams, "F table level needs a birth from every tabulated state");
    rows_.resize(max_level + 1);
    cum_.resize(max_level + 1);
    birth_.resize(max_level + 1);
    for (std::size_t m = 0; m <= max_level; ++m) {
        std::vector<long double> below(m, 0.0L);
        long double up = 0.0L;
        for (const auto& t : spec.row(m, m + 1)) {
            if (t.target == m + 1)
                up = t.value;
            else if (t.target < m)
                below[t.target] += t.value;
        }
        if (!(up > 0.0)) throw Error(ErrorCode::NotSingleBirth, "zero birth probability at " + std::to_string(m));
        if (spec.tail(m, m + 2) != 0.0)
            throw Error(ErrorCode::NotSingleBirth, "row " + std::to_string(m) + " jumps up by more than one");
        birth_[m] = up;
        auto& c = cum_[m];
        c.resize(m);
        long double run = 0.0L;
        for (std::size_t k = 0; k < m; ++k) c[k] = run += below[k];

        auto& f = rows_[m];
        f.assign(m + 1, 0.0L);
        f[m] = 1.0L;
        for (std::size_t i = 0; i < m; ++i) {
            long double s = 0.0L;
            for (std::size_t k = i; k < m; ++k) s += c[k] * rows_[k][i];
            f[i] = s / up;
        }
    }
}

double FTable::recursion_residual() const {
    long double worst = 0.0L;
    for (std::size_t m = 0; m < rows_.size(); ++m) {
        worst = std::max(worst, std::abs(rows_[m][m] - 1.0L));
        for (std::size_t i = 0; i < m; ++i) {
            long double s = 0.0L;
            for (std::size_t k = i; k < m; ++k) s += cum_[m][k] * rows_[k][i];
            const long double r = std::abs(rows_[m][i] * birth_[m] - s) / birth_[m];
            worst = std::max(worst, r / std::max(1.0L, rows_[m][i]));
        }
    }
    return static_cast<double>(worst);
}

// ---- G table ---------------------------------------------------------------

GTable::GTable(const ChainSpec& spec, std::size_t max_level) : spec_(&spec) {
    check_single_death(spec);
    cols_.push_back({1.0});
    tails_.push_back({});
    death_.push_back(0.0);
    extend(max_level);
}

void GTable::extend(std::size_t max_level) {
    if (spec_->size() && max_level >= *spec_->size())
        throw Error(ErrorCode::InvalidParams, "G table level beyond finite state space");
    for (std::size_t i = cols_.size(); i <= max_level; ++i) {
        double down = 0.0;
        for (const auto& t : spec_->row(i, i)) {
            if (t.target == i - 1)
                down = t.value;
            else if (t.target + 1 < i && t.value != 0.0)
                throw Error(ErrorCode::NotSingleDeath, "row " + std::to_string(i) + " jumps down by more than one");
        }
        if (!(down > 0.0)) throw Error(ErrorCode::NotSingleDeath, "zero death rate at " + std::to_string(i));
        death_.push_back(down);
        std::vector<double> tl(i);
        for (std::size_t m = 0; m < i; ++m) tl[m] = spec_->tail(m, i);
        tails_.push_back(std::move(tl));

        std::vector<double> col(i + 1, 0.0);
        col[i] = 1.0;
        for (std::size_t m = i - 1; m >= 1; --m) {
            double s = 0.0;
            for (std::size_t k = m + 1; k <= i; ++k) s += tails_[k][m] * col[k];
            col[m] = s / death_[m];
        }
        cols_.push_back(std::move(col));
    }
}

double GTable::recursion_residual() const {
    double worst = 0.0;
    for (std::size_t i = 1; i < cols_.size(); ++i) {
        worst = std::max(worst, std::abs(cols_[i][i] - 1.0));
        for (std::size_t m = 1; m < i; ++m) {
            double s = 0.0;
            for (std::size_t k = m + 1; k <= i; ++k) s += tails_[k][m] * cols_[i][k];
            const double r = std::abs(cols_[i][m] * death_[m] - s) / death_[m];
            worst = std::max(worst, r / std::max(1.0, cols_[i][m]));
        }
    }
    return worst;
}

// ---- solvers ---------------------------------------------------------------

Eigen::VectorXd single_birth_poisson(const ChainSpec& spec, const ForcingFunction& g, State j, double mean,
                                     std::size_t max_state) {
    if (spec.kind() != ChainKind::Discrete || !spec.is_single_birth())
        throw Error(ErrorCode::NotSingleBirth, "expected a single-birth transition matrix");
    if (j > max_state) throw Error(ErrorCode::InvalidParams, "anchor beyond the requested states");
    Eigen::VectorXd f = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(max_state + 1));
    if (max_state == 0) return f;
    const FTable t(spec, max_state - 1);

    // D_m = sum_{k<=m} F_m^{(k)} g_bar(k) / p_{k,k+1}
    std::vector<long double> w(max_state), d(max_state);
    for (std::size_t k = 0; k < max_state; ++k)
        w[k] = (static_cast<long double>(g(k)) - static_cast<long double>(mean)) / t.birth(k);
    for (std::size_t m = 0; m < max_state; ++m) {
        long double s = 0.0L;
        for (std::size_t k = 0; k <= m; ++k) s += t.F(m, k) * w[k];
        d[m] = s;
    }
    for (State i = 0; i <= max_state; ++i) {
        long double s = 0.0L;
        if (i < j) {
            for (State m = i; m < j; ++m) s += d[m];
        } else {
            for (State m = j; m < i; ++m) s -= d[m];
        }
        f(static_cast<Eigen::Index>(i)) = static_cast<double>(s);
    }
    return f;
}

StructuredResult single_death_poisson(const ChainSpec& spec, const ForcingFunction& g, State j, double mean,
                                      std::size_t max_state, const TailControl& tail) {
    check_single_death(spec);
    GTable t(spec, 1);
    const std::size_t need = std::max<std::size_t>(j, max_state);
    if (spec.size() && need >= *spec.size()) throw Error(ErrorCode::InvalidParams, "state beyond finite chain");
    return settle(spec, need + 1, tail, [&](std::size_t k) {
        t.extend(k);
        return death_poisson_values(death_increments(t, g, mean, k), j, max_state);
    });
}

Eigen::VectorXd single_death_poisson_truncated(const ChainSpec& spec, const ForcingFunction& g, State j,
                                               double mean, std::size_t n) {
    check_single_death(spec);
    if (j > n) throw Error(ErrorCode::InvalidParams, "anchor beyond truncation level");
    if (n == 0) return Eigen::VectorXd::Zero(1);
    const GTable t(spec, n);
    return death_poisson_values(death_increments(t, g, mean, n), j, n);
}

StructuredResult single_death_variance(const ChainSpec& spec, const ForcingFunction& g, const StationaryFn& pi,
                                       double mean, const TailControl& tail) {
    check_single_death(spec);
    GTable t(spec, 1);
    return settle(spec, 1, tail, [&](std::size_t k) {
        t.extend(k);
        const auto d = death_increments(t, g, mean, k);
        double inner = 0.0, total = 0.0;
        for (std::size_t i = 1; i <= k; ++i) {
            inner += d[i];
            total += pi(i) * (g(i) - mean) * inner;
        }
        Eigen::VectorXd v(1);
        v(0) = 2.0 * total;
        return v;
    });
}

std::vector<double> single_death_variance_partial(const ChainSpec& spec, const ForcingFunction& g,
                                                  const StationaryFn& pi, double mean, std::size_t n_max,
                                                  std::size_t cutoff) {
    check_single_death(spec);
    cutoff = std::max(cutoff, n_max);
    const GTable t(spec, cutoff);
    const auto d = death_increments(t, g, mean, cutoff);
    std::vector<double> out(n_max);
    double inner = 0.0, total = 0.0;
    for (std::size_t i = 1; i <= n_max; ++i) {
        inner += d[i];
        total += 2.0 * pi(i) * (g(i) - mean) * inner;
        out[i - 1] = total;
    }
    return out;
}

StructuredResult birth_death_variance(const ChainSpec& spec, const ForcingFunction& g, const StationaryFn& pi,
                                      double mean, const TailControl& tail) {
    if (spec.kind() != ChainKind::Continuous || spec.structure() != Structure::BirthDeath)
        throw Error(ErrorCode::NotBirthDeath, "expected a birth-death generator");
    return settle(spec, 1, tail, [&](std::size_t k) {
        std::vector<double> w(k + 1), p(k + 1);
        for (std::size_t i = 0; i <= k; ++i) {
            p[i] = pi(i);
            w[i] = p[i] * (g(i) - mean);
        }
        // S_i from the left while the left mass is at most 1/2, from the right
        // (as minus the tail) afterwards, so the cancellation in sum pi g_bar = 0
        // never hits a partial sum.
        std::vector<double> right(k + 2, 0.0);
        for (std::size_t i = k + 1; i-- > 0;) right[i] = right[i + 1] + w[i];
        double left = 0.0, mass = 0.0, total = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            left += w[i];
            mass += p[i];
            const double s = mass <= 0.5 ? left : -right[i + 1];
            const double birth = spec.entry(i, i + 1);
            if (!(birth > 0.0)) throw Error(ErrorCode::NotBirthDeath, "zero birth rate at " + std::to_string(i));
            total += s * s / (birth * p[i]);
        }
        Eigen::VectorXd v(1);
        v(0) = 2.0 * total;
        return v;
    });
}

}  // namespace augtrunc

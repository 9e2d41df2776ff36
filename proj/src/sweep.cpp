#include "augtrunc/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <thread>

#include "augtrunc/error.hpp"
#include "augtrunc/solver.hpp"
#include "json.hpp"

namespace augtrunc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Series {
    std::vector<std::size_t> n;
    std::vector<double> v;
};

Series finite_only(const std::vector<std::size_t>& levels, const std::vector<double>& values) {
    Series s;
    for (std::size_t k = 0; k < values.size(); ++k)
        if (std::isfinite(values[k])) {
            s.n.push_back(levels[k]);
            s.v.push_back(values[k]);
        }
    return s;
}

bool converged(const std::vector<double>& v, std::size_t w, double rtol) {
    const double last = v.back();
    const double band = rtol * (1.0 + std::abs(last));
    const auto lo = v.end() - static_cast<std::ptrdiff_t>(w);
    const auto [mn, mx] = std::minmax_element(lo, v.end());
    return *mx - *mn <= band;
}

bool diverging(const std::vector<double>& v, std::size_t w) {
    const std::size_t start = v.size() - w;
    double prev_step = kNaN;
    bool steps_hold = true;
    for (std::size_t k = start + 1; k < v.size(); ++k) {
        const double step = std::abs(v[k]) - std::abs(v[k - 1]);
        if (!(step > 0.0)) return false;
        if (std::isfinite(prev_step) && step < 0.99 * prev_step) steps_hold = false;
        prev_step = step;
    }
    return std::abs(v.back()) >= 2.0 * std::abs(v[start]) || steps_hold;
}

// Converged or Diverging, else Inconclusive.
ColumnDiagnosis classify(const std::vector<double>& v, const DiagnosisTolerances& tol) {
    ColumnDiagnosis d;
    if (v.size() < tol.window) return d;
    if (converged(v, tol.window, tol.rtol)) {
        d.verdict = Verdict::Converged;
        d.limit = v.back();
    } else if (diverging(v, tol.window)) {
        d.verdict = Verdict::Diverging;
    }
    return d;
}

std::string describe(const ColumnDiagnosis& d) {
    std::string s = to_string(d.verdict);
    if (d.limit) {
        char buf[48];
        std::snprintf(buf, sizeof buf, "(%.10g)", *d.limit);
        s += buf;
    }
    return s;
}

void put_number(std::string& out, double x) {
    if (!std::isfinite(x)) return;
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    out += buf;
}

nlohmann::json number_or_null(double x) {
    return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr);
}

SweepRow compute_row(const SweepConfig& cfg, const ChainSpec& spec, std::size_t n) {
    SweepRow row;
    row.n = n;
    row.f.assign(cfg.probes.size(), kNaN);
    row.tau.assign(cfg.probes.size(), kNaN);
    const auto t0 = std::chrono::steady_clock::now();
    try {
        const FiniteKernel k = build_kernel(spec, cfg.scheme, n);
        const Eigen::VectorXd g = cfg.g.restrict(n);
        row.pi_g = invariant_gth(k).dot(g);
        const PoissonSolution p = poisson_solve(k, g, cfg.anchor);
        row.pi_g = p.mean;
        row.residual = p.residual;
        for (std::size_t q = 0; q < cfg.probes.size(); ++q)
            row.f[q] = p.f(static_cast<Eigen::Index>(cfg.probes[q]));
        const ReturnMoments m = return_moments(k, g, cfg.anchor);
        for (std::size_t q = 0; q < cfg.probes.size(); ++q)
            row.tau[q] = m.m1(static_cast<Eigen::Index>(cfg.probes[q]));
        row.sigma2 = combine_variance(k, g, p, m).sigma2;
        row.ok = true;
    } catch (const std::exception& e) {
        row.error = e.what();
    }
    row.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return row;
}

}  // namespace

std::vector<std::size_t> Grid::levels() const {
    std::vector<std::size_t> out;
    if (step == 0) return out;
    for (std::size_t n = n_min; n <= n_max; n += step) out.push_back(n);
    return out;
}

void SweepConfig::validate() const {
    if (grid.step == 0) throw Error(ErrorCode::InvalidConfig, "grid step must be positive");
    if (grid.n_min > grid.n_max) throw Error(ErrorCode::InvalidConfig, "grid is empty (n_min > n_max)");
    std::size_t floor = anchor;
    for (auto p : probes) floor = std::max(floor, p);
    if (grid.n_min < floor)
        throw Error(ErrorCode::InvalidConfig,
                    "n_min " + std::to_string(grid.n_min) + " is below the anchor or a probe (" +
                        std::to_string(floor) + ")");
    if (const auto* l = std::get_if<scheme::LinearColumn>(&scheme); l && l->anchor > grid.n_min)
        throw Error(ErrorCode::InvalidConfig, "linear scheme column beyond n_min");
    if (tolerances.window < 2) throw Error(ErrorCode::InvalidConfig, "diagnosis window must be at least 2");
    if (!(tolerances.rtol > 0.0)) throw Error(ErrorCode::InvalidConfig, "diagnosis rtol must be positive");
    if (!g.eval) throw Error(ErrorCode::InvalidConfig, "no forcing function");
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::Converged: return "Converged";
        case Verdict::Diverging: return "Diverging";
        case Verdict::Oscillating: return "Oscillating";
        case Verdict::Inconclusive: return "Inconclusive";
    }
    return "Inconclusive";
}

const ColumnDiagnosis* Diagnosis::column(const std::string& name) const {
    for (const auto& c : columns)
        if (c.column == name) return &c;
    return nullptr;
}

ColumnDiagnosis diagnose_column(const std::string& name, const std::vector<std::size_t>& levels,
                                const std::vector<double>& values, const DiagnosisTolerances& tol) {
    const Series s = finite_only(levels, values);
    ColumnDiagnosis d = classify(s.v, tol);
    d.column = name;
    if (d.verdict == Verdict::Converged) {
        d.detail = "last " + std::to_string(tol.window) + " values agree";
        return d;
    }

    std::vector<double> even, odd;
    for (std::size_t k = 0; k < s.v.size(); ++k) (s.n[k] % 2 == 0 ? even : odd).push_back(s.v[k]);
    const ColumnDiagnosis de = classify(even, tol), dodd = classify(odd, tol);
    if (de.verdict != Verdict::Inconclusive && dodd.verdict != Verdict::Inconclusive) {
        bool differ = de.verdict != dodd.verdict;
        if (!differ && de.limit && dodd.limit) {
            const double band = tol.rtol * (1.0 + std::max(std::abs(*de.limit), std::abs(*dodd.limit)));
            differ = std::abs(*de.limit - *dodd.limit) > band;
        }
        if (differ) {
            d.verdict = Verdict::Oscillating;
            d.limit.reset();
            d.detail = "even n: " + describe(de) + ", odd n: " + describe(dodd);
            return d;
        }
    }
    if (d.verdict == Verdict::Diverging)
        d.detail = "|value| increasing over the last " + std::to_string(tol.window) + " rows";
    else if (s.v.size() < tol.window)
        d.detail = "fewer than " + std::to_string(tol.window) + " usable values";
    return d;
}

Diagnosis diagnose(const std::vector<SweepRow>& rows, const std::vector<std::size_t>& probes,
                   const DiagnosisTolerances& tol) {
    if (rows.size() < std::max<std::size_t>(tol.window, 4))
        throw Error(ErrorCode::TooFewRows, std::to_string(rows.size()) + " rows, need at least " +
                                               std::to_string(std::max<std::size_t>(tol.window, 4)));
    std::vector<std::size_t> levels;
    for (const auto& r : rows) levels.push_back(r.n);
    auto column = [&](auto pick) {
        std::vector<double> v;
        for (const auto& r : rows) v.push_back(pick(r));
        return v;
    };

    Diagnosis d;
    d.window = tol.window;
    d.columns.push_back(diagnose_column("pi_g", levels, column([](const SweepRow& r) { return r.pi_g; }), tol));
    for (std::size_t q = 0; q < probes.size(); ++q)
        d.columns.push_back(diagnose_column("f_" + std::to_string(probes[q]), levels,
                                            column([q](const SweepRow& r) { return r.f[q]; }), tol));
    d.columns.push_back(
        diagnose_column("sigma2", levels, column([](const SweepRow& r) { return r.sigma2; }), tol));

    auto any = [&](Verdict v) {
        return std::any_of(d.columns.begin(), d.columns.end(), [v](const auto& c) { return c.verdict == v; });
    };
    auto all = [&](Verdict v) {
        return std::all_of(d.columns.begin(), d.columns.end(), [v](const auto& c) { return c.verdict == v; });
    };
    if (any(Verdict::Oscillating))
        d.verdict = Verdict::Oscillating;
    else if (any(Verdict::Diverging))
        d.verdict = Verdict::Diverging;
    else if (all(Verdict::Converged))
        d.verdict = Verdict::Converged;
    else
        d.verdict = Verdict::Inconclusive;
    return d;
}

SweepReport run_sweep(const SweepConfig& cfg, unsigned threads) {
    cfg.validate();
    const ChainSpec spec = make_builtin(cfg.model);
    if (spec.size()) {
        std::size_t top = *spec.size() - 1;
        if (cfg.grid.n_max > top)
            throw Error(ErrorCode::InvalidConfig, "n_max beyond the last state " + std::to_string(top));
    }

    const std::vector<std::size_t> levels = cfg.grid.levels();
    SweepReport r;
    r.model = family_name(cfg.model);
    r.scheme = scheme_name(cfg.scheme);
    r.forcing = cfg.g.label;
    r.anchor = cfg.anchor;
    r.probes = cfg.probes;
    r.timing = cfg.output.timing;
    r.rows.resize(levels.size());

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k; (k = next++) < levels.size();) r.rows[k] = compute_row(cfg, spec, levels[k]);
    };
    const unsigned nthreads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(levels.size())));
    if (nthreads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < nthreads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    if (r.rows.size() >= std::max<std::size_t>(cfg.tolerances.window, 4))
        r.diagnosis = diagnose(r.rows, cfg.probes, cfg.tolerances);
    else
        r.diagnosis.window = cfg.tolerances.window;
    return r;
}

std::string to_csv(const SweepReport& r) {
    std::string out = "n,pi_g";
    for (auto p : r.probes) out += ",f_" + std::to_string(p);
    out += ",sigma2,residual,ms\n";
    for (const auto& row : r.rows) {
        out += std::to_string(row.n);
        out += ',';
        put_number(out, row.pi_g);
        for (double v : row.f) {
            out += ',';
            put_number(out, v);
        }
        out += ',';
        put_number(out, row.sigma2);
        out += ',';
        put_number(out, row.residual);
        out += ',';
        if (r.timing) put_number(out, row.ms);
        out += '\n';
    }
    return out;
}

std::string to_json(const SweepReport& r) {
    using nlohmann::json;
    json rows = json::array();
    for (const auto& row : r.rows) {
        json f = json::object(), tau = json::object();
        for (std::size_t q = 0; q < r.probes.size(); ++q) {
            f[std::to_string(r.probes[q])] = number_or_null(row.f[q]);
            tau[std::to_string(r.probes[q])] = number_or_null(row.tau[q]);
        }
        json jr = {{"n", row.n},
                   {"ok", row.ok},
                   {"pi_g", number_or_null(row.pi_g)},
                   {"f", f},
                   {"return_time", tau},
                   {"sigma2", number_or_null(row.sigma2)},
                   {"residual", number_or_null(row.residual)}};
        if (r.timing) jr["ms"] = row.ms;
        if (!row.ok) jr["error"] = row.error;
        rows.push_back(std::move(jr));
    }
    json cols = json::array();
    for (const auto& c : r.diagnosis.columns) {
        json jc = {{"column", c.column}, {"verdict", to_string(c.verdict)}, {"detail", c.detail}};
        if (c.limit) jc["limit"] = *c.limit;
        cols.push_back(std::move(jc));
    }
    json doc = {{"model", r.model},
                {"scheme", r.scheme},
                {"g", r.forcing},
                {"anchor", r.anchor},
                {"probes", r.probes},
                {"rows", rows},
                {"diagnosis",
                 {{"verdict", to_string(r.diagnosis.verdict)},
                  {"window", r.diagnosis.window},
                  {"rule",
                   "heuristic: Converged when the last W values agree to rtol; Oscillating when the even-n and "
                   "odd-n subsequences settle differently; Diverging when |value| keeps increasing"},
                  {"columns", cols}}}};
    return doc.dump(2) + "\n";
}

}  // namespace augtrunc

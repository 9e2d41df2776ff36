#include "augtrunc/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>
#include <thread>
#include <vector>

#include "augtrunc/error.hpp"
#include "augtrunc/solver.hpp"

namespace augtrunc {

namespace {

constexpr std::size_t kBlock = 4096;

std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// SplitMix64 stream keyed by (seed, replication).
class Stream {
public:
    Stream(std::uint64_t seed, std::uint64_t rep) : state_(mix(seed ^ mix(rep))) {}
    double uniform() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        z ^= z >> 31;
        return static_cast<double>(z >> 11) * 0x1.0p-53;
    }

private:
    std::uint64_t state_;
};

struct Accumulator {
    double sum = 0.0, comp = 0.0;
    void add(double x) {
        const double t = sum + x;
        comp += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
        sum = t;
    }
    void merge(const Accumulator& o) {
        add(o.sum);
        add(o.comp);
    }
    double value() const { return sum + comp; }
};

enum Slot { kTau, kTau2, kZeta, kZeta2, kZetaTau, kTau4, kZeta4, kZetaTau2, kY, kY2, kYTau, kSlots };

struct Sums {
    Accumulator s[kSlots];
    void merge(const Sums& o) {
        for (int i = 0; i < kSlots; ++i) s[i].merge(o.s[i]);
    }
};

// Cumulative jump distribution per state.
struct JumpTable {
    std::vector<std::vector<double>> cum;
    std::vector<std::vector<std::size_t>> target;
    std::vector<double> rate;  // continuous only
};

JumpTable build_table(const FiniteKernel& k) {
    const std::size_t n = k.size();
    JumpTable t;
    t.cum.resize(n);
    t.target.resize(n);
    t.rate.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        double total = 0.0;
        for (std::size_t c = 0; c < n; ++c) {
            const double v = k.entries(ii, static_cast<Eigen::Index>(c));
            if (k.kind == ChainKind::Continuous && c == i) continue;
            if (v <= 0.0) continue;
            total += v;
            t.cum[i].push_back(total);
            t.target[i].push_back(c);
        }
        if (k.kind == ChainKind::Continuous) t.rate[i] = total;
        for (double& c : t.cum[i]) c /= total;
        if (!t.cum[i].empty()) t.cum[i].back() = 1.0;
    }
    return t;
}

std::size_t draw(const JumpTable& t, std::size_t i, double u) {
    const auto& c = t.cum[i];
    const auto pos = std::upper_bound(c.begin(), c.end(), u) - c.begin();
    return t.target[i][static_cast<std::size_t>(std::min<std::ptrdiff_t>(pos, static_cast<std::ptrdiff_t>(c.size()) - 1))];
}

SimEstimate mean_estimate(double sum, double sum_sq, std::size_t n) {
    const double nn = static_cast<double>(n);
    const double m = sum / nn;
    const double var = n > 1 ? std::max(0.0, (sum_sq - nn * m * m) / (nn - 1.0)) : 0.0;
    return {m, std::sqrt(var / nn), n};
}

}  // namespace

SimResult simulate_return(const FiniteKernel& k, const SimConfig& cfg, const Eigen::VectorXd& g) {
    if (cfg.replications == 0) throw Error(ErrorCode::InvalidParams, "replications must be positive");
    if (cfg.max_steps == 0) throw Error(ErrorCode::InvalidParams, "step cap must be positive");
    if (cfg.start > k.level || cfg.anchor > k.level)
        throw Error(ErrorCode::InvalidParams, "start or anchor beyond kernel level");
    if (static_cast<std::size_t>(g.size()) != k.size())
        throw Error(ErrorCode::InvalidParams, "forcing vector length does not match kernel");

    const double mu = invariant_gth(k).dot(g);
    const JumpTable table = build_table(k);
    const bool continuous = k.kind == ChainKind::Continuous;
    for (std::size_t i = 0; i < k.size(); ++i)
        if (table.cum[i].empty())
            throw Error(continuous ? ErrorCode::ZeroRate : ErrorCode::NumericalFailure,
                        "state " + std::to_string(i) + " has no jumps");

    const std::size_t blocks = (cfg.replications + kBlock - 1) / kBlock;
    std::vector<Sums> per_block(blocks);
    std::atomic<std::uint64_t> steps{0};
    std::atomic<bool> exhausted{false};
    std::atomic<std::size_t> next_block{0};

    auto run_block = [&](std::size_t b) {
        Sums& out = per_block[b];
        const std::size_t lo = b * kBlock, hi = std::min(cfg.replications, lo + kBlock);
        std::uint64_t local = 0;
        for (std::size_t r = lo; r < hi; ++r) {
            Stream rng(cfg.seed, r);
            std::size_t x = cfg.start;
            double tau = 0.0, zeta = 0.0;
            do {
                if (continuous) {
                    const double hold = -std::log1p(-rng.uniform()) / table.rate[x];
                    tau += hold;
                    zeta += g(static_cast<Eigen::Index>(x)) * hold;
                } else {
                    tau += 1.0;
                    zeta += g(static_cast<Eigen::Index>(x));
                }
                x = draw(table, x, rng.uniform());
                if ((++local & 0xffff) == 0) {
                    if (steps.fetch_add(0x10000) + 0x10000 > cfg.max_steps) {
                        exhausted = true;
                        return;
                    }
                }
            } while (x != cfg.anchor);
            const double y = (zeta - mu * tau) * (zeta - mu * tau);
            out.s[kTau].add(tau);
            out.s[kTau2].add(tau * tau);
            out.s[kTau4].add(tau * tau * tau * tau);
            out.s[kZeta].add(zeta);
            out.s[kZeta2].add(zeta * zeta);
            out.s[kZeta4].add(zeta * zeta * zeta * zeta);
            out.s[kZetaTau].add(zeta * tau);
            out.s[kZetaTau2].add(zeta * zeta * tau * tau);
            out.s[kY].add(y);
            out.s[kY2].add(y * y);
            out.s[kYTau].add(y * tau);
        }
        if (steps.fetch_add(local & 0xffff) + (local & 0xffff) > cfg.max_steps) exhausted = true;
    };
    auto worker = [&] {
        for (std::size_t b; !exhausted && (b = next_block++) < blocks;) run_block(b);
    };
    const unsigned nthreads = std::max(1u, std::min<unsigned>(cfg.threads, static_cast<unsigned>(blocks)));
    if (nthreads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < nthreads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (exhausted)
        throw Error(ErrorCode::CapExceeded, "more than " + std::to_string(cfg.max_steps) +
                                                " steps; the anchor may be unreachable");

    Sums total;
    for (const auto& b : per_block) total.merge(b);
    const std::size_t n = cfg.replications;
    auto v = [&](Slot s) { return total.s[s].value(); };

    SimResult res;
    res.tau = mean_estimate(v(kTau), v(kTau2), n);
    res.tau2 = mean_estimate(v(kTau2), v(kTau4), n);
    res.zeta = mean_estimate(v(kZeta), v(kZeta2), n);
    res.zeta2 = mean_estimate(v(kZeta2), v(kZeta4), n);
    res.zeta_tau = mean_estimate(v(kZetaTau), v(kZetaTau2), n);

    // Ratio estimator mean(Y) / mean(tau) with a delta-method standard error.
    const double nn = static_cast<double>(n);
    const double ybar = v(kY) / nn, tbar = v(kTau) / nn;
    const double ratio = ybar / tbar;
    double se = 0.0;
    if (n > 1) {
        const double var_y = (v(kY2) - nn * ybar * ybar) / (nn - 1.0);
        const double var_t = (v(kTau2) - nn * tbar * tbar) / (nn - 1.0);
        const double cov = (v(kYTau) - nn * ybar * tbar) / (nn - 1.0);
        const double var_r = (var_y - 2.0 * ratio * cov + ratio * ratio * var_t) / (tbar * tbar);
        se = std::sqrt(std::max(0.0, var_r) / nn);
    }
    res.sigma2 = {ratio, se, n};
    return res;
}

}  // namespace augtrunc

#include "augtrunc/closed_forms.hpp"

#include <cmath>
#include <memory>

#include "augtrunc/error.hpp"

namespace augtrunc::reference {

namespace {

// a_i decays like 2^{-i/2}; 400 terms put the neglected tail far below 1e-40.
constexpr std::size_t kSection2Terms = 400;

const double kLn2 = std::log(2.0);
const double kL = 1.0 + 2.0 * std::log(2.0);  // 1 + ln 4

}  // namespace

// ---- two-column chain ------------------------------------------------------

Section2::Section2() : a_(kSection2Terms) {
    a_[0] = 1.0;
    for (std::size_t i = 1; i < kSection2Terms; ++i) a_[i] = a_[i - 1] * p(i - 1);
    double total = 0.0, odd = 0.0, odd_weighted = 0.0;
    for (std::size_t i = kSection2Terms; i-- > 0;) {
        total += a_[i];
        if (i % 2 == 1) {
            odd += a_[i];
            odd_weighted += static_cast<double>(i) * a_[i];
        }
    }
    pi0_ = 1.0 / total;
    c_ = odd_weighted / odd;
}

double Section2::q(State i) {
    if (i == 0 || i % 2 == 1) return 0.5;
    return std::pow(3.0, -static_cast<double>(i / 2));
}

double Section2::p(State i) { return 1.0 - q(i); }

double Section2::a(State i) const {
    if (i < a_.size()) return a_[i];
    double v = a_.back();
    for (std::size_t k = a_.size() - 1; k < i; ++k) v *= p(k);
    return v;
}

double Section2::pi(State i) const { return a(i) * pi0_; }

double Section2::g(int g_choice, State i) const {
    if (g_choice == 2 && i % 2 == 0) return c_;
    return static_cast<double>(i);
}

double Section2::mean(int g_choice) const {
    if (g_choice == 2) return c_;
    double s = 0.0;
    for (std::size_t i = a_.size(); i-- > 1;) s += static_cast<double>(i) * a_[i];
    return s * pi0_;
}

std::vector<double> Section2::last_column_pi(std::size_t n) const {
    if (n == 0) return {1.0};
    std::vector<double> w(n + 1);
    for (std::size_t i = 0; i < n; ++i) w[i] = a(i);
    w[n] = a(n) / q(n);
    double total = 0.0;
    for (double v : w) total += v;
    for (double& v : w) v /= total;
    return w;
}

double Section2::last_column_mean(std::size_t n, int g_choice) const {
    const auto w = last_column_pi(n);
    double s = 0.0;
    for (std::size_t i = 0; i <= n; ++i) s += w[i] * g(g_choice, i);
    return s;
}

double Section2::f0(State i, double mean, const std::function<double(State)>& g) {
    // f0(i) = (f0(i-1) + mean - g(i-1)) / p_{i-1}
    double f = 0.0;
    for (State m = 0; m < i; ++m) f = (f + mean - g(m)) / p(m);
    return f;
}

// ---- geometric single-death chain -----------------------------------------

Example52::Example52(double b) : b_(b) {
    if (!(b > 2.0) || !std::isfinite(b)) throw Error(ErrorCode::InvalidParams, "example52 needs b > 2");
}

double Example52::pi(State i) const {
    return (b_ - 2.0) * std::pow(b_ - 1.0, -static_cast<double>(i + 1));
}

double Example52::mean_identity() const { return 1.0 / (b_ - 2.0); }

double Example52::f(State j, State i) const {
    const double di = static_cast<double>(i), dj = static_cast<double>(j);
    return (di - dj) * ((di + dj + 1.0) * (b_ - 1.0) - 2.0) / (2.0 * (b_ - 2.0));
}

double Example52::sigma2() const {
    const double b = b_;
    return (2 * b * b * b - 6 * b * b + 8 * b - 4) / std::pow(b - 2.0, 4);
}

double Example52::tail_rate(State n, State k) const {
    if (n == 0) return std::pow(b_, -static_cast<double>(k));
    return std::pow(b_, -static_cast<double>(k - n + 1));
}

double Example52::G(State n, State i) const {
    if (n == i) return 1.0;
    return 1.0 / (b_ * std::pow(b_ - 1.0, static_cast<double>(i - n)));
}

// ---- branching process -----------------------------------------------------

double Example53::pi(State i) {
    if (i == 0) return 1.0 / kL;
    return 1.0 / (static_cast<double>(i) * std::pow(2.0, static_cast<double>(i - 1)) * kL);
}

double Example53::mean_identity() { return 2.0 / kL; }

double Example53::h(State n) {
    // h_n = 1/n + sum_{k>n} 1 / (3 k 2^{k-n})
    double s = 0.0, w = 1.0;
    for (State k = n + 1; k < n + 200; ++k) {
        w *= 0.5;
        const double term = w / (3.0 * static_cast<double>(k));
        s += term;
        if (term < 1e-20 * s) break;
    }
    return 1.0 / static_cast<double>(n) + s;
}

double Example53::h_log_form(State n) {
    double partial = 0.0;
    for (State k = 1; k <= n; ++k)
        partial += 1.0 / (static_cast<double>(k) * std::pow(2.0, static_cast<double>(k)));
    return 1.0 / static_cast<double>(n) + std::pow(2.0, static_cast<double>(n)) / 3.0 * (kLn2 - partial);
}

double Example53::f(State j, State i) {
    const double lin = 4.0 / 3.0 * (static_cast<double>(i) - static_cast<double>(j));
    double s = 0.0;
    if (i < j) {
        for (State n = i + 1; n <= j; ++n) s += h(n);
        return lin + 2.0 / kL * s;
    }
    for (State n = j + 1; n <= i; ++n) s += h(n);
    return lin - 2.0 / kL * s;
}

double Example53::tail_rate(State n, State k) {
    if (n == 0) return std::pow(3.0, -static_cast<double>(k - 1));
    return static_cast<double>(n) / (2.0 * std::pow(3.0, static_cast<double>(k - n)));
}

double Example53::G(State n, State i) {
    if (n == i) return 1.0;
    return 1.0 / (3.0 * std::pow(2.0, static_cast<double>(i - n)));
}

double Example53::sigma2_term(State i) {
    double hsum = 0.0;
    for (State n = 1; n <= i; ++n) hsum += h(n);
    const double di = static_cast<double>(i);
    return 2.0 / kL / (di * std::pow(2.0, di - 1.0)) * (di - 2.0 / kL) *
           (4.0 / 3.0 * di - 2.0 / kL * hsum);
}

double Example53::sigma2_partial(std::size_t n) {
    double total = 0.0, hsum = 0.0;
    for (State i = 1; i <= n; ++i) {
        hsum += h(i);
        const double di = static_cast<double>(i);
        total += 2.0 / kL / (di * std::pow(2.0, di - 1.0)) * (di - 2.0 / kL) *
                 (4.0 / 3.0 * di - 2.0 / kL * hsum);
    }
    return total;
}

double Example53::sigma2() { return sigma2_partial(200); }

double Example53::error_bound(std::size_t n) {
    // sum_{i>=n} i / 2^{i-2} = (n+1) 2^{3-n}
    return static_cast<double>(n + 1) * std::pow(2.0, 3.0 - static_cast<double>(n));
}

GoldenRecord example_closed_forms(const FamilyParams& family) {
    GoldenRecord r;
    if (const auto* s = std::get_if<family::Section2Example>(&family)) {
        if (s->g_choice != 1 && s->g_choice != 2)
            throw Error(ErrorCode::InvalidParams, "g_choice must be 1 or 2");
        auto ref = std::make_shared<Section2>();
        const int choice = s->g_choice;
        r.pi = [ref](State i) { return ref->pi(i); };
        r.mean = ref->mean(choice);
        auto g = [ref, choice](State i) { return ref->g(choice, i); };
        const double mean = r.mean;
        // Solutions for different anchors differ by a constant.
        r.poisson = [g, mean](State j, State i) {
            return Section2::f0(i, mean, g) - Section2::f0(j, mean, g);
        };
        return r;
    }
    if (const auto* e = std::get_if<family::Example52>(&family)) {
        const Example52 ref(e->b);
        r.pi = [ref](State i) { return ref.pi(i); };
        r.mean = ref.mean_identity();
        r.poisson = [ref](State j, State i) { return ref.f(j, i); };
        r.sigma2 = ref.sigma2();
        return r;
    }
    if (std::holds_alternative<family::Example53>(family)) {
        r.pi = &Example53::pi;
        r.mean = Example53::mean_identity();
        r.poisson = &Example53::f;
        r.sigma2 = Example53::sigma2();
        r.sigma2_partial = &Example53::sigma2_partial;
        r.error_bound = &Example53::error_bound;
        return r;
    }
    throw Error(ErrorCode::InvalidParams, "no closed forms for family " + family_name(family));
}

}  // namespace augtrunc::reference

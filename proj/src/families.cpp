#include "augtrunc/families.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <string>
#include <utility>

#include "augtrunc/closed_forms.hpp"
#include "augtrunc/error.hpp"
#include "augtrunc/tolerances.hpp"

namespace augtrunc {

namespace {

// Sequences are validated on a finite prefix; rows beyond it are checked lazily.
constexpr State kCheckedPrefix = 1000;

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::InvalidParams, what); }

template <class Pred>
void check_prefix(const Sequence& s, State from, Pred ok, const std::string& what) {
    for (State i = from; i < kCheckedPrefix; ++i) {
        const double v = s(i);
        if (!std::isfinite(v) || !ok(v)) bad(what + " (at index " + std::to_string(i) + ")");
    }
}

ChainSpec section2() {
    using reference::Section2;
    ChainSpec::Oracles o;
    o.kind = ChainKind::Discrete;
    o.structure = Structure::SingleBirth;
    o.description = "two-column chain, p_i = 1 - 3^{-i/2} on even i >= 2";
    o.row = [](State i, State max_target) {
        SparseRow r;
        if (i == 0) {
            r.push_back({0, Section2::q(0)});
            if (max_target >= 1) r.push_back({1, Section2::p(0)});
            return r;
        }
        r.push_back({0, Section2::q(i)});
        if (i + 1 <= max_target) r.push_back({i + 1, Section2::p(i)});
        return r;
    };
    o.tail = [](State i, State from) { return from <= i + 1 ? Section2::p(i) : 0.0; };
    return ChainSpec(std::move(o));
}

ChainSpec example52(double b) {
    if (!(b > 2.0) || !std::isfinite(b)) bad("example52 needs b > 2");
    ChainSpec::Oracles o;
    o.kind = ChainKind::Continuous;
    o.structure = Structure::SingleDeath;
    o.description = "single-death q-matrix with geometric up-jumps, b = " + std::to_string(b);
    o.row = [b](State i, State max_target) {
        SparseRow r;
        if (i >= 1) r.push_back({i - 1, (b - 1.0) / b});
        // Row 0 has exponent j+1, rows i >= 1 have j-i+2.
        const double shift = i == 0 ? 1.0 : 2.0;
        for (State k = i + 1; k <= max_target; ++k) {
            const double v = (b - 1.0) * std::pow(b, -(static_cast<double>(k - i) + shift));
            if (v == 0.0) break;
            r.push_back({k, v});
        }
        return r;
    };
    o.tail = [b](State i, State from) {
        const double d = static_cast<double>(from - i);
        return i == 0 ? std::pow(b, -d) : std::pow(b, -(d + 1.0));
    };
    o.exit_rate = [b](State i) { return i == 0 ? 1.0 / b : (b * b - b + 1.0) / (b * b); };
    return ChainSpec(std::move(o));
}

ChainSpec example53() {
    ChainSpec::Oracles o;
    o.kind = ChainKind::Continuous;
    o.structure = Structure::SingleDeath;
    o.description = "extended branching process, alpha = 1";
    o.row = [](State i, State max_target) {
        SparseRow r;
        if (i == 0) {
            for (State k = 1; k <= max_target; ++k) {
                const double v = (2.0 / 3.0) * std::pow(3.0, -static_cast<double>(k - 1));
                if (v == 0.0) break;
                r.push_back({k, v});
            }
            return r;
        }
        const double di = static_cast<double>(i);
        r.push_back({i - 1, di});
        for (State k = i + 1; k <= max_target; ++k) {
            const double v = di * std::pow(3.0, -static_cast<double>(k - i + 1));
            if (v == 0.0) break;
            r.push_back({k, v});
        }
        return r;
    };
    o.tail = [](State i, State from) {
        const double d = static_cast<double>(from - i);
        if (i == 0) return std::pow(3.0, -(d - 1.0));
        return static_cast<double>(i) / 2.0 * std::pow(3.0, -d);
    };
    o.exit_rate = [](State i) { return i == 0 ? 1.0 : 7.0 * static_cast<double>(i) / 6.0; };
    return ChainSpec(std::move(o));
}

ChainSpec remark42(const family::Remark42& f) {
    check_prefix(f.lambda, 0, [](double v) { return v > 0.0; }, "remark42 rates must be positive");
    check_prefix(f.p, 1, [](double v) { return v >= 0.0; }, "remark42 jump law must be non-negative");
    const auto total = f.p.tail_sum(1);
    if (!total || std::abs(*total - 1.0) > 1e-12)
        bad("remark42 jump law must sum to 1 over i >= 1");
    ChainSpec::Oracles o;
    o.kind = ChainKind::Continuous;
    o.structure = Structure::General;
    o.description = "star-shaped q-matrix";
    o.row = [lambda = f.lambda, p = f.p](State i, State max_target) {
        SparseRow r;
        if (i >= 1) {
            r.push_back({0, lambda(i)});
            return r;
        }
        const double l0 = lambda(0);
        State last = max_target;
        if (p.kind == Sequence::Kind::List) last = std::min<State>(last, p.values.size());
        for (State k = 1; k <= last; ++k) {
            const double v = l0 * p(k);
            if (v > 0.0) r.push_back({k, v});
        }
        return r;
    };
    o.tail = [lambda = f.lambda, p = f.p](State i, State from) {
        if (i >= 1) return 0.0;
        return lambda(0) * p.tail_sum(from).value_or(0.0);
    };
    o.exit_rate = [lambda = f.lambda](State i) { return lambda(i); };
    return ChainSpec(std::move(o));
}

ChainSpec single_birth(const family::SingleBirthCustom& f) {
    check_prefix(f.birth, 0, [](double v) { return v > 0.0 && v < 1.0; },
                 "single-birth probabilities must lie in (0,1)");
    ChainSpec::Oracles o;
    o.kind = ChainKind::Discrete;
    o.structure = f.down == family::DownRule::ToPrevious ? Structure::BirthDeath
                                                         : Structure::SingleBirth;
    o.description = "single-birth chain";
    o.row = [birth = f.birth, down = f.down](State i, State max_target) {
        const double up = birth(i);
        if (!(up > 0.0 && up < 1.0)) bad("single-birth probability outside (0,1)");
        SparseRow r;
        const double rest = 1.0 - up;
        switch (down) {
            case family::DownRule::ToZero: r.push_back({0, rest}); break;
            case family::DownRule::ToPrevious: r.push_back({i == 0 ? 0 : i - 1, rest}); break;
            case family::DownRule::Uniform:
                for (State k = 0; k <= i; ++k)
                    r.push_back({k, rest / static_cast<double>(i + 1)});
                break;
        }
        if (i + 1 <= max_target) r.push_back({i + 1, up});
        return r;
    };
    o.tail = [birth = f.birth](State i, State from) { return from <= i + 1 ? birth(i) : 0.0; };
    return ChainSpec(std::move(o));
}

ChainSpec single_death(const family::SingleDeathCustom& f) {
    check_prefix(f.death, 1, [](double v) { return v > 0.0; }, "death rates must be positive");
    check_prefix(f.up, 0, [](double v) { return v >= 0.0; }, "up rates must be non-negative");
    if (!(f.up(0) > 0.0)) bad("state 0 needs a positive up rate");
    const double r = f.jump_ratio;
    if (!(r >= 0.0 && r < 1.0)) bad("jump ratio must lie in [0,1)");
    ChainSpec::Oracles o;
    o.kind = ChainKind::Continuous;
    o.structure = r == 0.0 ? Structure::BirthDeath : Structure::SingleDeath;
    o.description = "single-death q-matrix";
    o.row = [death = f.death, up = f.up, r](State i, State max_target) {
        SparseRow row;
        if (i >= 1) row.push_back({i - 1, death(i)});
        const double u = up(i);
        if (u == 0.0) return row;
        double w = u * (1.0 - r);
        for (State k = i + 1; k <= max_target && w > 0.0; ++k, w *= r) row.push_back({k, w});
        return row;
    };
    o.tail = [up = f.up, r](State i, State from) {
        const State k = from - i;  // smallest jump size counted
        if (r == 0.0) return k == 1 ? up(i) : 0.0;
        return up(i) * std::pow(r, static_cast<double>(k - 1));
    };
    o.exit_rate = [death = f.death, up = f.up](State i) {
        return (i >= 1 ? death(i) : 0.0) + up(i);
    };
    return ChainSpec(std::move(o));
}

ChainSpec birth_death(const family::BirthDeath& f) {
    check_prefix(f.birth, 0, [](double v) { return v > 0.0; }, "birth rates must be positive");
    check_prefix(f.death, 1, [](double v) { return v > 0.0; }, "death rates must be positive");
    ChainSpec::Oracles o;
    o.kind = ChainKind::Continuous;
    o.structure = Structure::BirthDeath;
    o.description = "birth-death process";
    o.row = [birth = f.birth, death = f.death](State i, State max_target) {
        SparseRow r;
        if (i >= 1) r.push_back({i - 1, death(i)});
        if (i + 1 <= max_target) r.push_back({i + 1, birth(i)});
        return r;
    };
    o.tail = [birth = f.birth](State i, State from) { return from <= i + 1 ? birth(i) : 0.0; };
    o.exit_rate = [birth = f.birth, death = f.death](State i) {
        return birth(i) + (i >= 1 ? death(i) : 0.0);
    };
    return ChainSpec(std::move(o));
}

Structure detect_structure(const std::vector<std::vector<double>>& m) {
    bool up_skip_free = true, down_skip_free = true;
    const std::size_t n = m.size();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k) {
            if (m[i][k] == 0.0) continue;
            if (k > i + 1) up_skip_free = false;
            if (k + 1 < i) down_skip_free = false;
        }
    // Skip-free moves must actually be possible for the structured recursions.
    for (std::size_t i = 0; i + 1 < n; ++i)
        if (m[i][i + 1] <= 0.0) up_skip_free = false;
    for (std::size_t i = 1; i < n; ++i)
        if (m[i][i - 1] <= 0.0) down_skip_free = false;
    if (up_skip_free && down_skip_free) return Structure::BirthDeath;
    if (up_skip_free) return Structure::SingleBirth;
    if (down_skip_free) return Structure::SingleDeath;
    return Structure::General;
}

ChainSpec finite_explicit(const family::FiniteExplicit& f) {
    const auto& m = f.matrix;
    const std::size_t n = m.size();
    if (n == 0) bad("finite chain needs at least one state");
    for (std::size_t i = 0; i < n; ++i) {
        if (m[i].size() != n) bad("finite chain matrix must be square");
        for (double v : m[i])
            if (!std::isfinite(v)) bad("finite chain matrix has a non-finite entry");
        if (f.kind == ChainKind::Discrete) {
            double s = 0.0;
            for (double v : m[i]) {
                if (v < 0.0 || v > 1.0) bad("transition probability outside [0,1] in row " + std::to_string(i));
                s += v;
            }
            if (std::abs(s - 1.0) > tol::kRowSum) bad("row " + std::to_string(i) + " does not sum to 1");
        } else {
            double off = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                if (k == i) continue;
                if (m[i][k] < 0.0) bad("negative off-diagonal rate in row " + std::to_string(i));
                off += m[i][k];
            }
            if (std::abs(off + m[i][i]) > tol::kRowSum * std::max(1.0, off))
                bad("generator row " + std::to_string(i) + " does not sum to 0");
        }
    }
    ChainSpec::Oracles o;
    o.kind = f.kind;
    o.structure = detect_structure(m);
    o.size = n;
    o.description = "explicit " + std::to_string(n) + "-state chain";
    const bool continuous = f.kind == ChainKind::Continuous;
    o.row = [m, continuous](State i, State max_target) {
        SparseRow r;
        for (State k = 0; k <= max_target && k < m.size(); ++k) {
            if (continuous && k == i) continue;
            if (m[i][k] != 0.0) r.push_back({k, m[i][k]});
        }
        return r;
    };
    if (continuous) {
        o.exit_rate = [m](State i) {
            double s = 0.0;
            for (State k = 0; k < m.size(); ++k)
                if (k != i) s += m[i][k];
            return s;
        };
    }
    return ChainSpec(std::move(o));
}

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

Sequence Sequence::constant(double c) { return {Kind::Constant, c, 0.0, {}}; }
Sequence Sequence::geometric(double scale, double ratio) { return {Kind::Geometric, scale, ratio, {}}; }
Sequence Sequence::linear(double intercept, double slope) { return {Kind::Linear, intercept, slope, {}}; }
Sequence Sequence::list(std::vector<double> v) { return {Kind::List, 0.0, 0.0, std::move(v)}; }

double Sequence::operator()(State i) const {
    switch (kind) {
        case Kind::Constant: return first;
        case Kind::Geometric: return first * std::pow(second, static_cast<double>(i));
        case Kind::Linear: return first + second * static_cast<double>(i);
        case Kind::List: return i < values.size() ? values[i] : 0.0;
    }
    return 0.0;
}

std::optional<double> Sequence::tail_sum(State from) const {
    switch (kind) {
        case Kind::Constant:
            if (first == 0.0) return 0.0;
            return std::nullopt;
        case Kind::Geometric:
            if (first == 0.0) return 0.0;
            if (second < 0.0 || second >= 1.0) return std::nullopt;
            return first * std::pow(second, static_cast<double>(from)) / (1.0 - second);
        case Kind::Linear:
            if (first == 0.0 && second == 0.0) return 0.0;
            return std::nullopt;
        case Kind::List:
            if (from >= values.size()) return 0.0;
            return std::accumulate(values.begin() + static_cast<std::ptrdiff_t>(from), values.end(), 0.0);
    }
    return std::nullopt;
}

ChainSpec make_builtin(const FamilyParams& family) {
    return std::visit(
        overloaded{
            [](const family::Section2Example& f) {
                if (f.g_choice != 1 && f.g_choice != 2) bad("g_choice must be 1 or 2");
                return section2();
            },
            [](const family::Example52& f) { return example52(f.b); },
            [](const family::Example53&) { return example53(); },
            [](const family::Remark42& f) { return remark42(f); },
            [](const family::SingleBirthCustom& f) { return single_birth(f); },
            [](const family::SingleDeathCustom& f) { return single_death(f); },
            [](const family::BirthDeath& f) { return birth_death(f); },
            [](const family::FiniteExplicit& f) { return finite_explicit(f); },
        },
        family);
}

std::string family_name(const FamilyParams& family) {
    return std::visit(overloaded{
                          [](const family::Section2Example&) { return std::string("section2"); },
                          [](const family::Example52&) { return std::string("example52"); },
                          [](const family::Example53&) { return std::string("example53"); },
                          [](const family::Remark42&) { return std::string("remark42"); },
                          [](const family::SingleBirthCustom&) { return std::string("single_birth"); },
                          [](const family::SingleDeathCustom&) { return std::string("single_death"); },
                          [](const family::BirthDeath&) { return std::string("birth_death"); },
                          [](const family::FiniteExplicit&) { return std::string("finite"); },
                      },
                      family);
}

ForcingFunction default_forcing(const FamilyParams& family) {
    if (const auto* s = std::get_if<family::Section2Example>(&family)) {
        auto ref = std::make_shared<reference::Section2>();
        const int choice = s->g_choice;
        ForcingFunction g{[ref, choice](State i) { return ref->g(choice, i); }, ref->mean(choice),
                          choice == 1 ? "identity" : "balanced"};
        return g;
    }
    auto g = ForcingFunction::identity();
    if (const auto* e = std::get_if<family::Example52>(&family))
        g.known_mean = reference::Example52(e->b).mean_identity();
    else if (std::holds_alternative<family::Example53>(family))
        g.known_mean = reference::Example53::mean_identity();
    return g;
}

}  // namespace augtrunc

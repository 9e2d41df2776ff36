#include <cmath>
#include <map>

#include "augtrunc/closed_forms.hpp"
#include "augtrunc/error.hpp"
#include "augtrunc/families.hpp"
#include "doctest.h"

using namespace augtrunc;

namespace {

std::map<State, double> as_map(const SparseRow& r) {
    std::map<State, double> m;
    for (const auto& t : r) m[t.target] = t.value;
    return m;
}

// Off-diagonal (continuous) or full (discrete) mass of row i, with the part
// above i+1 taken from the tail oracle.
double row_mass(const ChainSpec& s, State i) {
    double sum = 0.0;
    for (const auto& t : s.row(i, i + 1)) sum += t.value;
    return sum + s.tail(i, i + 2);
}

}  // namespace

TEST_CASE("example52 rows") {
    const ChainSpec s = make_builtin(family::Example52{3.0});
    CHECK(s.kind() == ChainKind::Continuous);
    CHECK(s.is_single_death());

    auto r1 = as_map(s.row(1, 40));
    CHECK(r1[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(r1[2] == doctest::Approx(2.0 / 27.0).epsilon(1e-15));
    CHECK(r1.count(1) == 0);
    CHECK(s.exit_rate(1) == doctest::Approx(7.0 / 9.0).epsilon(1e-15));
    double off = 0.0;
    for (auto [k, v] : r1) off += v;
    CHECK(std::abs(off + s.tail(1, 41) - 7.0 / 9.0) < 1e-15);

    auto r0 = as_map(s.row(0, 30));
    for (State j = 1; j <= 30; ++j) CHECK(r0[j] == doctest::Approx(2.0 / std::pow(3.0, j + 1.0)).epsilon(1e-14));
    CHECK(s.exit_rate(0) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("example52 rejects b <= 2") {
    CHECK_THROWS_AS(make_builtin(family::Example52{2.0}), Error);
    CHECK_THROWS_AS(make_builtin(family::Example52{1.5}), Error);
    try {
        make_builtin(family::Example52{2.0});
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InvalidParams);
    }
}

TEST_CASE("two-column example rows") {
    const ChainSpec s = make_builtin(family::Section2Example{1});
    CHECK(s.kind() == ChainKind::Discrete);
    CHECK(s.is_single_birth());
    auto r0 = as_map(s.row(0, 5));
    CHECK(r0.size() == 2);
    CHECK(r0[0] == 0.5);
    CHECK(r0[1] == 0.5);
    // p_i = 1/2 on odd i, 1 - 3^{-i/2} on even i >= 2
    CHECK(as_map(s.row(3, 5))[4] == 0.5);
    CHECK(as_map(s.row(4, 5))[5] == doctest::Approx(1.0 - 1.0 / 9.0).epsilon(1e-15));
    CHECK(as_map(s.row(4, 5))[0] == doctest::Approx(1.0 / 9.0).epsilon(1e-15));
    CHECK(as_map(s.row(2, 5))[3] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("star-shaped generator row 0") {
    const ChainSpec s = make_builtin(family::Remark42{});
    auto r0 = as_map(s.row(0, 20));
    for (State i = 1; i <= 20; ++i) CHECK(r0[i] == doctest::Approx(std::pow(2.0, -static_cast<double>(i))));
    CHECK(s.exit_rate(0) == doctest::Approx(1.0));
    CHECK(as_map(s.row(5, 20)) == std::map<State, double>{{0, 32.0}});
}

TEST_CASE("star-shaped generator needs a jump law summing to 1") {
    family::Remark42 f;
    f.p = Sequence::geometric(1.0, 0.25);
    CHECK_THROWS_AS(make_builtin(f), Error);
}

TEST_CASE("branching example row 2") {
    const ChainSpec s = make_builtin(family::Example53{});
    auto r2 = as_map(s.row(2, 30));
    CHECK(r2[1] == 2.0);
    for (State j = 3; j <= 30; ++j)
        CHECK(r2[j] == doctest::Approx(2.0 * std::pow(3.0, -static_cast<double>(j - 1))).epsilon(1e-14));
    CHECK(r2.count(0) == 0);
    // q_2 = 2 + 2 sum_{j>=3} 3^{-(j-1)} = 7/3
    CHECK(s.exit_rate(2) == doctest::Approx(7.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("finite explicit two-state chain") {
    family::FiniteExplicit f{ChainKind::Discrete, {{0.5, 0.5}, {0.5, 0.5}}};
    const ChainSpec s = make_builtin(f);
    CHECK(s.size() == 2);
    CHECK(s.row(0, 1) == SparseRow{{0, 0.5}, {1, 0.5}});
    CHECK(s.structure() == Structure::BirthDeath);
    family::FiniteExplicit bad{ChainKind::Discrete, {{0.5, 0.4}, {0.5, 0.5}}};
    CHECK_THROWS_AS(make_builtin(bad), Error);
}

TEST_CASE("row oracles are pure") {
    const ChainSpec s = make_builtin(family::Example53{});
    CHECK(s.row(7, 50) == s.row(7, 50));
    CHECK(s.tail(7, 30) == s.tail(7, 30));
}

TEST_CASE("rows sum correctly up to state 10^4") {
    std::vector<std::pair<const char*, FamilyParams>> discrete = {
        {"section2", family::Section2Example{1}},
        {"single_birth to_zero", family::SingleBirthCustom{Sequence::constant(0.4), family::DownRule::ToZero}},
        {"single_birth uniform", family::SingleBirthCustom{Sequence::constant(0.3), family::DownRule::Uniform}},
        {"single_birth to_previous",
         family::SingleBirthCustom{Sequence::constant(0.45), family::DownRule::ToPrevious}},
    };
    for (const auto& [name, f] : discrete) {
        CAPTURE(name);
        const ChainSpec s = make_builtin(f);
        double worst = 0.0;
        for (State i = 0; i <= 10000; ++i) worst = std::max(worst, std::abs(row_mass(s, i) - 1.0));
        CHECK(worst <= 1e-12);
    }

    std::vector<std::pair<const char*, FamilyParams>> continuous = {
        {"example52", family::Example52{3.0}},
        {"example52 b=5", family::Example52{5.0}},
        {"example53", family::Example53{}},
        {"single_death", family::SingleDeathCustom{Sequence::constant(2.0), Sequence::constant(1.0), 0.5}},
        {"birth_death", family::BirthDeath{Sequence::constant(1.0), Sequence::constant(2.0)}},
    };
    for (const auto& [name, f] : continuous) {
        CAPTURE(name);
        const ChainSpec s = make_builtin(f);
        double worst = 0.0;
        for (State i = 0; i <= 10000; ++i) {
            const double q = s.exit_rate(i);
            worst = std::max(worst, std::abs(row_mass(s, i) - q) / std::max(1.0, q));
        }
        CHECK(worst <= 1e-12);
    }

    // lambda_i = 2^i overflows past i = 1023; check the representable range.
    const ChainSpec star = make_builtin(family::Remark42{});
    double worst = 0.0;
    for (State i = 0; i <= 1000; ++i) {
        const double q = star.exit_rate(i);
        worst = std::max(worst, std::abs(row_mass(star, i) - q) / std::max(1.0, q));
    }
    CHECK(worst <= 1e-12);
}

TEST_CASE("truncate examples") {
    SUBCASE("two-column example, n = 1") {
        const SubKernel t = truncate(make_builtin(family::Section2Example{1}), 1);
        Eigen::MatrixXd want(2, 2);
        want << 0.5, 0.5, 0.5, 0.0;
        CHECK(t.entries == want);
        CHECK(t.deficit(0) == 0.0);
        CHECK(t.deficit(1) == 0.5);
    }
    SUBCASE("n = 0") {
        const SubKernel d = truncate(make_builtin(family::Section2Example{1}), 0);
        CHECK(d.entries.rows() == 1);
        CHECK(d.entries(0, 0) == 0.5);
        const SubKernel c = truncate(make_builtin(family::Example52{3.0}), 0);
        CHECK(c.entries(0, 0) == doctest::Approx(-1.0 / 3.0));
        CHECK(c.deficit(0) == doctest::Approx(1.0 / 3.0));
    }
    SUBCASE("example52, n = 2: row 0 loses 1/27") {
        const SubKernel t = truncate(make_builtin(family::Example52{3.0}), 2);
        CHECK(t.deficit(0) == doctest::Approx(1.0 / 27.0).epsilon(1e-14));
    }
    SUBCASE("corner entries equal the row entries exactly") {
        for (const FamilyParams& f : {FamilyParams{family::Example53{}}, FamilyParams{family::Section2Example{2}},
                                      FamilyParams{family::Remark42{}}}) {
            const ChainSpec s = make_builtin(f);
            const SubKernel t = truncate(s, 12);
            for (State i = 0; i <= 12; ++i) {
                Eigen::VectorXd row = Eigen::VectorXd::Zero(13);
                for (const auto& tr : s.row(i, 12)) row(static_cast<Eigen::Index>(tr.target)) = tr.value;
                if (s.kind() == ChainKind::Continuous) row(static_cast<Eigen::Index>(i)) = -s.exit_rate(i);
                CHECK(t.entries.row(static_cast<Eigen::Index>(i)).transpose() == row);
            }
        }
    }
}

TEST_CASE("closed forms") {
    SUBCASE("example52 at b = 3") {
        reference::Example52 e(3.0);
        CHECK(e.pi(0) == doctest::Approx(0.5));
        CHECK(e.pi(1) == doctest::Approx(0.25));
        CHECK(e.pi(2) == doctest::Approx(0.125));
        CHECK(e.mean_identity() == doctest::Approx(1.0));
        CHECK(e.sigma2() == doctest::Approx(20.0));
        for (State i = 0; i <= 10; ++i) CHECK(e.f(0, i) == doctest::Approx(static_cast<double>(i * i)));
        CHECK(e.tail_rate(1, 5) == doctest::Approx(std::pow(3.0, -5.0)));
    }
    SUBCASE("example53") {
        const double pi0 = 1.0 / (1.0 + std::log(4.0));
        CHECK(reference::Example53::pi(0) == doctest::Approx(pi0));
        CHECK(reference::Example53::pi(1) == doctest::Approx(pi0));
        double total = 0.0;
        for (State i = 0; i < 200; ++i) total += reference::Example53::pi(i);
        CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(reference::Example53::error_bound(23) <= 1e-4);
        // the two forms of h agree where the log form is still accurate
        for (State n = 1; n <= 8; ++n)
            CHECK(reference::Example53::h(n) == doctest::Approx(reference::Example53::h_log_form(n)).epsilon(1e-9));
        CHECK(reference::Example53::sigma2() == doctest::Approx(1.4645).epsilon(5e-5 / 1.4645));
    }
    SUBCASE("two-column example") {
        reference::Section2 r;
        double total = 0.0;
        for (State i = 0; i < 300; ++i) total += r.pi(i);
        CHECK(total == doctest::Approx(1.0).epsilon(1e-13));
        CHECK(r.last_column_pi(0) == std::vector<double>{1.0});
        // the balancing constant makes the second choice's mean equal to c
        CHECK(r.mean(2) == doctest::Approx(r.balancing_constant()).epsilon(1e-13));
    }
    SUBCASE("no closed forms for other families") {
        CHECK_THROWS_AS(reference::example_closed_forms(family::Remark42{}), Error);
    }
}

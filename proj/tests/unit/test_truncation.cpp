#include <cmath>

#include "augtrunc/error.hpp"
#include "augtrunc/families.hpp"
#include "augtrunc/solver.hpp"
#include "augtrunc/truncation.hpp"
#include "doctest.h"
#include "generators.hpp"

using namespace augtrunc;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error thrown");
    return ErrorCode::InvalidParams;
}

Eigen::MatrixXd mat(std::initializer_list<std::initializer_list<double>> rows) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
    Eigen::Index i = 0;
    for (const auto& r : rows) {
        Eigen::Index k = 0;
        for (double v : r) m(i, k++) = v;
        ++i;
    }
    return m;
}

double max_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("last-column augmentation of the two-column example") {
    const ChainSpec s = make_builtin(family::Section2Example{1});
    const FiniteKernel k = build_kernel(s, scheme::LastColumn{}, 2);
    CHECK(k.scheme_tag == "last_column");
    CHECK(k.entries(1, 0) == 0.5);
    CHECK(k.entries(1, 2) == 0.5);
    CHECK(k.entries(1, 1) == 0.0);
    CHECK(k.entries(2, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(k.entries(2, 2) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("augmenting a stochastic corner changes nothing") {
    SubKernel sub{ChainKind::Discrete, 2, mat({{0.2, 0.3, 0.5}, {1.0, 0.0, 0.0}, {0.1, 0.1, 0.8}}),
                  Eigen::VectorXd::Zero(3)};
    for (std::size_t j = 0; j <= 2; ++j) CHECK(augment_linear(sub, j).entries == sub.entries);
}

TEST_CASE("linear augmentation of the star-shaped generator") {
    const ChainSpec s = make_builtin(family::Remark42{});
    for (std::size_t n = 1; n <= 8; ++n) {
        const FiniteKernel k = build_kernel(s, scheme::LinearColumn{0}, n);
        double head = 0.0;
        for (std::size_t i = 1; i <= n; ++i) head += std::pow(2.0, -static_cast<double>(i));
        CHECK(k.entries(0, 0) == doctest::Approx(-head).epsilon(1e-14));
        for (std::size_t i = 1; i <= n; ++i) {
            const auto ii = static_cast<Eigen::Index>(i);
            CHECK(k.entries(ii, 0) == std::pow(2.0, static_cast<double>(i)));
            CHECK(k.entries(ii, ii) == -std::pow(2.0, static_cast<double>(i)));
        }
    }
}

TEST_CASE("augment_linear deficits") {
    SUBCASE("a clearly negative deficit is rejected") {
        SubKernel sub{ChainKind::Discrete, 1, mat({{0.5, 0.5}, {0.5, 0.5}}), Eigen::Vector2d(0.0, -1e-9)};
        CHECK(code_of([&] { augment_linear(sub, 0); }) == ErrorCode::NegativeDeficit);
    }
    SUBCASE("rounding-level negative deficits are clipped") {
        SubKernel sub{ChainKind::Discrete, 1, mat({{0.5, 0.5}, {0.5, 0.5}}), Eigen::Vector2d(0.0, -5e-13)};
        CHECK(augment_linear(sub, 0).entries == sub.entries);
    }
    SUBCASE("anchor beyond the level") {
        SubKernel sub{ChainKind::Discrete, 1, mat({{0.5, 0.5}, {0.5, 0.5}}), Eigen::Vector2d::Zero()};
        CHECK(code_of([&] { augment_linear(sub, 2); }) == ErrorCode::InvalidParams);
    }
}

TEST_CASE("censoring a 3-cycle") {
    const FiniteKernel cyc = make_kernel(ChainKind::Discrete, mat({{0, 1, 0}, {0, 0, 1}, {1, 0, 0}}));
    const FiniteKernel c = censor(cyc, 1);
    CHECK(c.entries == mat({{0, 1}, {1, 0}}));
    CHECK(censor(cyc, 2).entries == cyc.entries);
}

TEST_CASE("censoring onto a set the chain cannot return to") {
    // States 1 and 2 swap forever once entered; {0} is never re-entered.
    Eigen::MatrixXd p = mat({{0, 1, 0}, {0, 0, 1}, {0, 1, 0}});
    FiniteKernel k{ChainKind::Discrete, 2, p, "raw"};
    CHECK(code_of([&] { censor(k, 0); }) == ErrorCode::SingularComplement);
}

TEST_CASE("kernel validation") {
    CHECK(code_of([] { make_kernel(ChainKind::Discrete, mat({{1, 0}, {0, 1}})); }) ==
          ErrorCode::MultipleClosedClasses);
    CHECK(code_of([] { make_kernel(ChainKind::Discrete, mat({{0.5, 0.6}, {0.5, 0.5}})); }) ==
          ErrorCode::NumericalFailure);
    CHECK(code_of([] { make_kernel(ChainKind::Continuous, mat({{0, -1}, {1, 0}})); }) ==
          ErrorCode::NumericalFailure);
    const FiniteKernel k = make_kernel(ChainKind::Discrete, mat({{1, 0, 0}, {0.5, 0.5, 0}, {0, 0.5, 0.5}}));
    CHECK(closed_class(k) == std::vector<bool>{true, false, false});
}

TEST_CASE("exact censoring of single-death generators") {
    SUBCASE("example52 last-column rates") {
        const ChainSpec s = make_builtin(family::Example52{3.0});
        for (std::size_t n = 2; n <= 12; ++n) {
            const FiniteKernel k = censor_single_death(s, n);
            const auto nn = static_cast<Eigen::Index>(n);
            CHECK(k.entries(1, nn) == doctest::Approx(std::pow(3.0, -static_cast<double>(n))).epsilon(1e-14));
            CHECK(k.entries(nn, nn - 1) == doctest::Approx(2.0 / 3.0));
            CHECK(k.entries(nn, nn) == doctest::Approx(-2.0 / 3.0));
            for (Eigen::Index c = 0; c + 1 < nn; ++c) CHECK(k.entries(nn, c) == 0.0);
        }
    }
    SUBCASE("example53 last-column rates") {
        const ChainSpec s = make_builtin(family::Example53{});
        for (std::size_t n = 3; n <= 12; ++n) {
            const FiniteKernel k = censor_single_death(s, n);
            for (std::size_t m = 1; m < n; ++m) {
                const double want = static_cast<double>(m) / (2.0 * std::pow(3.0, static_cast<double>(n - m)));
                CHECK(k.entries(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n)) ==
                      doctest::Approx(want).epsilon(1e-14));
            }
        }
    }
    SUBCASE("equals the last-column augmentation") {
        for (const FamilyParams& f :
             {FamilyParams{family::Example52{3.0}}, FamilyParams{family::Example53{}},
              FamilyParams{family::SingleDeathCustom{Sequence::linear(1.0, 0.5), Sequence::constant(0.7), 0.4}}}) {
            const ChainSpec s = make_builtin(f);
            for (std::size_t n : {1, 5, 20}) {
                const FiniteKernel a = censor_single_death(s, n);
                const FiniteKernel b = build_kernel(s, scheme::LastColumn{}, n);
                CHECK(max_diff(a.entries, b.entries) <= 1e-14 * a.entries.cwiseAbs().maxCoeff());
            }
        }
    }
    SUBCASE("agrees with censoring a large outer truncation") {
        const ChainSpec s = make_builtin(family::Example53{});
        for (std::size_t n : {4, 10}) {
            const FiniteKernel exact = censor_single_death(s, n);
            const FiniteKernel approx = build_kernel(s, scheme::Censored{200, false}, n);
            CHECK(max_diff(exact.entries, approx.entries) <= 1e-9);
            const FiniteKernel adaptive = censor_adaptive(s, n);
            CHECK(adaptive.scheme_tag.find("auto") != std::string::npos);
            CHECK(max_diff(exact.entries, adaptive.entries) <= 1e-9);
        }
    }
    SUBCASE("rejects other structures") {
        CHECK(code_of([] { censor_single_death(make_builtin(family::Remark42{}), 3); }) ==
              ErrorCode::NotSingleDeath);
        CHECK(code_of([] { censor_single_death(make_builtin(family::Section2Example{1}), 3); }) ==
              ErrorCode::NotSingleDeath);
    }
}

TEST_CASE("censored invariant vector of example52 at n = 1") {
    const FiniteKernel k = censor_single_death(make_builtin(family::Example52{3.0}), 1);
    const Eigen::VectorXd pi = invariant_gth(k);
    CHECK(pi(0) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    CHECK(pi(1) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("property: censored invariant vector is the restricted, renormalized one") {
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        gen::Gen g(seed);
        const auto kind = seed % 2 ? ChainKind::Discrete : ChainKind::Continuous;
        const std::size_t size = g.index(3, 10);
        const FiniteKernel outer = g.irreducible(kind, size);
        const std::size_t n = g.index(0, size - 2);
        const Eigen::VectorXd full = invariant_gth(outer);
        const Eigen::VectorXd want = full.head(static_cast<Eigen::Index>(n + 1)) / full.head(static_cast<Eigen::Index>(n + 1)).sum();
        CAPTURE(seed);
        CHECK((invariant_gth(censor(outer, n)) - want).cwiseAbs().maxCoeff() <= 1e-10);
    }
}

TEST_CASE("property: censoring in two steps equals censoring once") {
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        gen::Gen g(seed);
        const auto kind = seed % 2 ? ChainKind::Discrete : ChainKind::Continuous;
        const FiniteKernel outer = g.irreducible(kind, 8);
        const std::size_t n = g.index(1, 6), m = g.index(0, n - 1);
        CAPTURE(seed);
        CHECK(max_diff(censor(censor(outer, n), m).entries, censor(outer, m).entries) <= 1e-10);
    }
}

TEST_CASE("property: augmented kernels dominate the corner") {
    const std::vector<FamilyParams> families = {
        family::Section2Example{1},
        family::Example52{3.0},
        family::Example53{},
        family::Remark42{},
        family::SingleBirthCustom{Sequence::constant(0.4), family::DownRule::Uniform},
        family::BirthDeath{Sequence::constant(1.0), Sequence::constant(2.0)},
    };
    for (const auto& f : families) {
        const ChainSpec s = make_builtin(f);
        CAPTURE(family_name(f));
        for (std::size_t n : {1, 4, 9}) {
            const SubKernel sub = truncate(s, n);
            const std::vector<AugmentationScheme> schemes = {scheme::LinearColumn{0}, scheme::LinearColumn{n / 2},
                                                             scheme::LastColumn{}, scheme::Censored{}};
            for (const auto& sc : schemes) {
                const FiniteKernel k = build_kernel(s, sc, n);
                CAPTURE(k.scheme_tag);
                Eigen::MatrixXd diff = k.entries - sub.entries;
                if (s.kind() == ChainKind::Continuous) diff.diagonal().setZero();
                CHECK(diff.minCoeff() >= -1e-15);
                CHECK_NOTHROW(validate(k));
            }
        }
    }
}

TEST_CASE("property: random kernels pass validation") {
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        gen::Gen g(seed);
        CHECK_NOTHROW(validate(g.irreducible(ChainKind::Discrete, g.index(1, 8))));
        CHECK_NOTHROW(validate(g.irreducible(ChainKind::Continuous, g.index(2, 8))));
        CHECK_NOTHROW(validate(g.with_transients(ChainKind::Discrete, g.index(2, 5), g.index(1, 3))));
    }
}

TEST_CASE("scheme names") {
    CHECK(scheme_name(scheme::LinearColumn{3}) == "linear(j=3)");
    CHECK(scheme_name(scheme::LastColumn{}) == "last_column");
    CHECK(scheme_name(scheme::Censored{}) == "censored(auto)");
    CHECK(scheme_name(scheme::Censored{40, false}) == "censored(N=40)");
    CHECK(scheme_name(scheme::Censored{std::nullopt, true}) == "censored(exact)");
}

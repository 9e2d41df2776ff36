#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "augtrunc/chain.hpp"
#include "augtrunc/forcing.hpp"

namespace augtrunc {

/// Non-negative parameter sequence indexed by state.
struct Sequence {
    enum class Kind { Constant, Geometric, Linear, List };

    Kind kind = Kind::Constant;
    double first = 0.0;   ///< constant value / geometric scale / linear intercept
    double second = 0.0;  ///< geometric ratio / linear slope
    std::vector<double> values;  ///< List: explicit values, zero beyond the end

    static Sequence constant(double c);
    static Sequence geometric(double scale, double ratio);
    static Sequence linear(double intercept, double slope);
    static Sequence list(std::vector<double> values);

    double operator()(State i) const;
    /// sum_{i >= from} value(i), when it is finite and available in closed form.
    std::optional<double> tail_sum(State from) const;
};

namespace family {

/// Two-column DTMC: row i goes to 0 w.p. 1-p_i and to i+1 w.p. p_i.
struct Section2Example {
    int g_choice = 1;  ///< 1: g(i)=i, 2: g(i)=i on odd i and the balancing constant on even i
};

/// Single-death q-matrix with geometric up-jumps, b > 2.
struct Example52 {
    double b = 3.0;
};

/// Extended branching process with alpha = 1.
struct Example53 {};

/// Star-shaped CTMC: 0 jumps to i at rate lambda_0 p_i, i returns to 0 at rate lambda_i.
struct Remark42 {
    Sequence lambda = Sequence::geometric(1.0, 2.0);
    Sequence p = Sequence::geometric(1.0, 0.5);
};

enum class DownRule { ToZero, ToPrevious, Uniform };

/// DTMC with p_{i,i+1} = birth(i) and the remaining mass sent downwards.
struct SingleBirthCustom {
    Sequence birth;
    DownRule down = DownRule::ToZero;
};

/// CTMC with death rate death(i) (i >= 1) and total up-rate up(i) spread
/// geometrically over jump sizes k >= 1: up(i) (1-r) r^{k-1}.
struct SingleDeathCustom {
    Sequence death;
    Sequence up;
    double jump_ratio = 0.0;
};

struct BirthDeath {
    Sequence birth;
    Sequence death;
};

struct FiniteExplicit {
    ChainKind kind = ChainKind::Discrete;
    std::vector<std::vector<double>> matrix;
};

}  // namespace family

using FamilyParams = std::variant<family::Section2Example, family::Example52, family::Example53,
                                  family::Remark42, family::SingleBirthCustom,
                                  family::SingleDeathCustom, family::BirthDeath,
                                  family::FiniteExplicit>;

/// Throws Error{InvalidParams} when the family constraints fail.
ChainSpec make_builtin(const FamilyParams& family);

std::string family_name(const FamilyParams& family);

/// The forcing function the family is usually studied with (g(i) = i, or the
/// second choice of the two-column example), with its mean when known.
ForcingFunction default_forcing(const FamilyParams& family);

}  // namespace augtrunc

#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace augtrunc {

using State = std::size_t;

enum class ChainKind { Discrete, Continuous };

/// Skip-free structure, used to select exact censoring and the structured
/// solvers. BirthDeath implies both SingleBirth and SingleDeath.
enum class Structure { General, SingleBirth, SingleDeath, BirthDeath };

struct Transition {
    State target;
    double value;  ///< probability (discrete) or rate (continuous)

    bool operator==(const Transition&) const = default;
};

/// Ordered by target. Discrete rows include the diagonal p_ii; continuous
/// rows hold off-diagonal rates only.
using SparseRow = std::vector<Transition>;

/// A countable-state chain on {0, 1, 2, ...} (or {0..size-1} when finite),
/// described by pure row oracles. Immutable once built.
class ChainSpec {
public:
    /// Entries of row i with target <= max_target.
    using RowFn = std::function<SparseRow(State i, State max_target)>;
    /// Sum of row i over targets >= from, for from > i (off-diagonal mass).
    using TailFn = std::function<double(State i, State from)>;
    /// Total jump rate q_i (continuous only).
    using RateFn = std::function<double(State i)>;

    struct Oracles {
        ChainKind kind = ChainKind::Discrete;
        Structure structure = Structure::General;
        std::optional<std::size_t> size;
        std::string description;
        RowFn row;
        TailFn tail;
        RateFn exit_rate;
    };

    explicit ChainSpec(Oracles oracles);

    ChainKind kind() const noexcept { return o_.kind; }
    Structure structure() const noexcept { return o_.structure; }
    std::optional<std::size_t> size() const noexcept { return o_.size; }
    const std::string& description() const noexcept { return o_.description; }

    bool is_single_birth() const noexcept {
        return o_.structure == Structure::SingleBirth || o_.structure == Structure::BirthDeath;
    }
    bool is_single_death() const noexcept {
        return o_.structure == Structure::SingleDeath || o_.structure == Structure::BirthDeath;
    }

    SparseRow row(State i, State max_target) const;
    double tail(State i, State from) const;
    /// q_i for continuous chains; 1 - p_ii for discrete ones.
    double exit_rate(State i) const;
    /// Single entry lookup; O(row length).
    double entry(State i, State k) const;

private:
    Oracles o_;
};

/// Northwest corner of a chain together with the mass each row loses to
/// states above the level.
struct SubKernel {
    ChainKind kind = ChainKind::Discrete;
    std::size_t level = 0;
    /// Discrete: p_ik. Continuous: q_ik with q_ii = -q_i on the diagonal.
    Eigen::MatrixXd entries;
    /// Row mass sent above the level (probability or rate).
    Eigen::VectorXd deficit;
};

/// Corner on {0..n}. For finite specs n must be below size().
SubKernel truncate(const ChainSpec& spec, std::size_t n);

}  // namespace augtrunc

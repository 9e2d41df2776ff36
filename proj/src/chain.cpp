#include "augtrunc/chain.hpp"

#include <utility>

#include "augtrunc/error.hpp"

namespace augtrunc {

ChainSpec::ChainSpec(Oracles oracles) : o_(std::move(oracles)) {
    if (!o_.row) throw Error(ErrorCode::InvalidParams, "chain spec needs a row oracle");
    if (o_.kind == ChainKind::Continuous && !o_.exit_rate)
        throw Error(ErrorCode::InvalidParams, "continuous chain spec needs an exit-rate oracle");
    if (o_.size && *o_.size == 0) throw Error(ErrorCode::InvalidParams, "empty state space");
    if (!o_.tail) {
        if (!o_.size)
            throw Error(ErrorCode::InvalidParams, "infinite chain spec needs a tail-sum oracle");
        const std::size_t last = *o_.size - 1;
        RowFn row = o_.row;
        o_.tail = [row, last](State i, State from) {
            double s = 0.0;
            for (const auto& t : row(i, last))
                if (t.target >= from && t.target != i) s += t.value;
            return s;
        };
    }
}

SparseRow ChainSpec::row(State i, State max_target) const {
    if (o_.size) {
        if (i >= *o_.size) throw Error(ErrorCode::InvalidParams, "state outside finite chain");
        if (max_target >= *o_.size) max_target = *o_.size - 1;
    }
    return o_.row(i, max_target);
}

double ChainSpec::tail(State i, State from) const {
    if (o_.size && from >= *o_.size) return 0.0;
    return o_.tail(i, from);
}

double ChainSpec::exit_rate(State i) const {
    if (o_.kind == ChainKind::Continuous) return o_.exit_rate(i);
    return 1.0 - entry(i, i);
}

double ChainSpec::entry(State i, State k) const {
    if (o_.kind == ChainKind::Continuous && i == k) return -o_.exit_rate(i);
    for (const auto& t : row(i, k))
        if (t.target == k) return t.value;
    return 0.0;
}

SubKernel truncate(const ChainSpec& spec, std::size_t n) {
    if (spec.size() && n >= *spec.size())
        throw Error(ErrorCode::InvalidParams, "truncation level beyond finite state space");
    SubKernel sub;
    sub.kind = spec.kind();
    sub.level = n;
    sub.entries = Eigen::MatrixXd::Zero(n + 1, n + 1);
    sub.deficit = Eigen::VectorXd::Zero(n + 1);
    for (State i = 0; i <= n; ++i) {
        for (const auto& t : spec.row(i, n)) {
            if (t.target > n) continue;
            if (spec.kind() == ChainKind::Continuous && t.target == i) continue;
            sub.entries(i, t.target) = t.value;
        }
        if (spec.kind() == ChainKind::Continuous) sub.entries(i, i) = -spec.exit_rate(i);
        sub.deficit(i) = spec.tail(i, n + 1);
    }
    return sub;
}

}  // namespace augtrunc

#include "linalg.hpp"

#include <cmath>

namespace augtrunc::detail {

MMatrix restrict_kernel(const Eigen::MatrixXd& kernel, const std::vector<Eigen::Index>& idx) {
    const auto m = static_cast<Eigen::Index>(idx.size());
    std::vector<char> inside(static_cast<std::size_t>(kernel.rows()), 0);
    for (auto i : idx) inside[static_cast<std::size_t>(i)] = 1;

    MMatrix a{Eigen::MatrixXd::Zero(m, m), Eigen::VectorXd::Zero(m)};
    for (Eigen::Index r = 0; r < m; ++r) {
        const Eigen::Index i = idx[static_cast<std::size_t>(r)];
        double out = 0.0;
        for (Eigen::Index k = 0; k < kernel.cols(); ++k)
            if (k != i && !inside[static_cast<std::size_t>(k)]) out += kernel(i, k);
        a.slack(r) = out;
        for (Eigen::Index c = 0; c < m; ++c)
            if (c != r) a.weight(r, c) = kernel(i, idx[static_cast<std::size_t>(c)]);
    }
    return a;
}

bool solve(MMatrix a, Eigen::MatrixXd& b) {
    auto& w = a.weight;
    auto& s = a.slack;
    const Eigen::Index m = w.rows();
    Eigen::VectorXd pivot(m);
    std::vector<Eigen::Index> nz;
    nz.reserve(static_cast<std::size_t>(m));

    for (Eigen::Index k = 0; k < m; ++k) {
        nz.clear();
        double d = s(k);
        for (Eigen::Index l = k + 1; l < m; ++l)
            if (w(k, l) != 0.0) {
                d += w(k, l);
                nz.push_back(l);
            }
        if (!(d > 0.0) || !std::isfinite(d)) return false;
        pivot(k) = d;
        for (Eigen::Index i = k + 1; i < m; ++i) {
            const double wik = w(i, k);
            if (wik == 0.0) continue;
            const double f = wik / d;
            w(i, k) = 0.0;
            // Mass from i through k is rerouted to k's targets; the share
            // returning to i itself drops out of the pivot.
            s(i) += f * s(k);
            for (auto l : nz)
                if (l != i) w(i, l) += f * w(k, l);
            b.row(i) += f * b.row(k);
        }
    }
    for (Eigen::Index k = m; k-- > 0;) {
        for (Eigen::Index l = k + 1; l < m; ++l)
            if (w(k, l) != 0.0) b.row(k) += w(k, l) * b.row(l);
        b.row(k) /= pivot(k);
    }
    return b.allFinite();
}

}  // namespace augtrunc::detail

#include "ruv/latent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ruv/decomp.hpp"

namespace ruv {

namespace {

Index numerical_rank(const std::vector<double>& sigma, Index m, Index d) {
    if (sigma.empty() || sigma.front() <= 0.0) return 0;
    double cut = static_cast<double>(std::max(m, d)) *
                 std::numeric_limits<double>::epsilon() * sigma.front();
    Index r = 0;
    for (double s : sigma)
        if (s > cut) ++r;
    return r;
}

}  // namespace

SubspaceBasis estimate_subspace(const Matrix& y, const GroupPartition& partition,
                                Index k) {
    Matrix stacked = stack_centered(y, partition);
    const Index m = stacked.rows(), d = stacked.cols();
    if (k < 1 || k > std::min(m, d))
        throw RankError("estimate_subspace: k must satisfy 1 <= k <= min(m, d); got k=" +
                        std::to_string(k) + ", m=" + std::to_string(m) +
                        ", d=" + std::to_string(d));

    RightSvd svd = svd_right(stacked);
    Index rank = numerical_rank(svd.singular_values, m, d);
    if (k > rank)
        throw RankError("estimate_subspace: requested rank " + std::to_string(k) +
                        " exceeds the numerical rank " + std::to_string(rank) +
                        " of the stacked centered matrix");

    SubspaceBasis basis;
    if (k < static_cast<Index>(svd.singular_values.size())) {
        double gap = svd.singular_values[static_cast<std::size_t>(k - 1)] -
                     svd.singular_values[static_cast<std::size_t>(k)];
        if (gap <= 1e-10 * svd.singular_values.front())
            basis.warnings.push_back(
                "singular-value tie at position " + std::to_string(k) +
                "; the estimated basis is not unique");
    }

    basis.u = Matrix(d, k);
    for (Index j = 0; j < k; ++j) {
        Index arg = 0;
        double best = 0.0;
        for (Index i = 0; i < d; ++i) {
            double mag = std::abs(svd.v(i, j));
            if (mag > best) {
                best = mag;
                arg = i;
            }
        }
        double flip = svd.v(arg, j) < 0.0 ? -1.0 : 1.0;
        for (Index i = 0; i < d; ++i) basis.u(i, j) = flip * svd.v(i, j);
    }
    return basis;
}

DebiasOutput debias_latent(const Matrix& y, const SubspaceBasis& basis) {
    DebiasOutput out{project_out(y, basis), DebiasMethod::latent, basis};
    return out;
}

std::vector<double> rank_diagnostic(const Matrix& y, const GroupPartition& partition,
                                    Index k_max) {
    Matrix stacked = stack_centered(y, partition);
    RightSvd svd = svd_right(stacked);
    Index take = std::clamp<Index>(k_max, 0, std::min(stacked.rows(),
                                                      static_cast<Index>(svd.singular_values.size())));
    svd.singular_values.resize(static_cast<std::size_t>(take));
    return svd.singular_values;
}

}  // namespace ruv

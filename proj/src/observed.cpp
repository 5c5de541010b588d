#include "ruv/observed.hpp"

#include <cmath>

#include "ruv/decomp.hpp"

namespace ruv {

ObservedFit estimate_loading(const Matrix& y, const Matrix& x,
                             const GroupPartition& partition) {
    if (x.rows() != y.rows())
        throw DimensionError("estimate_loading: X and Y row counts differ");
    if (partition.groups.empty())
        throw DataError("estimate_loading: partition has no groups");

    GroupPartition canonical = partition;
    std::vector<std::string> warnings = validate_partition(canonical, y.rows());

    Matrix x_stacked = stack_centered(x, canonical);
    Matrix y_stacked = stack_centered(y, canonical);
    if (x_stacked.rows() < 1)
        throw DataError("estimate_loading: no rows after centering");

    Matrix gram = matmul_at_b(x_stacked, x_stacked);   // k x k
    Matrix cross = matmul_at_b(x_stacked, y_stacked);  // k x d
    Matrix gram_pinv = pinv_psd(gram);

    SymEig eig = eigh(gram);
    double lambda_max = eig.values.empty() ? 0.0 : std::max(eig.values.front(), 0.0);
    int rank = 0;
    for (double lambda : eig.values)
        if (lambda > 1e-12 * lambda_max) ++rank;
    if (rank < x.cols())
        warnings.push_back("pooled Gram matrix is rank deficient (rank " +
                           std::to_string(rank) + " of " + std::to_string(x.cols()) +
                           "); minimum-norm solution returned");

    Matrix loading_t = matmul(gram_pinv, cross);  // k x d

    ObservedFit fit;
    fit.loading = transpose(loading_t);
    fit.gram_pinv = std::move(gram_pinv);
    fit.residual_norm = frobenius_norm(sub(cross, matmul(gram, loading_t)));
    fit.effective_rank = rank;
    fit.warnings = std::move(warnings);
    return fit;
}

DebiasOutput debias_observed(const Matrix& y, const Matrix& x, const ObservedFit& fit) {
    if (x.rows() != y.rows())
        throw DimensionError("debias_observed: X and Y row counts differ");
    if (fit.loading.rows() != y.cols() || fit.loading.cols() != x.cols())
        throw DimensionError("debias_observed: fit shape does not match inputs");
    DebiasOutput out{sub(y, matmul_a_bt(x, fit.loading)), DebiasMethod::observed, fit};
    return out;
}

}  // namespace ruv

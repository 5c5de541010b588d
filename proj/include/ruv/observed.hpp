#pragma once

#include <string>
#include <variant>
#include <vector>

#include "ruv/core.hpp"

namespace ruv {

/// Result of the pooled group-centered least-squares fit.
struct ObservedFit {
    Matrix loading;    // d x k estimate of the protected-attribute loading
    Matrix gram_pinv;  // k x k pseudo-inverse of the pooled Gram matrix
    double residual_norm = 0.0;  // normal-equation residual (diagnostic)
    int effective_rank = 0;
    std::vector<std::string> warnings;
};

enum class DebiasMethod { observed, latent };

struct DebiasOutput {
    Matrix y_db;
    DebiasMethod method;
    std::variant<ObservedFit, SubspaceBasis> fit;
};

/// Pooled least squares over group-centered blocks:
///   loading^T = pinv(sum_g Xg^T Xg) * (sum_g Xg^T Yg),
/// the minimum-norm minimizer of (1/2) sum_g ||Yg - Xg loading^T||_F^2.
/// A rank-deficient pooled Gram matrix (e.g. X constant within every group)
/// yields a zero loading with a warning rather than an error.
///
/// The stacked centered cross products are computed as l x k / k x d
/// transposed Gram blocks; this is the unique dimension-consistent reading
/// of the pooled estimator and the verifiers in synthetic.hpp confirm it
/// numerically.
ObservedFit estimate_loading(const Matrix& y, const Matrix& x,
                             const GroupPartition& partition);

/// Y_db = Y - X * loading^T. Applies a previously estimated fit to any rows,
/// including rows outside the estimation partition.
DebiasOutput debias_observed(const Matrix& y, const Matrix& x, const ObservedFit& fit);

}  // namespace ruv

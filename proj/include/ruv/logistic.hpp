#pragma once

#include <vector>

#include "ruv/matrix.hpp"

namespace ruv {

struct LogisticModel {
    std::vector<double> weights;  // intercept first, then one weight per feature
    bool converged = false;
    int iterations = 0;
};

/// Ridge-penalized logistic regression by Newton-Raphson. The intercept is
/// unpenalized; the default penalty 1e-6 keeps the optimum unique on
/// separable subsamples without materially changing scores. Converged when
/// the penalized log-likelihood gradient infinity-norm is <= tol; otherwise
/// the best iterate is returned with converged = false.
LogisticModel fit_logistic(const Matrix& features, const std::vector<int>& labels,
                           double ridge = 1e-6, int max_iter = 100,
                           double tol = 1e-8);

/// Sigmoid of the affine score for each row.
std::vector<double> predict_prob(const LogisticModel& model, const Matrix& features);

}  // namespace ruv

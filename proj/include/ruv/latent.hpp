#pragma once

#include <vector>

#include "ruv/core.hpp"
#include "ruv/observed.hpp"

namespace ruv {

/// Estimates the protected subspace from group-centered data when the
/// protected attributes themselves are unobserved: the top-k right singular
/// vectors of the stacked centered matrix, which jointly minimize the
/// rank-k factor objective over loading and scores. Columns are ordered by
/// decreasing singular value; the largest-magnitude entry of each column is
/// made positive so results are reproducible bit-for-bit.
SubspaceBasis estimate_subspace(const Matrix& y, const GroupPartition& partition,
                                Index k);

/// Y_db = Y (I - U U^T).
DebiasOutput debias_latent(const Matrix& y, const SubspaceBasis& basis);

/// Singular-value profile of the stacked centered matrix (first k_max
/// values); supports choosing the subspace rank by inspection.
std::vector<double> rank_diagnostic(const Matrix& y, const GroupPartition& partition,
                                    Index k_max);

}  // namespace ruv

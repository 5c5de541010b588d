#pragma once

#include <string>
#include <vector>

#include "ruv/kernels.hpp"
#include "ruv/matrix.hpp"

namespace ruv {

/// Ordered list of disjoint row-index sets. Groups collect samples whose
/// permissible attributes are (approximately) shared, so that within-group
/// variation is attributable to protected attributes and noise. The union
/// may be a strict subset of all rows.
struct GroupPartition {
    std::vector<std::vector<Index>> groups;

    Index total_rows() const {
        Index m = 0;
        for (const auto& g : groups) m += static_cast<Index>(g.size());
        return m;
    }
};

/// Validates indices (range, disjointness, non-empty groups) against a
/// matrix with n rows and canonicalizes each group to ascending row order.
/// Returns warnings (singleton groups contribute nothing after centering).
std::vector<std::string> validate_partition(GroupPartition& partition, Index n);

/// Generative parameters of the factor model
///   Y = X L_p^T + Z L_z^T + E,   Z = X C^T + W
/// with column covariances for X, E and W. All covariance fields must be
/// symmetric with eigenvalues >= -1e-10 * ||Sigma||.
struct ModelParams {
    Matrix protected_loading;    // d x k
    Matrix permissible_loading;  // d x l
    Matrix confounding;          // l x k, regression of Z on X
    Matrix protected_cov;        // k x k
    Matrix noise_cov;            // d x d
    Matrix permissible_cov;      // l x l, covariance of W

    Index d() const { return protected_loading.rows(); }
    Index k() const { return protected_loading.cols(); }
    Index l() const { return permissible_loading.cols(); }
};

void validate_params(const ModelParams& params);

/// d x k matrix with orthonormal columns spanning the protected subspace.
struct SubspaceBasis {
    Matrix u;
    std::vector<std::string> warnings;

    Index dim() const { return u.rows(); }
    Index rank() const { return u.cols(); }
};

/// ||U^T U - I||_F; must be <= 1e-10 for a valid basis.
double orthonormality_defect(const SubspaceBasis& basis);

/// Selects the rows in idx and subtracts the per-column mean of the
/// selection. Column sums of the result are zero to ~1e-12 absolute.
Matrix center_group(const Matrix& m, const std::vector<Index>& idx);

/// Vertical concatenation of center_group over all groups, in group order
/// and ascending row order within each group.
Matrix stack_centered(const Matrix& m, const GroupPartition& partition);

/// Moore-Penrose pseudo-inverse of a symmetric PSD matrix via symmetric
/// eigendecomposition; eigenvalues <= rtol * lambda_max are treated as zero.
Matrix pinv_psd(const Matrix& s, double rtol = 1e-12);

/// Y (I - U U^T): removes the component of every row lying in span(U).
Matrix project_out(const Matrix& y, const SubspaceBasis& basis);

}  // namespace ruv

#pragma once

#include <vector>

#include "ruv/matrix.hpp"

namespace ruv {

/// Eigendecomposition of a symmetric matrix: S = V diag(values) V^T,
/// eigenvalues in decreasing order, eigenvectors in the columns of V.
struct SymEig {
    std::vector<double> values;
    Matrix vectors;
};

/// Cyclic Jacobi rotations; deterministic sweep order. Throws ContractError
/// if the input is not symmetric within rel_asym_tol (relative to max entry).
SymEig eigh(const Matrix& s, double rel_asym_tol = 1e-10);

/// Right singular structure of a general matrix A (m x n):
/// singular values in decreasing order, right singular vectors in the
/// columns of V (n x n). Computed by one-sided Jacobi on the columns of A,
/// a path independent of eigh.
struct RightSvd {
    std::vector<double> singular_values;
    Matrix v;
};

RightSvd svd_right(const Matrix& a);

/// Solves S X = B for symmetric positive definite S via Cholesky.
Matrix cholesky_solve(const Matrix& s, const Matrix& b);

/// A factor L with L L^T = S for symmetric positive semidefinite S.
/// Cholesky when S is definite, eigendecomposition square root otherwise.
/// Eigenvalues below -1e-8 * lambda_max violate the PSD contract.
Matrix psd_sqrt(const Matrix& s);

}  // namespace ruv

#pragma once

#include <vector>

#include "ruv/matrix.hpp"

namespace ruv {

// Data-parallel matrix kernels. The default entry points are OpenMP-parallel
// over output elements; ruv::ref holds the serial reference implementations.
// Both variants accumulate each output element in the same order, so their
// results are bit-identical and the reference can be used as an exact oracle
// in tests (and for speedup measurements in the benchmark tool).

/// C = A * B
Matrix matmul(const Matrix& a, const Matrix& b);

/// C = A^T * B  (A is m x p, B is m x q, result p x q)
Matrix matmul_at_b(const Matrix& a, const Matrix& b);

/// C = A * B^T  (A is m x p, B is q x p, result m x q)
Matrix matmul_a_bt(const Matrix& a, const Matrix& b);

/// Rows of M selected by idx with the per-column mean of the selection
/// subtracted. A second correction pass keeps residual column sums at
/// rounding level even for large groups.
Matrix centered_block(const Matrix& m, const std::vector<Index>& idx);

/// Copies the rows of M selected by idx, in idx order.
Matrix take_rows(const Matrix& m, const std::vector<Index>& idx);

Matrix add(const Matrix& a, const Matrix& b);
Matrix sub(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& a, double factor);
Matrix transpose(const Matrix& a);

double frobenius_norm(const Matrix& a);
double max_abs(const Matrix& a);

namespace ref {
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix matmul_at_b(const Matrix& a, const Matrix& b);
Matrix matmul_a_bt(const Matrix& a, const Matrix& b);
Matrix centered_block(const Matrix& m, const std::vector<Index>& idx);
}  // namespace ref

}  // namespace ruv

#include "ruv/kernels.hpp"

#include <cmath>
#include <cstdlib>

namespace ruv {

namespace {

void check_inner(Index a, Index b, const char* what) {
    if (a != b) throw DimensionError(std::string("inner dimension mismatch in ") + what);
}

// Work threshold below which the OpenMP variants run single-threaded.
// Output values do not depend on the thread count, only wall time does.
constexpr Index kParallelCutoff = 1 << 14;

inline double dot_row_col(const Matrix& a, const Matrix& b, Index i, Index j) {
    const Index inner = a.cols();
    double acc = 0.0;
    for (Index k = 0; k < inner; ++k) acc += a(i, k) * b(k, j);
    return acc;
}

inline double dot_cols(const Matrix& a, const Matrix& b, Index i, Index j) {
    const Index inner = a.rows();
    double acc = 0.0;
    for (Index k = 0; k < inner; ++k) acc += a(k, i) * b(k, j);
    return acc;
}

inline double dot_rows(const Matrix& a, const Matrix& b, Index i, Index j) {
    const Index inner = a.cols();
    double acc = 0.0;
    for (Index k = 0; k < inner; ++k) acc += a(i, k) * b(j, k);
    return acc;
}

void center_column(const Matrix& m, const std::vector<Index>& idx, Index j, Matrix& out) {
    const Index n = static_cast<Index>(idx.size());
    double sum = 0.0;
    for (Index r = 0; r < n; ++r) sum += m(idx[static_cast<std::size_t>(r)], j);
    double mean = sum / static_cast<double>(n);
    double resid = 0.0;
    for (Index r = 0; r < n; ++r) resid += m(idx[static_cast<std::size_t>(r)], j) - mean;
    mean += resid / static_cast<double>(n);
    for (Index r = 0; r < n; ++r)
        out(r, j) = m(idx[static_cast<std::size_t>(r)], j) - mean;
}

}  // namespace

Matrix matmul(const Matrix& a, const Matrix& b) {
    check_inner(a.cols(), b.rows(), "matmul");
    Matrix c(a.rows(), b.cols());
    const Index rows = a.rows(), cols = b.cols();
#pragma omp parallel for if (rows * cols * a.cols() > kParallelCutoff)
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) c(i, j) = dot_row_col(a, b, i, j);
    return c;
}

Matrix matmul_at_b(const Matrix& a, const Matrix& b) {
    check_inner(a.rows(), b.rows(), "matmul_at_b");
    Matrix c(a.cols(), b.cols());
    const Index rows = a.cols(), cols = b.cols();
#pragma omp parallel for if (rows * cols * a.rows() > kParallelCutoff)
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) c(i, j) = dot_cols(a, b, i, j);
    return c;
}

Matrix matmul_a_bt(const Matrix& a, const Matrix& b) {
    check_inner(a.cols(), b.cols(), "matmul_a_bt");
    Matrix c(a.rows(), b.rows());
    const Index rows = a.rows(), cols = b.rows();
#pragma omp parallel for if (rows * cols * a.cols() > kParallelCutoff)
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) c(i, j) = dot_rows(a, b, i, j);
    return c;
}

Matrix centered_block(const Matrix& m, const std::vector<Index>& idx) {
    for (Index r : idx)
        if (r < 0 || r >= m.rows()) throw PartitionError("group index out of range");
    Matrix out(static_cast<Index>(idx.size()), m.cols());
    const Index cols = m.cols();
#pragma omp parallel for if (cols * static_cast<Index>(idx.size()) > kParallelCutoff)
    for (Index j = 0; j < cols; ++j) center_column(m, idx, j, out);
    return out;
}

Matrix take_rows(const Matrix& m, const std::vector<Index>& idx) {
    Matrix out(static_cast<Index>(idx.size()), m.cols());
    for (Index i = 0; i < out.rows(); ++i) {
        Index src = idx[static_cast<std::size_t>(i)];
        if (src < 0 || src >= m.rows()) throw DimensionError("take_rows: index out of range");
        for (Index j = 0; j < m.cols(); ++j) out(i, j) = m(src, j);
    }
    return out;
}

Matrix add(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) throw DimensionError("shape mismatch in add");
    Matrix c(a.rows(), a.cols());
    const Index n = a.size();
#pragma omp parallel for if (n > kParallelCutoff)
    for (Index i = 0; i < n; ++i) c.data()[i] = a.data()[i] + b.data()[i];
    return c;
}

Matrix sub(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) throw DimensionError("shape mismatch in sub");
    Matrix c(a.rows(), a.cols());
    const Index n = a.size();
#pragma omp parallel for if (n > kParallelCutoff)
    for (Index i = 0; i < n; ++i) c.data()[i] = a.data()[i] - b.data()[i];
    return c;
}

Matrix scale(const Matrix& a, double factor) {
    Matrix c(a.rows(), a.cols());
    const Index n = a.size();
#pragma omp parallel for if (n > kParallelCutoff)
    for (Index i = 0; i < n; ++i) c.data()[i] = a.data()[i] * factor;
    return c;
}

Matrix transpose(const Matrix& a) {
    Matrix c(a.cols(), a.rows());
    const Index rows = a.cols();
#pragma omp parallel for if (a.size() > kParallelCutoff)
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < a.rows(); ++j) c(i, j) = a(j, i);
    return c;
}

double frobenius_norm(const Matrix& a) {
    double acc = 0.0;
    for (Index i = 0; i < a.size(); ++i) acc += a.data()[i] * a.data()[i];
    return std::sqrt(acc);
}

double max_abs(const Matrix& a) {
    double m = 0.0;
    for (Index i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i]));
    return m;
}

namespace ref {

Matrix matmul(const Matrix& a, const Matrix& b) {
    check_inner(a.cols(), b.rows(), "matmul");
    Matrix c(a.rows(), b.cols());
    for (Index i = 0; i < a.rows(); ++i)
        for (Index j = 0; j < b.cols(); ++j) c(i, j) = dot_row_col(a, b, i, j);
    return c;
}

Matrix matmul_at_b(const Matrix& a, const Matrix& b) {
    check_inner(a.rows(), b.rows(), "matmul_at_b");
    Matrix c(a.cols(), b.cols());
    for (Index i = 0; i < a.cols(); ++i)
        for (Index j = 0; j < b.cols(); ++j) c(i, j) = dot_cols(a, b, i, j);
    return c;
}

Matrix matmul_a_bt(const Matrix& a, const Matrix& b) {
    check_inner(a.cols(), b.cols(), "matmul_a_bt");
    Matrix c(a.rows(), b.rows());
    for (Index i = 0; i < a.rows(); ++i)
        for (Index j = 0; j < b.rows(); ++j) c(i, j) = dot_rows(a, b, i, j);
    return c;
}

Matrix centered_block(const Matrix& m, const std::vector<Index>& idx) {
    for (Index r : idx)
        if (r < 0 || r >= m.rows()) throw PartitionError("group index out of range");
    Matrix out(static_cast<Index>(idx.size()), m.cols());
    for (Index j = 0; j < m.cols(); ++j) center_column(m, idx, j, out);
    return out;
}

}  // namespace ref

}  // namespace ruv

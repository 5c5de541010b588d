#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

#include "ruv/error.hpp"

namespace ruv {

using Index = std::ptrdiff_t;

/// Dense row-major matrix of doubles. Zero rows or columns are legal and
/// behave as the obvious degenerate cases in products and concatenations.
class Matrix {
public:
    Matrix() = default;
    Matrix(Index rows, Index cols)
        : rows_(check_dim(rows)), cols_(check_dim(cols)),
          data_(static_cast<std::size_t>(rows * cols), 0.0) {}

    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    static Matrix identity(Index n);

    Index rows() const { return rows_; }
    Index cols() const { return cols_; }
    Index size() const { return rows_ * cols_; }

    double& operator()(Index i, Index j) { return data_[static_cast<std::size_t>(i * cols_ + j)]; }
    double operator()(Index i, Index j) const { return data_[static_cast<std::size_t>(i * cols_ + j)]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    const double* row(Index i) const { return data_.data() + i * cols_; }
    double* row(Index i) { return data_.data() + i * cols_; }

    bool same_shape(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

    bool operator==(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_ && data_ == other.data_;
    }

    bool all_finite() const;

private:
    static Index check_dim(Index value) {
        if (value < 0) throw DimensionError("matrix dimension must be non-negative");
        return value;
    }

    Index rows_ = 0;
    Index cols_ = 0;
    std::vector<double> data_;
};

}  // namespace ruv

#include "ruv/core.hpp"

#include <algorithm>
#include <cmath>

#include "ruv/decomp.hpp"

namespace ruv {

std::vector<std::string> validate_partition(GroupPartition& partition, Index n) {
    std::vector<std::string> warnings;
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    for (std::size_t g = 0; g < partition.groups.size(); ++g) {
        auto& idx = partition.groups[g];
        if (idx.empty())
            throw PartitionError("group " + std::to_string(g) + " is empty");
        std::sort(idx.begin(), idx.end());
        for (Index r : idx) {
            if (r < 0 || r >= n)
                throw PartitionError("group " + std::to_string(g) + ": index " +
                                     std::to_string(r) + " out of range [0," +
                                     std::to_string(n) + ")");
            if (seen[static_cast<std::size_t>(r)])
                throw PartitionError("row " + std::to_string(r) +
                                     " appears in more than one group");
            seen[static_cast<std::size_t>(r)] = 1;
        }
        if (idx.size() == 1)
            warnings.push_back("group " + std::to_string(g) +
                               " is a singleton and contributes zero rows after centering");
    }
    return warnings;
}

void validate_params(const ModelParams& params) {
    const Index d = params.d(), k = params.k(), l = params.l();
    if (d < 1 || k < 0 || l < 0)
        throw DimensionError("model params: need d >= 1, k >= 0, l >= 0");
    if (params.permissible_loading.rows() != d)
        throw DimensionError("model params: loading matrices disagree on d");
    if (params.confounding.rows() != l || params.confounding.cols() != k)
        throw DimensionError("model params: confounding matrix must be l x k");
    auto check_cov = [](const Matrix& s, Index dim, const char* name) {
        if (s.rows() != dim || s.cols() != dim)
            throw DimensionError(std::string("model params: ") + name + " has wrong shape");
        if (dim == 0) return;
        SymEig eig = eigh(s);  // throws ContractError when not symmetric
        double scale = frobenius_norm(s);
        for (double lambda : eig.values)
            if (lambda < -1e-10 * std::max(scale, 1.0))
                throw ContractError(std::string("model params: ") + name +
                                    " is not positive semidefinite");
    };
    check_cov(params.protected_cov, k, "protected covariance");
    check_cov(params.noise_cov, d, "noise covariance");
    check_cov(params.permissible_cov, l, "permissible covariance");
}

double orthonormality_defect(const SubspaceBasis& basis) {
    Matrix gram = matmul_at_b(basis.u, basis.u);
    return frobenius_norm(sub(gram, Matrix::identity(basis.rank())));
}

Matrix center_group(const Matrix& m, const std::vector<Index>& idx) {
    if (idx.empty()) throw PartitionError("center_group: empty index set");
    return centered_block(m, idx);
}

Matrix stack_centered(const Matrix& m, const GroupPartition& partition) {
    GroupPartition canonical = partition;
    validate_partition(canonical, m.rows());
    Matrix out(canonical.total_rows(), m.cols());
    Index row = 0;
    for (const auto& idx : canonical.groups) {
        Matrix block = centered_block(m, idx);
        for (Index i = 0; i < block.rows(); ++i, ++row)
            for (Index j = 0; j < m.cols(); ++j) out(row, j) = block(i, j);
    }
    return out;
}

Matrix pinv_psd(const Matrix& s, double rtol) {
    SymEig eig = eigh(s);  // enforces the symmetry contract
    const Index n = s.rows();
    double lambda_max = eig.values.empty() ? 0.0 : std::max(eig.values.front(), 0.0);
    double cut = rtol * lambda_max;
    Matrix scaled(n, n);
    for (Index j = 0; j < n; ++j) {
        double lambda = eig.values[static_cast<std::size_t>(j)];
        double inv = lambda > cut ? 1.0 / lambda : 0.0;
        for (Index i = 0; i < n; ++i) scaled(i, j) = eig.vectors(i, j) * inv;
    }
    return matmul_a_bt(scaled, eig.vectors);
}

Matrix project_out(const Matrix& y, const SubspaceBasis& basis) {
    if (basis.dim() != y.cols())
        throw DimensionError("project_out: basis dimension does not match columns of Y");
    if (basis.rank() == 0) return y;
    Matrix coords = matmul(y, basis.u);               // n x k
    Matrix reconstruction = matmul_a_bt(coords, basis.u);
    return sub(y, reconstruction);
}

}  // namespace ruv

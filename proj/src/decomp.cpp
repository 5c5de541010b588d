#include "ruv/decomp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ruv/kernels.hpp"

namespace ruv {

namespace {

constexpr int kMaxSweeps = 64;

void check_square(const Matrix& s, const char* what) {
    if (s.rows() != s.cols()) throw DimensionError(std::string(what) + ": matrix must be square");
}

void check_symmetric(const Matrix& s, double rel_tol, const char* what) {
    double scale = max_abs(s);
    double tol = rel_tol * std::max(scale, 1e-300);
    for (Index i = 0; i < s.rows(); ++i)
        for (Index j = i + 1; j < s.cols(); ++j)
            if (std::abs(s(i, j) - s(j, i)) > tol)
                throw ContractError(std::string(what) + ": matrix is not symmetric");
}

double offdiag_norm(const Matrix& s) {
    double acc = 0.0;
    for (Index i = 0; i < s.rows(); ++i)
        for (Index j = 0; j < s.cols(); ++j)
            if (i != j) acc += s(i, j) * s(i, j);
    return std::sqrt(acc);
}

}  // namespace

SymEig eigh(const Matrix& s_in, double rel_asym_tol) {
    check_square(s_in, "eigh");
    check_symmetric(s_in, rel_asym_tol, "eigh");
    const Index n = s_in.rows();
    Matrix s = s_in;
    // Symmetrize so rotations see an exactly symmetric working copy.
    for (Index i = 0; i < n; ++i)
        for (Index j = i + 1; j < n; ++j) {
            double v = 0.5 * (s(i, j) + s(j, i));
            s(i, j) = v;
            s(j, i) = v;
        }
    Matrix v = Matrix::identity(n);
    const double norm = frobenius_norm(s);
    // rotation rounding noise accumulates at ~n*eps*||S||; stopping tighter
    // than that only burns sweeps
    const double stop = static_cast<double>(n) *
                        std::numeric_limits<double>::epsilon() * std::max(norm, 1e-300);

    for (int sweep = 0; sweep < kMaxSweeps && offdiag_norm(s) > stop; ++sweep) {
        for (Index p = 0; p < n - 1; ++p) {
            for (Index q = p + 1; q < n; ++q) {
                double apq = s(p, q);
                if (std::abs(apq) <= stop / (static_cast<double>(n) + 1.0)) continue;
                double theta = (s(q, q) - s(p, p)) / (2.0 * apq);
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double sn = t * c;
                for (Index k = 0; k < n; ++k) {
                    double skp = s(k, p), skq = s(k, q);
                    s(k, p) = c * skp - sn * skq;
                    s(k, q) = sn * skp + c * skq;
                }
                for (Index k = 0; k < n; ++k) {
                    double spk = s(p, k), sqk = s(q, k);
                    s(p, k) = c * spk - sn * sqk;
                    s(q, k) = sn * spk + c * sqk;
                }
                for (Index k = 0; k < n; ++k) {
                    double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - sn * vkq;
                    v(k, q) = sn * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return s(a, a) > s(b, b); });

    SymEig out;
    out.values.resize(static_cast<std::size_t>(n));
    out.vectors = Matrix(n, n);
    for (Index j = 0; j < n; ++j) {
        Index src = order[static_cast<std::size_t>(j)];
        out.values[static_cast<std::size_t>(j)] = s(src, src);
        for (Index i = 0; i < n; ++i) out.vectors(i, j) = v(i, src);
    }
    return out;
}

RightSvd svd_right(const Matrix& a_in) {
    const Index n = a_in.cols();
    Matrix a = a_in;
    Matrix v = Matrix::identity(n);
    // the dot products carry rounding noise of order rows*eps relative to the
    // column norms, so orthogonality below that is not resolvable
    const double tol = static_cast<double>(std::max<Index>(a.rows(), 16)) *
                       std::numeric_limits<double>::epsilon();

    bool converged = (n <= 1);
    for (int sweep = 0; sweep < kMaxSweeps && !converged; ++sweep) {
        converged = true;
        // columns negligible against the largest are deflated: rotating them
        // against a dominant column regenerates subnormal crumbs forever
        double max_sq = 0.0;
        for (Index j = 0; j < n; ++j) {
            double sq = 0.0;
            for (Index k = 0; k < a.rows(); ++k) sq += a(k, j) * a(k, j);
            max_sq = std::max(max_sq, sq);
        }
        const double defl_sq =
            max_sq * std::numeric_limits<double>::epsilon() * std::numeric_limits<double>::epsilon();
        for (Index p = 0; p < n - 1; ++p) {
            for (Index q = p + 1; q < n; ++q) {
                double app = 0.0, aqq = 0.0, apq = 0.0;
                for (Index k = 0; k < a.rows(); ++k) {
                    app += a(k, p) * a(k, p);
                    aqq += a(k, q) * a(k, q);
                    apq += a(k, p) * a(k, q);
                }
                if (app <= defl_sq || aqq <= defl_sq) continue;
                if (apq * apq <= tol * tol * app * aqq) continue;
                converged = false;
                double tau = (aqq - app) / (2.0 * apq);
                double t = (tau >= 0 ? 1.0 : -1.0) /
                           (std::abs(tau) + std::sqrt(tau * tau + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double sn = c * t;
                for (Index k = 0; k < a.rows(); ++k) {
                    double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - sn * akq;
                    a(k, q) = sn * akp + c * akq;
                }
                for (Index k = 0; k < n; ++k) {
                    double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - sn * vkq;
                    v(k, q) = sn * vkp + c * vkq;
                }
            }
        }
    }
    if (!converged) throw NumericalError("svd_right: Jacobi sweeps did not converge");

    std::vector<double> sigma(static_cast<std::size_t>(n), 0.0);
    for (Index j = 0; j < n; ++j) {
        double acc = 0.0;
        for (Index k = 0; k < a.rows(); ++k) acc += a(k, j) * a(k, j);
        sigma[static_cast<std::size_t>(j)] = std::sqrt(acc);
    }

    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index x, Index y) {
        return sigma[static_cast<std::size_t>(x)] > sigma[static_cast<std::size_t>(y)];
    });

    RightSvd out;
    out.singular_values.resize(static_cast<std::size_t>(n));
    out.v = Matrix(n, n);
    for (Index j = 0; j < n; ++j) {
        Index src = order[static_cast<std::size_t>(j)];
        out.singular_values[static_cast<std::size_t>(j)] = sigma[static_cast<std::size_t>(src)];
        for (Index i = 0; i < n; ++i) out.v(i, j) = v(i, src);
    }
    return out;
}

Matrix cholesky_solve(const Matrix& s, const Matrix& b) {
    check_square(s, "cholesky_solve");
    if (s.rows() != b.rows()) throw DimensionError("cholesky_solve: rhs rows mismatch");
    const Index n = s.rows();
    Matrix l(n, n);
    for (Index j = 0; j < n; ++j) {
        double diag = s(j, j);
        for (Index k = 0; k < j; ++k) diag -= l(j, k) * l(j, k);
        if (diag <= 0.0 || !std::isfinite(diag))
            throw ContractError("cholesky_solve: matrix is not positive definite");
        l(j, j) = std::sqrt(diag);
        for (Index i = j + 1; i < n; ++i) {
            double acc = s(i, j);
            for (Index k = 0; k < j; ++k) acc -= l(i, k) * l(j, k);
            l(i, j) = acc / l(j, j);
        }
    }
    // forward then backward substitution per right-hand-side column
    Matrix x = b;
    for (Index col = 0; col < b.cols(); ++col) {
        for (Index i = 0; i < n; ++i) {
            double acc = x(i, col);
            for (Index k = 0; k < i; ++k) acc -= l(i, k) * x(k, col);
            x(i, col) = acc / l(i, i);
        }
        for (Index i = n - 1; i >= 0; --i) {
            double acc = x(i, col);
            for (Index k = i + 1; k < n; ++k) acc -= l(k, i) * x(k, col);
            x(i, col) = acc / l(i, i);
        }
    }
    return x;
}

Matrix psd_sqrt(const Matrix& s) {
    check_square(s, "psd_sqrt");
    const Index n = s.rows();
    if (n == 0) return s;
    // Cholesky attempt first; semidefinite inputs fall through to the
    // eigendecomposition square root.
    bool ok = true;
    Matrix l(n, n);
    for (Index j = 0; j < n && ok; ++j) {
        double diag = s(j, j);
        for (Index k = 0; k < j; ++k) diag -= l(j, k) * l(j, k);
        if (diag <= 0.0 || !std::isfinite(diag)) {
            ok = false;
            break;
        }
        l(j, j) = std::sqrt(diag);
        for (Index i = j + 1; i < n; ++i) {
            double acc = s(i, j);
            for (Index k = 0; k < j; ++k) acc -= l(i, k) * l(j, k);
            l(i, j) = acc / l(j, j);
        }
    }
    if (ok) return l;

    SymEig eig = eigh(s);
    double lambda_max = eig.values.empty() ? 0.0 : std::max(eig.values.front(), 0.0);
    Matrix root(n, n);
    for (Index j = 0; j < n; ++j) {
        double lambda = eig.values[static_cast<std::size_t>(j)];
        if (lambda < -1e-8 * std::max(lambda_max, 1.0))
            throw ContractError("psd_sqrt: matrix is not positive semidefinite");
        double r = std::sqrt(std::max(lambda, 0.0));
        for (Index i = 0; i < n; ++i) root(i, j) = eig.vectors(i, j) * r;
    }
    return root;
}

}  // namespace ruv

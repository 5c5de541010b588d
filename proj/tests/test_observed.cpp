#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ruv/observed.hpp"
#include "ruv/rng.hpp"
#include "ruv/synthetic.hpp"
#include "support/oracles.hpp"

using ruv::GroupPartition;
using ruv::Index;
using ruv::Matrix;

namespace {

Matrix random_matrix(Index rows, Index cols, std::uint64_t seed) {
    ruv::Rng rng(seed);
    Matrix m(rows, cols);
    for (Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
    return m;
}

GroupPartition chunks(Index n, Index g) {
    GroupPartition p;
    Index per = n / g;
    for (Index i = 0; i < g; ++i) {
        std::vector<Index> idx;
        Index hi = i == g - 1 ? n : (i + 1) * per;
        for (Index r = i * per; r < hi; ++r) idx.push_back(r);
        p.groups.push_back(idx);
    }
    return p;
}

}  // namespace

TEST_CASE("exact noiseless one-group fit") {
    Matrix x{{1}, {-1}};
    Matrix y{{2, 0}, {-2, 0}};
    GroupPartition p{{{0, 1}}};
    ruv::ObservedFit fit = ruv::estimate_loading(y, x, p);
    CHECK(fit.loading(0, 0) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(fit.loading(1, 0) == doctest::Approx(0.0));
    CHECK(fit.effective_rank == 1);
}

TEST_CASE("zero-residual recovery of an exact linear effect") {
    Matrix x = random_matrix(12, 2, 1);
    Matrix a = random_matrix(4, 2, 2);
    Matrix y = ruv::matmul_a_bt(x, a);
    GroupPartition p = chunks(12, 3);
    ruv::ObservedFit fit = ruv::estimate_loading(y, x, p);
    CHECK(ruv::frobenius_norm(ruv::sub(fit.loading, a)) <=
          1e-10 * ruv::frobenius_norm(a));
    CHECK(fit.residual_norm <= 1e-10 * ruv::frobenius_norm(y));
}

TEST_CASE("pooled scalar example matches a brute-force oracle") {
    // two groups, one regressor, one representation column
    Matrix x{{0}, {1}, {0}, {1}};
    Matrix y{{0}, {3}, {1}, {2}};
    GroupPartition p{{{0, 1}, {2, 3}}};
    ruv::ObservedFit fit = ruv::estimate_loading(y, x, p);
    CHECK(fit.loading(0, 0) == doctest::Approx(2.0).epsilon(1e-12));

    Matrix xs = ruv::stack_centered(x, p);
    Matrix ys = ruv::stack_centered(y, p);
    auto objective = [&](double a) {
        double acc = 0.0;
        for (Index i = 0; i < xs.rows(); ++i) {
            double r = ys(i, 0) - xs(i, 0) * a;
            acc += 0.5 * r * r;
        }
        return acc;
    };
    double oracle_a = oracle::grid_minimize(objective, -10.0, 10.0);
    CHECK(fit.loading(0, 0) == doctest::Approx(oracle_a).epsilon(1e-8));
}

TEST_CASE("debias basics") {
    Matrix y = random_matrix(5, 3, 3);
    Matrix x = random_matrix(5, 2, 4);
    SUBCASE("zero loading leaves Y unchanged") {
        ruv::ObservedFit fit;
        fit.loading = Matrix(3, 2);
        fit.gram_pinv = Matrix(2, 2);
        CHECK(ruv::debias_observed(y, x, fit).y_db == y);
    }
    SUBCASE("zero X leaves Y unchanged") {
        ruv::ObservedFit fit;
        fit.loading = random_matrix(3, 2, 5);
        fit.gram_pinv = Matrix(2, 2);
        CHECK(ruv::debias_observed(y, Matrix(5, 2), fit).y_db == y);
    }
    SUBCASE("exact effect debiases to zero") {
        ruv::ObservedFit fit;
        fit.loading = random_matrix(3, 2, 6);
        fit.gram_pinv = Matrix(2, 2);
        Matrix y_exact = ruv::matmul_a_bt(x, fit.loading);
        CHECK(ruv::frobenius_norm(ruv::debias_observed(y_exact, x, fit).y_db) <= 1e-12);
    }
    SUBCASE("shape mismatch") {
        ruv::ObservedFit fit;
        fit.loading = Matrix(4, 2);
        CHECK_THROWS_AS(ruv::debias_observed(y, x, fit), ruv::DimensionError);
    }
}

TEST_CASE("normal equations and self-annihilation on random inputs") {
    for (int trial = 0; trial < 20; ++trial) {
        auto seed = static_cast<std::uint64_t>(trial);
        ruv::Rng rng(seed, 99);
        Index n = 10 + static_cast<Index>(rng.uniform() * 40);
        Index d = 1 + static_cast<Index>(rng.uniform() * 5);
        Index k = 1 + static_cast<Index>(rng.uniform() * 3);
        Matrix x = random_matrix(n, k, seed * 3 + 1);
        Matrix y = random_matrix(n, d, seed * 3 + 2);
        GroupPartition p = chunks(n, 2 + (trial % 3));

        ruv::ObservedFit fit = ruv::estimate_loading(y, x, p);
        Matrix xs = ruv::stack_centered(x, p);
        Matrix ys = ruv::stack_centered(y, p);
        double bound = 1e-8 * ruv::frobenius_norm(xs) * ruv::frobenius_norm(ys);

        Matrix resid = ruv::sub(ys, ruv::matmul_a_bt(xs, fit.loading));
        CHECK(ruv::frobenius_norm(ruv::matmul_at_b(xs, resid)) <= bound);

        Matrix y_db = ruv::debias_observed(y, x, fit).y_db;
        ruv::ObservedFit refit = ruv::estimate_loading(y_db, x, p);
        CHECK(ruv::frobenius_norm(refit.loading) <=
              1e-8 * (ruv::frobenius_norm(fit.loading) + 1e-30));
    }
}

TEST_CASE("shift invariance within groups") {
    Matrix x = random_matrix(10, 2, 7);
    Matrix y = random_matrix(10, 3, 8);
    GroupPartition p = chunks(10, 2);
    ruv::ObservedFit fit = ruv::estimate_loading(y, x, p);

    Matrix shifted = y;
    double shift[3] = {5.0, -2.5, 11.0};
    for (Index r : p.groups[0])
        for (Index j = 0; j < 3; ++j) shifted(r, j) += shift[j];
    ruv::ObservedFit fit2 = ruv::estimate_loading(shifted, x, p);
    CHECK(ruv::frobenius_norm(ruv::sub(fit2.loading, fit.loading)) <=
          1e-12 * (1.0 + ruv::frobenius_norm(fit.loading)));
}

TEST_CASE("noiseless homogeneous groups recover the loading exactly") {
    ruv::ModelParams params;
    params.protected_loading = random_matrix(4, 2, 9);
    params.permissible_loading = random_matrix(4, 2, 10);
    params.confounding = Matrix(2, 2);
    params.protected_cov = Matrix::identity(2);
    params.noise_cov = Matrix(4, 4);  // no noise
    params.permissible_cov = Matrix::identity(2);

    GroupPartition p = chunks(20, 2);
    ruv::PartitionSpec spec{p, true, Matrix(2, 2)};  // shared z per group (zero here)
    ruv::SyntheticData data = ruv::generate(params, 20, spec, 5);
    ruv::ObservedFit fit = ruv::estimate_loading(data.y, data.x, p);
    CHECK(fit.effective_rank == 2);
    CHECK(ruv::frobenius_norm(ruv::sub(fit.loading, params.protected_loading)) <=
          1e-10 * ruv::frobenius_norm(params.protected_loading));
}

TEST_CASE("degenerate inputs") {
    SUBCASE("empty partition") {
        Matrix y(4, 2), x(4, 1);
        CHECK_THROWS_AS(ruv::estimate_loading(y, x, GroupPartition{}), ruv::DataError);
    }
    SUBCASE("constant X in every group yields zero loading and a warning") {
        Matrix x{{1}, {1}, {2}, {2}};
        Matrix y = random_matrix(4, 2, 11);
        GroupPartition p{{{0, 1}, {2, 3}}};
        ruv::ObservedFit fit = ruv::estimate_loading(y, x, p);
        CHECK(ruv::max_abs(fit.loading) == 0.0);
        CHECK(fit.effective_rank == 0);
        bool warned = false;
        for (const auto& w : fit.warnings)
            if (w.find("rank deficient") != std::string::npos) warned = true;
        CHECK(warned);
    }
}

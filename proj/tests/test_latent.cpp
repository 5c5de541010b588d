#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>

#include "ruv/latent.hpp"
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

TEST_CASE("rank-1 centered blocks recover the shared direction") {
    const Index d = 4;
    double direction[4] = {0.5, -0.5, 0.5, 0.5};  // unit vector
    Matrix y(8, d);
    ruv::Rng rng(3);
    for (Index g = 0; g < 2; ++g) {
        double offset = g == 0 ? 2.0 : -1.0;  // constant per group, removed by centering
        for (Index i = 0; i < 4; ++i) {
            double coeff = rng.normal();
            for (Index j = 0; j < d; ++j)
                y(g * 4 + i, j) = coeff * direction[j] + offset;
        }
    }
    GroupPartition p = chunks(8, 2);
    ruv::SubspaceBasis basis = ruv::estimate_subspace(y, p, 1);
    double dot = 0.0;
    for (Index j = 0; j < d; ++j) dot += basis.u(j, 0) * direction[j];
    CHECK(std::abs(std::abs(dot) - 1.0) <= 1e-10);
    // sign convention: the largest-magnitude entry is positive
    Index arg = 0;
    for (Index j = 1; j < d; ++j)
        if (std::abs(basis.u(j, 0)) > std::abs(basis.u(arg, 0))) arg = j;
    CHECK(basis.u(arg, 0) > 0.0);
}

TEST_CASE("constant groups have rank zero") {
    Matrix y{{1, 2}, {1, 2}, {5, 5}, {5, 5}};
    GroupPartition p = chunks(4, 2);
    CHECK_THROWS_AS(ruv::estimate_subspace(y, p, 1), ruv::RankError);
}

TEST_CASE("k beyond min(m, d) is rejected") {
    Matrix y = random_matrix(6, 3, 4);
    GroupPartition p = chunks(6, 2);
    CHECK_THROWS_AS(ruv::estimate_subspace(y, p, 4), ruv::RankError);
    CHECK_THROWS_AS(ruv::estimate_subspace(y, p, 0), ruv::RankError);
}

TEST_CASE("random stacked matrix matches the eigendecomposition oracle") {
    Matrix y = random_matrix(20, 5, 5);
    GroupPartition p = chunks(20, 4);
    ruv::SubspaceBasis basis = ruv::estimate_subspace(y, p, 2);
    CHECK(ruv::orthonormality_defect(basis) <= 1e-10);

    Matrix stacked = ruv::stack_centered(y, p);
    Matrix gram(5, 5);
    for (Index a = 0; a < 5; ++a)
        for (Index b = 0; b < 5; ++b) {
            double acc = 0.0;
            for (Index i = 0; i < stacked.rows(); ++i) acc += stacked(i, a) * stacked(i, b);
            gram(a, b) = acc;
        }
    oracle::EigPairs pairs = oracle::top_eigenpairs_psd(gram, 2);
    CHECK(oracle::principal_angle(basis.u, pairs.vectors) <= 1e-8);
}

TEST_CASE("singular-value tie warns but succeeds") {
    // centered blocks span two directions with identical singular values
    Matrix y{{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    GroupPartition p = chunks(4, 2);
    ruv::SubspaceBasis basis = ruv::estimate_subspace(y, p, 1);
    REQUIRE(basis.warnings.size() >= 1);
    CHECK(basis.warnings[0].find("tie") != std::string::npos);
}

TEST_CASE("debias_latent") {
    SUBCASE("full-dimensional basis leaves only zeros") {
        Matrix y = random_matrix(6, 3, 6);
        GroupPartition p = chunks(6, 2);
        ruv::SubspaceBasis basis = ruv::estimate_subspace(y, p, 3);
        ruv::DebiasOutput out = ruv::debias_latent(y, basis);
        CHECK(ruv::frobenius_norm(out.y_db) <= 1e-10 * ruv::frobenius_norm(y));
        CHECK(out.method == ruv::DebiasMethod::latent);
    }
    SUBCASE("empty basis is the identity") {
        ruv::SubspaceBasis none;
        none.u = Matrix(3, 0);
        Matrix y = random_matrix(5, 3, 7);
        CHECK(ruv::debias_latent(y, none).y_db == y);
    }
    SUBCASE("orthogonal variation is preserved") {
        // representation built from directions orthogonal to the basis
        ruv::SubspaceBasis basis;
        basis.u = Matrix{{1}, {0}, {0}};
        Matrix z = random_matrix(6, 2, 8);
        Matrix b{{0, 0}, {1, 0}, {0, 1}};  // spans the orthocomplement
        Matrix y = ruv::matmul_a_bt(z, b);
        Matrix y_db = ruv::debias_latent(y, basis).y_db;
        CHECK(ruv::frobenius_norm(ruv::sub(y_db, y)) <=
              1e-12 * (1.0 + ruv::frobenius_norm(y)));
    }
    SUBCASE("projection is idempotent") {
        Matrix y = random_matrix(9, 4, 9);
        GroupPartition p = chunks(9, 3);
        ruv::SubspaceBasis basis = ruv::estimate_subspace(y, p, 2);
        Matrix once = ruv::debias_latent(y, basis).y_db;
        Matrix twice = ruv::debias_latent(once, basis).y_db;
        CHECK(ruv::frobenius_norm(ruv::sub(twice, once)) <=
              1e-10 * (1.0 + ruv::frobenius_norm(once)));
    }
}

TEST_CASE("rank_diagnostic") {
    SUBCASE("noiseless rank-1 data shows one nonzero value") {
        Matrix y(6, 3);
        ruv::Rng rng(10);
        for (Index i = 0; i < 6; ++i) {
            double c = rng.normal();
            y(i, 0) = c;
            y(i, 1) = 2 * c;
            y(i, 2) = -c;
        }
        GroupPartition p = chunks(6, 2);
        auto sv = ruv::rank_diagnostic(y, p, 3);
        REQUIRE(sv.size() == 3);
        CHECK(sv[0] > 0.0);
        CHECK(sv[1] <= 1e-12 * sv[0]);
        CHECK(sv[2] <= 1e-12 * sv[0]);
    }
    SUBCASE("zero matrix gives all zeros") {
        Matrix y(4, 2);
        GroupPartition p = chunks(4, 2);
        auto sv = ruv::rank_diagnostic(y, p, 2);
        for (double s : sv) CHECK(s == 0.0);
    }
    SUBCASE("values match the oracle spectrum") {
        Matrix y = random_matrix(9, 3, 11);
        GroupPartition p = chunks(9, 3);
        auto sv = ruv::rank_diagnostic(y, p, 3);
        Matrix stacked = ruv::stack_centered(y, p);
        Matrix gram = ruv::matmul_at_b(stacked, stacked);
        auto eig = oracle::all_eigenvalues_psd(gram);
        std::sort(eig.begin(), eig.end(), std::greater<>());
        for (std::size_t i = 0; i < sv.size(); ++i)
            CHECK(sv[i] == doctest::Approx(std::sqrt(std::max(eig[i], 0.0))).epsilon(1e-8));
    }
}

TEST_CASE("estimated subspace converges as noise shrinks") {
    ruv::ModelParams params;
    params.protected_loading = random_matrix(5, 2, 12);
    params.permissible_loading = random_matrix(5, 2, 13);
    params.confounding = Matrix(2, 2);
    params.protected_cov = Matrix::identity(2);
    params.permissible_cov = Matrix::identity(2);

    GroupPartition p = chunks(60, 3);
    Matrix group_z = random_matrix(3, 2, 14);
    ruv::SubspaceBasis truth = ruv::true_subspace(params.protected_loading);

    double previous = 1e9;
    int step = 0;
    for (double sigma : {1e-1, 1e-3, 1e-5}) {
        params.noise_cov = ruv::scale(Matrix::identity(5), sigma * sigma);
        ruv::PartitionSpec spec{p, true, group_z};
        ruv::SyntheticData data = ruv::generate(params, 60, spec, 21);
        ruv::SubspaceBasis basis = ruv::estimate_subspace(data.y, p, 2);
        double angle = oracle::principal_angle(basis.u, truth.u);
        CHECK(angle < previous);
        previous = angle;
        if (++step == 3) CHECK(angle <= 1e-3);
    }
}

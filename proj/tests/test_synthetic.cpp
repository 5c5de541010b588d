#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#ifdef _OPENMP
#include <omp.h>
#endif

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

/// small acceptance-scale model: n=40, d, k, l configurable
ruv::ModelParams make_params(Index d, Index k, Index l, std::uint64_t seed) {
    ruv::ModelParams params;
    params.protected_loading = random_matrix(d, k, seed);
    params.permissible_loading = random_matrix(d, l, seed + 1);
    params.confounding = ruv::scale(random_matrix(l, k, seed + 2), 0.5);
    params.protected_cov = Matrix::identity(k);
    params.noise_cov = Matrix::identity(d);
    params.permissible_cov = Matrix::identity(l);
    return params;
}

}  // namespace

TEST_CASE("sample_matrix_normal") {
    SUBCASE("zero covariance returns the mean exactly") {
        Matrix mean = random_matrix(4, 3, 1);
        CHECK(ruv::sample_matrix_normal(mean, Matrix(4, 4), Matrix::identity(3), 5) == mean);
        CHECK(ruv::sample_matrix_normal(mean, Matrix::identity(4), Matrix(3, 3), 5) == mean);
    }
    SUBCASE("fixed seed is bit-identical") {
        Matrix mean(3, 2);
        Matrix a = ruv::sample_matrix_normal(mean, Matrix::identity(3), Matrix::identity(2), 9);
        Matrix b = ruv::sample_matrix_normal(mean, Matrix::identity(3), Matrix::identity(2), 9);
        CHECK(a == b);
        Matrix c = ruv::sample_matrix_normal(mean, Matrix::identity(3), Matrix::identity(2), 10);
        CHECK_FALSE(a == c);
    }
    SUBCASE("standard-normal moments at Monte Carlo tolerance") {
        Matrix mean(1000, 100);
        Matrix s = ruv::sample_matrix_normal(mean, Matrix::identity(1000),
                                             Matrix::identity(100), 123);
        double m1 = 0.0, m2 = 0.0;
        for (Index i = 0; i < s.size(); ++i) {
            m1 += s.data()[i];
            m2 += s.data()[i] * s.data()[i];
        }
        double n = static_cast<double>(s.size());
        m1 /= n;
        double var = m2 / n - m1 * m1;
        CHECK(std::abs(m1) <= 0.02);
        CHECK(var >= 0.97);
        CHECK(var <= 1.03);
    }
    SUBCASE("correlated rows and columns have the requested covariance structure") {
        Matrix row_cov{{2.0, 0.8}, {0.8, 1.0}};
        Matrix col_cov{{1.0, -0.3}, {-0.3, 0.5}};
        // column covariance of stacked draws approximates tr(row_cov) * col_cov
        Matrix acc(2, 2);
        const int reps = 20000;
        for (int r = 0; r < reps; ++r) {
            Matrix s = ruv::sample_matrix_normal(Matrix(2, 2), row_cov, col_cov,
                                                 1000 + static_cast<std::uint64_t>(r));
            acc = ruv::add(acc, ruv::matmul_at_b(s, s));
        }
        acc = ruv::scale(acc, 1.0 / reps);
        Matrix expected = ruv::scale(col_cov, 3.0);  // tr(row_cov) = 3
        CHECK(ruv::frobenius_norm(ruv::sub(acc, expected)) <=
              0.05 * ruv::frobenius_norm(expected));
    }
    SUBCASE("indefinite covariance violates the contract") {
        Matrix bad{{1.0, 2.0}, {2.0, 1.0}};  // eigenvalues 3, -1
        CHECK_THROWS_AS(
            ruv::sample_matrix_normal(Matrix(2, 2), bad, Matrix::identity(2), 1),
            ruv::ContractError);
    }
}

TEST_CASE("generate") {
    GroupPartition p = chunks(10, 2);
    SUBCASE("no loadings and no noise gives zero Y") {
        ruv::ModelParams params = make_params(3, 1, 2, 10);
        params.protected_loading = Matrix(3, 1);
        params.permissible_loading = Matrix(3, 2);
        params.noise_cov = Matrix(3, 3);
        ruv::SyntheticData data =
            ruv::generate(params, 10, ruv::PartitionSpec{p, false, Matrix()}, 3);
        CHECK(ruv::max_abs(data.y) == 0.0);
    }
    SUBCASE("homogeneous zero groups kill the permissible component") {
        ruv::ModelParams params = make_params(3, 1, 2, 11);
        params.confounding = Matrix(2, 1);
        params.permissible_cov = Matrix(2, 2);
        ruv::SyntheticData data =
            ruv::generate(params, 10, ruv::PartitionSpec{p, true, Matrix(2, 2)}, 4);
        CHECK(ruv::max_abs(data.z) == 0.0);
        Matrix expected = ruv::add(ruv::matmul_a_bt(data.x, params.protected_loading), data.e);
        CHECK(data.y == expected);
    }
    SUBCASE("fixed seed reproducibility") {
        ruv::ModelParams params = make_params(3, 2, 2, 12);
        ruv::PartitionSpec spec{p, false, Matrix()};
        ruv::SyntheticData a = ruv::generate(params, 10, spec, 7);
        ruv::SyntheticData b = ruv::generate(params, 10, spec, 7);
        CHECK(a.y == b.y);
        CHECK(a.x == b.x);
        CHECK(a.z == b.z);
    }
    SUBCASE("confounding ties Z to X") {
        ruv::ModelParams params = make_params(3, 1, 2, 13);
        params.permissible_cov = Matrix(2, 2);  // W = 0, so Z = X C^T exactly
        ruv::SyntheticData data =
            ruv::generate(params, 10, ruv::PartitionSpec{p, false, Matrix()}, 8);
        Matrix expected = ruv::matmul_a_bt(data.x, params.confounding);
        CHECK(ruv::frobenius_norm(ruv::sub(data.z, expected)) <= 1e-12);
    }
}

TEST_CASE("verify_prop1") {
    GroupPartition p = chunks(40, 2);
    SUBCASE("homogeneous permissible attributes give zero predicted bias") {
        ruv::ModelParams params = make_params(3, 1, 2, 20);
        ruv::PartitionSpec spec{p, true, random_matrix(2, 2, 21)};
        ruv::SyntheticData data = ruv::generate(params, 40, spec, 9);
        ruv::Prop1Report report = ruv::verify_prop1(params, data.x, data.z, p, 2000, 10);
        CHECK(ruv::max_abs(report.predicted_bias) <= 1e-10);
        CHECK(report.max_abs_z <= 4.0);
        CHECK(report.passed);
    }
    SUBCASE("zero permissible loading gives zero predicted bias regardless of Z") {
        ruv::ModelParams params = make_params(3, 1, 2, 22);
        params.permissible_loading = Matrix(3, 2);
        ruv::PartitionSpec spec{p, false, Matrix()};
        ruv::SyntheticData data = ruv::generate(params, 40, spec, 11);
        ruv::Prop1Report report = ruv::verify_prop1(params, data.x, data.z, p, 200, 12);
        CHECK(ruv::max_abs(report.predicted_bias) == 0.0);
    }
    SUBCASE("general case matches the closed-form bias oracle") {
        ruv::ModelParams params = make_params(2, 1, 1, 23);
        ruv::PartitionSpec spec{p, false, Matrix()};
        ruv::SyntheticData data = ruv::generate(params, 40, spec, 13);
        ruv::Prop1Report report = ruv::verify_prop1(params, data.x, data.z, p, 5000, 14);

        // independent closed-form route: scalar arithmetic over the fixed X, Z
        Matrix xs = ruv::stack_centered(data.x, p);
        Matrix zs = ruv::stack_centered(data.z, p);
        double gram = 0.0, cross = 0.0;
        for (Index i = 0; i < xs.rows(); ++i) {
            gram += xs(i, 0) * xs(i, 0);
            cross += xs(i, 0) * zs(i, 0);
        }
        for (Index j = 0; j < 2; ++j) {
            double expected = (cross / gram) * params.permissible_loading(j, 0);
            CHECK(report.predicted_bias(0, j) == doctest::Approx(expected).epsilon(1e-10));
        }
        CHECK(report.max_abs_z <= 4.0);
        CHECK(report.col_cov_rel_err <= 0.15);
        CHECK(report.passed);
    }
    SUBCASE("determinism and replicate-order invariance") {
        ruv::ModelParams params = make_params(3, 1, 2, 24);
        ruv::PartitionSpec spec{p, false, Matrix()};
        ruv::SyntheticData data = ruv::generate(params, 40, spec, 15);
        ruv::Prop1Report a = ruv::verify_prop1(params, data.x, data.z, p, 500, 16);
#ifdef _OPENMP
        int saved = omp_get_max_threads();
        omp_set_num_threads(1);
#endif
        ruv::Prop1Report b = ruv::verify_prop1(params, data.x, data.z, p, 500, 16);
#ifdef _OPENMP
        omp_set_num_threads(saved);
#endif
        CHECK(a.empirical_bias == b.empirical_bias);
        CHECK(a.bias_z_scores == b.bias_z_scores);
        CHECK(a.row_cov_rel_err == b.row_cov_rel_err);
        CHECK(a.col_cov_rel_err == b.col_cov_rel_err);
    }
    SUBCASE("degenerate pooled Gram is a diagnostic error") {
        ruv::ModelParams params = make_params(3, 1, 2, 25);
        Matrix x_const(40, 1);
        for (Index i = 0; i < 40; ++i) x_const(i, 0) = 1.0;
        Matrix z = random_matrix(40, 2, 26);
        CHECK_THROWS_AS(ruv::verify_prop1(params, x_const, z, p, 200, 17), ruv::DataError);
    }
    SUBCASE("too few replicates") {
        ruv::ModelParams params = make_params(3, 1, 2, 27);
        ruv::PartitionSpec spec{p, false, Matrix()};
        ruv::SyntheticData data = ruv::generate(params, 40, spec, 18);
        CHECK_THROWS_AS(ruv::verify_prop1(params, data.x, data.z, p, 50, 19),
                        ruv::ContractError);
    }
}

TEST_CASE("prop1 covariance factorizes as a Kronecker product at zero bias") {
    // desk scale k*d <= 8; empirical covariance of the flattened error vs
    // kron(noise_cov, gram_pinv)
    const Index d = 3, k = 2, n = 40;
    ruv::ModelParams params = make_params(d, k, 2, 30);
    params.noise_cov = Matrix{{1.0, 0.3, 0.0}, {0.3, 0.8, 0.1}, {0.0, 0.1, 0.6}};
    GroupPartition p = chunks(n, 2);
    ruv::PartitionSpec spec{p, true, random_matrix(2, 2, 31)};  // homogeneous: zero bias
    ruv::SyntheticData data = ruv::generate(params, n, spec, 32);

    Matrix xs = ruv::stack_centered(data.x, p);
    Matrix gram_pinv = ruv::pinv_psd(ruv::matmul_at_b(xs, xs));
    Matrix base = ruv::add(ruv::matmul_a_bt(data.x, params.protected_loading),
                           ruv::matmul_a_bt(data.z, params.permissible_loading));

    const int reps = 5000;
    Matrix samples(reps, k * d);  // column-major flattening of the k x d error
    for (int r = 0; r < reps; ++r) {
        Matrix e = ruv::sample_matrix_normal(Matrix(n, d), Matrix::identity(n),
                                             params.noise_cov,
                                             5000 + static_cast<std::uint64_t>(r));
        Matrix y = ruv::add(base, e);
        ruv::ObservedFit fit = ruv::estimate_loading(y, data.x, p);
        Matrix err = ruv::sub(ruv::transpose(fit.loading),
                              ruv::transpose(params.protected_loading));  // k x d
        for (Index col = 0; col < d; ++col)
            for (Index row = 0; row < k; ++row)
                samples(r, col * k + row) = err(row, col);
    }
    std::vector<double> mean(static_cast<std::size_t>(k * d), 0.0);
    for (int r = 0; r < reps; ++r)
        for (Index i = 0; i < k * d; ++i) mean[static_cast<std::size_t>(i)] += samples(r, i);
    for (double& m : mean) m /= reps;
    Matrix cov(k * d, k * d);
    for (Index a = 0; a < k * d; ++a)
        for (Index b = 0; b < k * d; ++b) {
            double acc = 0.0;
            for (int r = 0; r < reps; ++r)
                acc += (samples(r, a) - mean[static_cast<std::size_t>(a)]) *
                       (samples(r, b) - mean[static_cast<std::size_t>(b)]);
            cov(a, b) = acc / (reps - 1);
        }
    Matrix expected = oracle::kron(params.noise_cov, gram_pinv);
    CHECK(ruv::frobenius_norm(ruv::sub(cov, expected)) <=
          0.15 * ruv::frobenius_norm(expected));
}

TEST_CASE("verify_prop2") {
    const Index n = 40;
    GroupPartition p = chunks(n, 2);
    SUBCASE("oracle loading scenario is statistically zero") {
        ruv::ModelParams params = make_params(2, 1, 1, 40);
        ruv::PartitionSpec spec{p, false, Matrix()};
        ruv::SyntheticData data = ruv::generate(params, n, spec, 41);
        ruv::Prop2Report report = ruv::verify_prop2(
            params, data.z, p, 0, 2000, 42, ruv::Prop2Scenario::oracle_loading);
        CHECK(report.max_abs_z <= 4.0);
        CHECK(report.passed);
    }
    SUBCASE("homogeneous scenario is statistically zero with zero RHS") {
        ruv::ModelParams params = make_params(2, 1, 1, 43);
        ruv::PartitionSpec spec{p, false, Matrix()};
        ruv::SyntheticData data = ruv::generate(params, n, spec, 44);
        ruv::Prop2Report report = ruv::verify_prop2(
            params, data.z, p, 3, 2000, 45, ruv::Prop2Scenario::homogeneous_permissible);
        CHECK(report.max_abs_z <= 4.0);
        CHECK(ruv::max_abs(report.rhs_cov) <= 1e-10);
        CHECK(report.passed);
    }
    SUBCASE("general scenario: both sides agree and match the bias route") {
        ruv::ModelParams params = make_params(2, 1, 1, 46);
        ruv::PartitionSpec spec{p, false, Matrix()};
        ruv::SyntheticData data = ruv::generate(params, n, spec, 47);
        ruv::Prop2Report report =
            ruv::verify_prop2(params, data.z, p, 0, 10000, 48, ruv::Prop2Scenario::general);
        CHECK(report.max_abs_z <= 4.0);
        CHECK(report.passed);
        // the estimator-error route estimates the same covariance
        for (Index i = 0; i < 2; ++i)
            CHECK(std::abs(report.bias_route_cov(i, 0) - report.rhs_cov(i, 0)) <=
                  8.0 * report.lhs_se(i, 0) + 1e-12);
        // nontrivial effect: the RHS is significantly nonzero somewhere
        CHECK(ruv::max_abs(report.rhs_cov) > 0.0);
    }
    SUBCASE("reps below the resolvable floor") {
        ruv::ModelParams params = make_params(2, 1, 1, 49);
        Matrix z = random_matrix(n, 1, 50);
        CHECK_THROWS_AS(
            ruv::verify_prop2(params, z, p, 0, 500, 51, ruv::Prop2Scenario::general),
            ruv::ContractError);
    }
    SUBCASE("scenario names round-trip") {
        CHECK(ruv::prop2_scenario_from_string("oracle_A") ==
              ruv::Prop2Scenario::oracle_loading);
        CHECK(ruv::prop2_scenario_from_string("homogeneous_Z") ==
              ruv::Prop2Scenario::homogeneous_permissible);
        CHECK(ruv::to_string(ruv::Prop2Scenario::general) == "general");
        CHECK_THROWS_AS(ruv::prop2_scenario_from_string("nope"), ruv::ContractError);
    }
}

TEST_CASE("verify_latent_parity") {
    SUBCASE("no permissible loading and no noise gives exactly zero") {
        ruv::ModelParams params = make_params(3, 1, 2, 60);
        params.permissible_loading = Matrix(3, 2);
        params.noise_cov = Matrix(3, 3);
        Matrix z = random_matrix(10, 2, 61);
        ruv::LatentParityReport report = ruv::verify_latent_parity(params, z, 0, 500, 62);
        // projection of rows lying inside the span leaves rounding crumbs
        // only; the covariance is zero at arithmetic resolution
        CHECK(ruv::max_abs(report.cov) <= 1e-12);
        CHECK(report.max_abs_z == 0.0);
        CHECK(report.passed);
    }
    SUBCASE("zero protected loading with no confounding") {
        ruv::ModelParams params = make_params(3, 1, 2, 63);
        params.protected_loading = Matrix(3, 1);
        params.confounding = Matrix(2, 1);
        Matrix z = random_matrix(10, 2, 64);
        ruv::LatentParityReport report = ruv::verify_latent_parity(params, z, 2, 2000, 65);
        CHECK(report.subspace_rank == 0);
        CHECK(report.max_abs_z <= 4.0);
    }
    SUBCASE("general loading passes at Monte Carlo tolerance") {
        ruv::ModelParams params = make_params(4, 2, 2, 66);
        Matrix z = random_matrix(10, 2, 67);
        ruv::LatentParityReport report = ruv::verify_latent_parity(params, z, 1, 2000, 68);
        CHECK(report.subspace_rank == 2);
        CHECK(report.max_abs_z <= 4.0);
        CHECK(report.passed);
    }
}

TEST_CASE("true_subspace spans the loading columns") {
    Matrix a = random_matrix(5, 2, 70);
    ruv::SubspaceBasis basis = ruv::true_subspace(a);
    CHECK(basis.rank() == 2);
    CHECK(ruv::orthonormality_defect(basis) <= 1e-10);
    // projecting the loading onto the basis changes nothing
    Matrix coords = ruv::matmul_at_b(basis.u, a);
    Matrix rec = ruv::matmul(basis.u, coords);
    CHECK(ruv::frobenius_norm(ruv::sub(rec, a)) <= 1e-10 * ruv::frobenius_norm(a));
}

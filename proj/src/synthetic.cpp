#include "ruv/synthetic.hpp"

#include <cmath>
#include <limits>

#include "ruv/decomp.hpp"
#include "ruv/observed.hpp"
#include "ruv/rng.hpp"

namespace ruv {

namespace {

Matrix standard_normal(Index rows, Index cols, Rng& rng) {
    Matrix n(rows, cols);
    for (Index i = 0; i < n.size(); ++i) n.data()[i] = rng.normal();
    return n;
}

/// rows i.i.d. N(0, col_cov): N * L_c^T without materializing an identity
/// row covariance.
Matrix sample_iid_rows(Index n, const Matrix& col_cov, Rng& rng) {
    Matrix noise = standard_normal(n, col_cov.rows(), rng);
    if (col_cov.rows() == 0) return noise;
    return matmul_a_bt(noise, psd_sqrt(col_cov));
}

struct CrossCov {
    Matrix cov;  // a x b
    Matrix se;   // a x b, sd(products)/sqrt(R)
    Matrix z;    // a x b, cov / se
};

/// Empirical cross-covariance of per-replicate vectors stored as rows of
/// u (R x a) and v (R x b), with per-entry Monte Carlo z-scores against a
/// zero-mean reference.
CrossCov cross_covariance(const Matrix& u, const Matrix& v) {
    const Index reps = u.rows(), a = u.cols(), b = v.cols();
    std::vector<double> mean_u(static_cast<std::size_t>(a), 0.0);
    std::vector<double> mean_v(static_cast<std::size_t>(b), 0.0);
    for (Index r = 0; r < reps; ++r) {
        for (Index i = 0; i < a; ++i) mean_u[static_cast<std::size_t>(i)] += u(r, i);
        for (Index j = 0; j < b; ++j) mean_v[static_cast<std::size_t>(j)] += v(r, j);
    }
    for (double& m : mean_u) m /= static_cast<double>(reps);
    for (double& m : mean_v) m /= static_cast<double>(reps);

    CrossCov out{Matrix(a, b), Matrix(a, b), Matrix(a, b)};
#pragma omp parallel for collapse(2) if (a * b > 4)
    for (Index i = 0; i < a; ++i) {
        for (Index j = 0; j < b; ++j) {
            double sum = 0.0, sum_sq = 0.0;
            for (Index r = 0; r < reps; ++r) {
                double p = (u(r, i) - mean_u[static_cast<std::size_t>(i)]) *
                           (v(r, j) - mean_v[static_cast<std::size_t>(j)]);
                sum += p;
                sum_sq += p * p;
            }
            double cov = sum / static_cast<double>(reps - 1);
            double mean_p = sum / static_cast<double>(reps);
            double var_p = std::max(0.0, sum_sq / static_cast<double>(reps) - mean_p * mean_p) *
                           static_cast<double>(reps) / static_cast<double>(reps - 1);
            double se = std::sqrt(var_p / static_cast<double>(reps));
            double z;
            if (se > 0.0)
                z = cov / se;
            else
                z = cov == 0.0 ? 0.0 : 1e300;
            out.cov(i, j) = cov;
            out.se(i, j) = se;
            out.z(i, j) = z;
        }
    }
    return out;
}

/// Covariances below the rounding resolution of the quantities that formed
/// them are exact cancellations, not signal; their z-scores are clamped to
/// zero so degenerate (noise-free) configurations do not fail spuriously.
void clamp_below_floor(CrossCov& cc, double floor) {
    for (Index i = 0; i < cc.cov.size(); ++i)
        if (std::abs(cc.cov.data()[i]) <= floor) cc.z.data()[i] = 0.0;
}

double rel_frob_err(const Matrix& observed, const Matrix& expected) {
    double denom = frobenius_norm(expected);
    double num = frobenius_norm(sub(observed, expected));
    if (denom == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return num / denom;
}

Matrix replace_rows_by_group_mean(const Matrix& z, const GroupPartition& partition) {
    Matrix out = z;
    for (const auto& idx : partition.groups) {
        for (Index j = 0; j < z.cols(); ++j) {
            double mean = 0.0;
            for (Index r : idx) mean += z(r, j);
            mean /= static_cast<double>(idx.size());
            for (Index r : idx) out(r, j) = mean;
        }
    }
    return out;
}

Matrix loading_times_vector(const Matrix& loading, const double* vec) {
    Matrix out(loading.rows(), 1);
    for (Index i = 0; i < loading.rows(); ++i) {
        double acc = 0.0;
        for (Index j = 0; j < loading.cols(); ++j) acc += loading(i, j) * vec[j];
        out(i, 0) = acc;
    }
    return out;
}

}  // namespace

Matrix sample_matrix_normal(const Matrix& mean, const Matrix& row_cov,
                            const Matrix& col_cov, std::uint64_t seed) {
    if (row_cov.rows() != mean.rows() || row_cov.cols() != mean.rows())
        throw DimensionError("sample_matrix_normal: row covariance shape mismatch");
    if (col_cov.rows() != mean.cols() || col_cov.cols() != mean.cols())
        throw DimensionError("sample_matrix_normal: column covariance shape mismatch");
    Matrix l_row = psd_sqrt(row_cov);
    Matrix l_col = psd_sqrt(col_cov);
    Rng rng(seed);
    Matrix noise = standard_normal(mean.rows(), mean.cols(), rng);
    return add(mean, matmul(l_row, matmul_a_bt(noise, l_col)));
}

SyntheticData generate(const ModelParams& params, Index n,
                       const PartitionSpec& spec, std::uint64_t seed) {
    validate_params(params);
    if (n < 1) throw DimensionError("generate: n must be >= 1");
    GroupPartition canonical = spec.partition;
    if (!canonical.groups.empty()) validate_partition(canonical, n);
    if (spec.homogeneous) {
        if (spec.group_values.rows() != static_cast<Index>(canonical.groups.size()) ||
            spec.group_values.cols() != params.l())
            throw DimensionError("generate: homogeneous mode needs one shared "
                                 "permissible vector per group");
    }

    SyntheticData data;
    Rng rng_x(seed, 0), rng_w(seed, 1), rng_e(seed, 2);
    data.x = sample_iid_rows(n, params.protected_cov, rng_x);
    data.w = sample_iid_rows(n, params.permissible_cov, rng_w);
    data.z = add(matmul_a_bt(data.x, params.confounding), data.w);
    if (spec.homogeneous) {
        for (std::size_t g = 0; g < canonical.groups.size(); ++g)
            for (Index r : canonical.groups[g])
                for (Index j = 0; j < params.l(); ++j)
                    data.z(r, j) = spec.group_values(static_cast<Index>(g), j);
    }
    data.e = sample_iid_rows(n, params.noise_cov, rng_e);
    data.y = add(add(matmul_a_bt(data.x, params.protected_loading),
                     matmul_a_bt(data.z, params.permissible_loading)),
                 data.e);
    return data;
}

Prop1Report verify_prop1(const ModelParams& params, const Matrix& x_fixed,
                         const Matrix& z_fixed, const GroupPartition& partition,
                         int reps, std::uint64_t seed, double z_threshold,
                         double cov_rel_tol) {
    validate_params(params);
    if (reps < 100)
        throw ContractError("verify_prop1: reps must be >= 100");
    if (x_fixed.rows() != z_fixed.rows())
        throw DimensionError("verify_prop1: X and Z row counts differ");
    const Index k = params.k(), d = params.d();
    if (x_fixed.cols() != k || z_fixed.cols() != params.l())
        throw DimensionError("verify_prop1: fixed X/Z shapes do not match params");

    GroupPartition canonical = partition;
    validate_partition(canonical, x_fixed.rows());

    Matrix x_stacked = stack_centered(x_fixed, canonical);
    Matrix gram = matmul_at_b(x_stacked, x_stacked);
    if (max_abs(gram) == 0.0)
        throw DataError("verify_prop1: pooled Gram matrix is identically zero");
    Matrix gram_pinv = pinv_psd(gram);

    Matrix z_stacked = stack_centered(z_fixed, canonical);
    Matrix cross = matmul_at_b(x_stacked, z_stacked);  // k x l
    Matrix predicted = matmul(gram_pinv,
                              matmul_a_bt(cross, params.permissible_loading));  // k x d

    Matrix base = add(matmul_a_bt(x_fixed, params.protected_loading),
                      matmul_a_bt(z_fixed, params.permissible_loading));
    Matrix noise_sqrt = psd_sqrt(params.noise_cov);
    Matrix loading_t_true = transpose(params.protected_loading);

    // one flattened k x d error sample per replicate
    Matrix samples(reps, k * d);
    std::string failure;
#pragma omp parallel for schedule(dynamic)
    for (int r = 0; r < reps; ++r) {
        try {
            Rng rng(seed, static_cast<std::uint64_t>(r));
            Matrix noise = standard_normal(base.rows(), d, rng);
            Matrix y = add(base, matmul_a_bt(noise, noise_sqrt));
            ObservedFit fit = estimate_loading(y, x_fixed, canonical);
            Matrix err = sub(transpose(fit.loading), loading_t_true);  // k x d
            for (Index i = 0; i < k * d; ++i) samples(r, i) = err.data()[i];
        } catch (const std::exception& e) {
#pragma omp critical
            if (failure.empty()) failure = e.what();
        }
    }
    if (!failure.empty()) throw ContractError("verify_prop1: replicate failed: " + failure);

    Prop1Report report;
    report.reps = reps;
    report.predicted_bias = predicted;
    report.empirical_bias = Matrix(k, d);
    report.bias_z_scores = Matrix(k, d);

    std::vector<double> mean(static_cast<std::size_t>(k * d), 0.0);
    for (int r = 0; r < reps; ++r)
        for (Index i = 0; i < k * d; ++i) mean[static_cast<std::size_t>(i)] += samples(r, i);
    for (double& m : mean) m /= reps;

    const double bias_floor =
        1e-10 * (max_abs(predicted) + max_abs(loading_t_true) + max_abs(gram_pinv));
    for (Index i = 0; i < k * d; ++i) {
        double var = 0.0;
        for (int r = 0; r < reps; ++r) {
            double dev = samples(r, i) - mean[static_cast<std::size_t>(i)];
            var += dev * dev;
        }
        var /= (reps - 1);
        double se = std::sqrt(var / reps);
        double diff = mean[static_cast<std::size_t>(i)] - predicted.data()[i];
        report.empirical_bias.data()[i] = mean[static_cast<std::size_t>(i)];
        double z = se > 0.0 ? diff / se : (diff == 0.0 ? 0.0 : 1e300);
        if (std::abs(diff) <= bias_floor) z = 0.0;  // exact-cancellation resolution
        report.bias_z_scores.data()[i] = z;
        report.max_abs_z = std::max(report.max_abs_z, std::abs(z));
    }

    // Covariance structure: with the bias removed the error factorizes, so
    // the replicate average of D D^T estimates gram_pinv * tr(noise_cov) and
    // of D^T D estimates noise_cov * tr(gram_pinv).
    Matrix row_cov(k, k), col_cov(d, d);
    for (int r = 0; r < reps; ++r) {
        Matrix dev(k, d);
        for (Index i = 0; i < k * d; ++i)
            dev.data()[i] = samples(r, i) - mean[static_cast<std::size_t>(i)];
        row_cov = add(row_cov, matmul_a_bt(dev, dev));
        col_cov = add(col_cov, matmul_at_b(dev, dev));
    }
    row_cov = scale(row_cov, 1.0 / reps);
    col_cov = scale(col_cov, 1.0 / reps);

    double trace_noise = 0.0;
    for (Index i = 0; i < d; ++i) trace_noise += params.noise_cov(i, i);
    double trace_t = 0.0;
    for (Index i = 0; i < k; ++i) trace_t += gram_pinv(i, i);

    report.row_cov_rel_err = rel_frob_err(row_cov, scale(gram_pinv, trace_noise));
    report.col_cov_rel_err = rel_frob_err(col_cov, scale(params.noise_cov, trace_t));
    report.passed = report.max_abs_z <= z_threshold &&
                    report.col_cov_rel_err <= cov_rel_tol;
    return report;
}

Prop2Scenario prop2_scenario_from_string(const std::string& name) {
    if (name == "general") return Prop2Scenario::general;
    if (name == "oracle_A" || name == "oracle_loading") return Prop2Scenario::oracle_loading;
    if (name == "homogeneous_Z" || name == "homogeneous")
        return Prop2Scenario::homogeneous_permissible;
    throw ContractError("unknown scenario: " + name);
}

std::string to_string(Prop2Scenario scenario) {
    switch (scenario) {
        case Prop2Scenario::general: return "general";
        case Prop2Scenario::oracle_loading: return "oracle_A";
        case Prop2Scenario::homogeneous_permissible: return "homogeneous_Z";
    }
    return "general";
}

Prop2Report verify_prop2(const ModelParams& params, const Matrix& z_fixed,
                         const GroupPartition& partition, Index target_row,
                         int reps, std::uint64_t seed, Prop2Scenario scenario,
                         double z_threshold) {
    validate_params(params);
    if (reps < 1000)
        throw ContractError("verify_prop2: reps must be >= 1000; the 4-SE "
                            "tolerance is not resolvable below that");
    const Index n = z_fixed.rows(), d = params.d(), k = params.k(), l = params.l();
    if (z_fixed.cols() != l)
        throw DimensionError("verify_prop2: Z width does not match params");
    if (target_row < 0 || target_row >= n)
        throw DimensionError("verify_prop2: target row out of range");

    GroupPartition canonical = partition;
    validate_partition(canonical, n);

    Matrix z = scenario == Prop2Scenario::homogeneous_permissible
                   ? replace_rows_by_group_mean(z_fixed, canonical)
                   : z_fixed;
    Matrix z_stacked = stack_centered(z, canonical);  // constant across reps

    Matrix protected_sqrt = psd_sqrt(params.protected_cov);
    Matrix noise_sqrt = psd_sqrt(params.noise_cov);
    Matrix z_effect = matmul_a_bt(z, params.permissible_loading);  // n x d

    Matrix lhs_samples(reps, d);   // y_i - loading x_i
    Matrix v_samples(reps, k);     // x_i
    Matrix w_samples(reps, l);     // Z~^T X~ T x_i
    Matrix bias_samples(reps, d);  // (loading_hat - loading) x_i
    std::vector<double> row_scale(static_cast<std::size_t>(reps), 0.0);

    std::string failure;
#pragma omp parallel for schedule(dynamic)
    for (int r = 0; r < reps; ++r) {
        try {
            std::uint64_t rep_seed = mix_seed(seed, static_cast<std::uint64_t>(r));
            Rng rng_x(rep_seed, 0), rng_e(rep_seed, 1);
            Matrix x = matmul_a_bt(standard_normal(n, k, rng_x), protected_sqrt);
            Matrix e = matmul_a_bt(standard_normal(n, d, rng_e), noise_sqrt);
            Matrix y = add(add(matmul_a_bt(x, params.protected_loading), z_effect), e);

            ObservedFit fit = estimate_loading(y, x, canonical);
            const double* xi = x.row(target_row);

            Matrix applied = scenario == Prop2Scenario::oracle_loading
                                 ? loading_times_vector(params.protected_loading, xi)
                                 : loading_times_vector(fit.loading, xi);
            double scale = 0.0;
            for (Index j = 0; j < d; ++j) {
                lhs_samples(r, j) = y(target_row, j) - applied(j, 0);
                scale = std::max(scale, std::abs(y(target_row, j)));
                scale = std::max(scale, std::abs(applied(j, 0)));
            }
            row_scale[static_cast<std::size_t>(r)] = scale;
            for (Index j = 0; j < k; ++j) v_samples(r, j) = xi[j];

            Matrix x_stacked = stack_centered(x, canonical);
            Matrix cross = matmul_at_b(z_stacked, x_stacked);  // l x k
            Matrix t_xi = loading_times_vector(fit.gram_pinv, xi);  // k x 1
            Matrix w = matmul(cross, t_xi);                         // l x 1
            for (Index j = 0; j < l; ++j) w_samples(r, j) = w(j, 0);

            Matrix err = sub(fit.loading, params.protected_loading);  // d x k
            Matrix bias = loading_times_vector(err, xi);
            for (Index j = 0; j < d; ++j) bias_samples(r, j) = bias(j, 0);
        } catch (const std::exception& e) {
#pragma omp critical
            if (failure.empty()) failure = e.what();
        }
    }
    if (!failure.empty()) throw ContractError("verify_prop2: replicate failed: " + failure);

    CrossCov lhs = cross_covariance(lhs_samples, v_samples);
    CrossCov wv = cross_covariance(w_samples, v_samples);
    CrossCov bias = cross_covariance(bias_samples, v_samples);

    double scale_y = 0.0;
    for (double s : row_scale) scale_y = std::max(scale_y, s);
    double scale_v = max_abs(v_samples);
    double scale_w = max_abs(w_samples) * max_abs(params.permissible_loading);
    clamp_below_floor(lhs, 1e-10 * scale_y * scale_v);

    // LHS - RHS = Cov(u + Lz w, v), so the difference z-scores come from the
    // combined samples rather than differencing two noisy estimates.
    Matrix combined(reps, d);
    for (int r = 0; r < reps; ++r)
        for (Index i = 0; i < d; ++i) {
            double acc = lhs_samples(r, i);
            for (Index j = 0; j < l; ++j)
                acc += params.permissible_loading(i, j) * w_samples(r, j);
            combined(r, i) = acc;
        }
    CrossCov diff = cross_covariance(combined, v_samples);
    clamp_below_floor(diff, 1e-10 * (scale_y + scale_w) * scale_v);

    Prop2Report report;
    report.reps = reps;
    report.scenario = scenario;
    report.lhs_cov = lhs.cov;
    report.rhs_cov = scale(matmul(params.permissible_loading, wv.cov), -1.0);
    report.lhs_se = lhs.se;
    report.lhs_z_scores = lhs.z;
    report.diff_z_scores = diff.z;
    report.bias_route_cov = scale(bias.cov, -1.0);
    const Matrix& gate = scenario == Prop2Scenario::general ? diff.z : lhs.z;
    report.max_abs_z = max_abs(gate);
    report.passed = report.max_abs_z <= z_threshold;
    return report;
}

SubspaceBasis true_subspace(const Matrix& protected_loading) {
    const Index d = protected_loading.rows();
    RightSvd svd = svd_right(transpose(protected_loading));
    double sigma_max = svd.singular_values.empty() ? 0.0 : svd.singular_values.front();
    double cut = static_cast<double>(std::max(d, protected_loading.cols())) *
                 std::numeric_limits<double>::epsilon() * sigma_max;
    Index rank = 0;
    for (double s : svd.singular_values)
        if (s > cut) ++rank;
    SubspaceBasis basis;
    basis.u = Matrix(d, rank);
    for (Index j = 0; j < rank; ++j)
        for (Index i = 0; i < d; ++i) basis.u(i, j) = svd.v(i, j);
    return basis;
}

LatentParityReport verify_latent_parity(const ModelParams& params,
                                        const Matrix& z_fixed, Index target_row,
                                        int reps, std::uint64_t seed,
                                        double z_threshold) {
    validate_params(params);
    if (reps < 100)
        throw ContractError("verify_latent_parity: reps must be >= 100");
    const Index d = params.d(), k = params.k();
    if (z_fixed.cols() != params.l())
        throw DimensionError("verify_latent_parity: Z width does not match params");
    if (target_row < 0 || target_row >= z_fixed.rows())
        throw DimensionError("verify_latent_parity: target row out of range");

    SubspaceBasis basis = true_subspace(params.protected_loading);
    Matrix protected_sqrt = psd_sqrt(params.protected_cov);
    Matrix noise_sqrt = psd_sqrt(params.noise_cov);

    // only the target row is simulated: rows are i.i.d. and nothing is fitted
    Matrix z_row(1, params.l());
    for (Index j = 0; j < params.l(); ++j) z_row(0, j) = z_fixed(target_row, j);
    Matrix permissible_effect = matmul_a_bt(z_row, params.permissible_loading);  // 1 x d

    Matrix proj_samples(reps, d);
    Matrix v_samples(reps, k);
    std::vector<double> row_scale(static_cast<std::size_t>(reps), 0.0);
    std::string failure;
#pragma omp parallel for schedule(dynamic)
    for (int r = 0; r < reps; ++r) {
        try {
            std::uint64_t rep_seed = mix_seed(seed, static_cast<std::uint64_t>(r));
            Rng rng_x(rep_seed, 0), rng_e(rep_seed, 1);
            Matrix x = matmul_a_bt(standard_normal(1, k, rng_x), protected_sqrt);
            Matrix e = matmul_a_bt(standard_normal(1, d, rng_e), noise_sqrt);
            Matrix y =
                add(add(matmul_a_bt(x, params.protected_loading), permissible_effect), e);
            Matrix y_db = project_out(y, basis);
            for (Index j = 0; j < d; ++j) proj_samples(r, j) = y_db(0, j);
            for (Index j = 0; j < k; ++j) v_samples(r, j) = x(0, j);
            row_scale[static_cast<std::size_t>(r)] = max_abs(y);
        } catch (const std::exception& e) {
#pragma omp critical
            if (failure.empty()) failure = e.what();
        }
    }
    if (!failure.empty())
        throw ContractError("verify_latent_parity: replicate failed: " + failure);

    CrossCov cc = cross_covariance(proj_samples, v_samples);
    double scale_y = 0.0;
    for (double s : row_scale) scale_y = std::max(scale_y, s);
    clamp_below_floor(cc, 1e-10 * scale_y * max_abs(v_samples));
    LatentParityReport report;
    report.reps = reps;
    report.subspace_rank = basis.rank();
    report.cov = cc.cov;
    report.z_scores = cc.z;
    report.max_abs_z = max_abs(cc.z);
    report.passed = report.max_abs_z <= z_threshold;
    return report;
}

}  // namespace ruv

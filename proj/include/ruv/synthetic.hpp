#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ruv/core.hpp"

namespace ruv {

/// Draw from the matrix-variate normal MN(mean, row_cov, col_cov):
/// mean + L_r N L_c^T with N i.i.d. standard normal from a seeded generator
/// and L_r, L_c PSD square roots. A fixed seed gives bit-identical output.
Matrix sample_matrix_normal(const Matrix& mean, const Matrix& row_cov,
                            const Matrix& col_cov, std::uint64_t seed);

/// Group structure for the generator. In homogeneous mode every group's
/// permissible rows are replaced by a shared vector (one row of
/// group_values per group); rows outside the partition keep their sampled
/// values.
struct PartitionSpec {
    GroupPartition partition;
    bool homogeneous = false;
    Matrix group_values;  // G x l, used only in homogeneous mode
};

struct SyntheticData {
    Matrix y, x, z, e, w;
};

/// Samples the full factor model: X and W row-i.i.d. with the configured
/// column covariances, Z = X C^T + W (or group-constant in homogeneous
/// mode), E row-i.i.d. with the noise covariance, Y assembled from the
/// loadings. All five matrices are returned for oracle checks.
SyntheticData generate(const ModelParams& params, Index n,
                       const PartitionSpec& spec, std::uint64_t seed);

/// Conditional-bias check for the pooled estimator with X and Z held fixed:
/// over `reps` independent noise draws the estimator error has mean
/// T (X~^T Z~) Lz^T, row covariance proportional to T and column covariance
/// proportional to the noise covariance.
struct Prop1Report {
    Matrix predicted_bias;  // k x d closed form from the fixed X, Z
    Matrix empirical_bias;  // k x d Monte Carlo mean of loading error
    Matrix bias_z_scores;   // entrywise (empirical - predicted) / MC SE
    double max_abs_z = 0.0;
    double row_cov_rel_err = 0.0;  // vs gram_pinv, trace-normalized
    double col_cov_rel_err = 0.0;  // vs noise covariance, trace-normalized
    int reps = 0;
    bool passed = false;
};

Prop1Report verify_prop1(const ModelParams& params, const Matrix& x_fixed,
                         const Matrix& z_fixed, const GroupPartition& partition,
                         int reps, std::uint64_t seed, double z_threshold = 4.0,
                         double cov_rel_tol = 0.15);

/// Scenarios for the debiased-row covariance check. The estimator scenarios
/// replace the fitted loading with the true one / force the stacked
/// centered permissible matrix to zero; in both the left side must be
/// statistically indistinguishable from zero.
enum class Prop2Scenario { general, oracle_loading, homogeneous_permissible };

Prop2Scenario prop2_scenario_from_string(const std::string& name);
std::string to_string(Prop2Scenario scenario);

struct Prop2Report {
    Matrix lhs_cov;         // d x k Cov[y_i - loading x_i, x_i]
    Matrix rhs_cov;         // d x k -Lz Cov[Z~^T X~ T x_i, x_i]
    Matrix lhs_se;          // per-entry Monte Carlo standard errors of the LHS
    Matrix lhs_z_scores;    // z-scores of the left side against zero
    Matrix diff_z_scores;   // z-scores of LHS - RHS
    Matrix bias_route_cov;  // d x k -Cov[(loading_hat - loading) x_i, x_i]
    double max_abs_z = 0.0;  // gating value for the scenario
    Prop2Scenario scenario = Prop2Scenario::general;
    int reps = 0;
    bool passed = false;
};

Prop2Report verify_prop2(const ModelParams& params, const Matrix& z_fixed,
                         const GroupPartition& partition, Index target_row,
                         int reps, std::uint64_t seed, Prop2Scenario scenario,
                         double z_threshold = 4.0);

/// With the true protected subspace, the projected representation of any
/// row must be uncorrelated with that row's protected attributes.
struct LatentParityReport {
    Matrix cov;  // d x k
    Matrix z_scores;
    double max_abs_z = 0.0;
    Index subspace_rank = 0;
    int reps = 0;
    bool passed = false;
};

LatentParityReport verify_latent_parity(const ModelParams& params,
                                        const Matrix& z_fixed, Index target_row,
                                        int reps, std::uint64_t seed,
                                        double z_threshold = 4.0);

/// Orthonormal basis of the column space of the true protected loading.
SubspaceBasis true_subspace(const Matrix& protected_loading);

}  // namespace ruv

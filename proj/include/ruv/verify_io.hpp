#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "ruv/synthetic.hpp"

namespace ruv {

/// Everything a verification run needs, loaded from one JSON file:
/// dimensions, model matrices (keys A, B, Gamma, Sigma_x, Sigma_eps,
/// Sigma_w), the partition as a list of index lists, replicate count, seed,
/// scenario, target row and thresholds. The fixed X and Z the checks
/// condition on are generated deterministically from the same seed.
struct VerifyConfig {
    Index n = 40;
    ModelParams params;
    GroupPartition partition;
    bool homogeneous = false;
    Matrix group_values;
    int reps = 2000;
    std::uint64_t seed = 1;
    Prop2Scenario scenario = Prop2Scenario::general;
    Index target_row = 0;
    double z_threshold = 4.0;
    double cov_rel_tol = 0.15;
};

VerifyConfig load_verify_config(const std::string& path);

Matrix matrix_from_json(const nlohmann::json& value, const std::string& what);
nlohmann::json matrix_to_json(const Matrix& m);

nlohmann::json report_to_json(const Prop1Report& report);
nlohmann::json report_to_json(const Prop2Report& report);
nlohmann::json report_to_json(const LatentParityReport& report);

struct VerifyOutcome {
    bool passed = false;
    nlohmann::json report;
};

/// Runs one named check ("prop1", "prop2" or "latent") end to end.
VerifyOutcome run_verify_check(const VerifyConfig& config, const std::string& check);

}  // namespace ruv

#include "ruv/verify_io.hpp"

#include <fstream>

#include "ruv/rng.hpp"

namespace ruv {

using nlohmann::json;

Matrix matrix_from_json(const json& value, const std::string& what) {
    if (!value.is_array()) throw SchemaError(what + ": expected an array of rows");
    Index rows = static_cast<Index>(value.size());
    Index cols = 0;
    if (rows > 0) {
        if (!value[0].is_array()) throw SchemaError(what + ": rows must be arrays");
        cols = static_cast<Index>(value[0].size());
    }
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i) {
        const json& row = value[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Index>(row.size()) != cols)
            throw SchemaError(what + ": ragged matrix rows");
        for (Index j = 0; j < cols; ++j) {
            const json& cell = row[static_cast<std::size_t>(j)];
            if (!cell.is_number()) throw SchemaError(what + ": matrix entries must be numbers");
            m(i, j) = cell.get<double>();
        }
    }
    return m;
}

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

VerifyConfig load_verify_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open config: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw SchemaError(path + ": " + e.what());
    }

    VerifyConfig cfg;
    try {
        cfg.n = doc.at("n").get<Index>();
        cfg.params.protected_loading = matrix_from_json(doc.at("A"), "A");
        cfg.params.permissible_loading = matrix_from_json(doc.at("B"), "B");
        cfg.params.confounding = matrix_from_json(doc.at("Gamma"), "Gamma");
        cfg.params.protected_cov = matrix_from_json(doc.at("Sigma_x"), "Sigma_x");
        cfg.params.noise_cov = matrix_from_json(doc.at("Sigma_eps"), "Sigma_eps");
        cfg.params.permissible_cov = matrix_from_json(doc.at("Sigma_w"), "Sigma_w");
        for (const auto& group : doc.at("partition")) {
            std::vector<Index> idx;
            for (const auto& v : group) idx.push_back(v.get<Index>());
            cfg.partition.groups.push_back(std::move(idx));
        }
        if (doc.contains("homogeneous")) cfg.homogeneous = doc["homogeneous"].get<bool>();
        if (doc.contains("group_values"))
            cfg.group_values = matrix_from_json(doc["group_values"], "group_values");
        if (doc.contains("reps")) cfg.reps = doc["reps"].get<int>();
        if (doc.contains("seed")) cfg.seed = doc["seed"].get<std::uint64_t>();
        if (doc.contains("scenario"))
            cfg.scenario = prop2_scenario_from_string(doc["scenario"].get<std::string>());
        if (doc.contains("row")) cfg.target_row = doc["row"].get<Index>();
        if (doc.contains("z_threshold")) cfg.z_threshold = doc["z_threshold"].get<double>();
        if (doc.contains("cov_rel_tol")) cfg.cov_rel_tol = doc["cov_rel_tol"].get<double>();
    } catch (const json::exception& e) {
        throw SchemaError(path + ": " + e.what());
    }

    auto check_dims = [&](const char* key, Index expected) {
        if (doc.contains(key) && doc[key].get<Index>() != expected)
            throw SchemaError(path + ": declared " + key +
                              " does not match the matrix shapes");
    };
    check_dims("d", cfg.params.d());
    check_dims("k", cfg.params.k());
    check_dims("l", cfg.params.l());
    validate_params(cfg.params);
    return cfg;
}

json report_to_json(const Prop1Report& report) {
    json j;
    j["check"] = "prop1";
    j["reps"] = report.reps;
    j["predicted_bias"] = matrix_to_json(report.predicted_bias);
    j["empirical_bias"] = matrix_to_json(report.empirical_bias);
    j["bias_z_scores"] = matrix_to_json(report.bias_z_scores);
    j["max_abs_z"] = report.max_abs_z;
    j["row_cov_rel_err"] = report.row_cov_rel_err;
    j["col_cov_rel_err"] = report.col_cov_rel_err;
    j["passed"] = report.passed;
    return j;
}

json report_to_json(const Prop2Report& report) {
    json j;
    j["check"] = "prop2";
    j["scenario"] = to_string(report.scenario);
    j["reps"] = report.reps;
    j["lhs_cov"] = matrix_to_json(report.lhs_cov);
    j["rhs_cov"] = matrix_to_json(report.rhs_cov);
    j["lhs_z_scores"] = matrix_to_json(report.lhs_z_scores);
    j["diff_z_scores"] = matrix_to_json(report.diff_z_scores);
    j["bias_route_cov"] = matrix_to_json(report.bias_route_cov);
    j["max_abs_z"] = report.max_abs_z;
    j["passed"] = report.passed;
    return j;
}

json report_to_json(const LatentParityReport& report) {
    json j;
    j["check"] = "latent";
    j["reps"] = report.reps;
    j["subspace_rank"] = report.subspace_rank;
    j["cov"] = matrix_to_json(report.cov);
    j["z_scores"] = matrix_to_json(report.z_scores);
    j["max_abs_z"] = report.max_abs_z;
    j["passed"] = report.passed;
    return j;
}

VerifyOutcome run_verify_check(const VerifyConfig& config, const std::string& check) {
    PartitionSpec spec{config.partition, config.homogeneous, config.group_values};
    SyntheticData data = generate(config.params, config.n, spec, config.seed);

    VerifyOutcome outcome;
    if (check == "prop1") {
        Prop1Report report =
            verify_prop1(config.params, data.x, data.z, config.partition, config.reps,
                         mix_seed(config.seed, 101), config.z_threshold, config.cov_rel_tol);
        outcome.passed = report.passed;
        outcome.report = report_to_json(report);
    } else if (check == "prop2") {
        Prop2Report report =
            verify_prop2(config.params, data.z, config.partition, config.target_row,
                         config.reps, mix_seed(config.seed, 102), config.scenario,
                         config.z_threshold);
        outcome.passed = report.passed;
        outcome.report = report_to_json(report);
    } else if (check == "latent") {
        LatentParityReport report =
            verify_latent_parity(config.params, data.z, config.target_row, config.reps,
                                 mix_seed(config.seed, 103), config.z_threshold);
        outcome.passed = report.passed;
        outcome.report = report_to_json(report);
    } else {
        throw ContractError("unknown check: " + check + " (expected prop1|prop2|latent)");
    }
    outcome.report["seed"] = config.seed;
    return outcome;
}

}  // namespace ruv

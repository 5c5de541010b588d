// Command-line entry point: verify / debias / compas workflows with
// file-based configs and reports. Exit codes: 0 success, 1 validation
// failure (including a failed verification), 2 I/O or schema error,
// 3 internal numerical error.

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ruv/compas.hpp"
#include "ruv/csv.hpp"
#include "ruv/latent.hpp"
#include "ruv/observed.hpp"
#include "ruv/verify_io.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;
constexpr int kExitNumerical = 3;

struct VerifyArgs {
    std::string config_path;
    std::string check;
    std::string out_dir = ".";
    std::int64_t seed_override = -1;
    bool verbose = false;
};

struct DebiasArgs {
    std::string y_path;
    std::string x_path;
    std::string groups_path;
    std::string method = "observed";
    ruv::Index rank = 0;
    std::string out_path;
    bool verbose = false;
};

struct CompasArgs {
    std::string config_path;
    std::string out_dir;
    std::int64_t seed_override = -1;
    bool verbose = false;
};

ruv::GroupPartition load_groups(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ruv::SchemaError("cannot open groups file: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ruv::SchemaError(path + ": " + e.what());
    }
    if (!doc.contains("groups") || !doc["groups"].is_array())
        throw ruv::SchemaError(path + ": expected an object with a 'groups' array");
    ruv::GroupPartition partition;
    for (const auto& group : doc["groups"]) {
        std::vector<ruv::Index> idx;
        for (const auto& v : group) idx.push_back(v.get<ruv::Index>());
        partition.groups.push_back(std::move(idx));
    }
    return partition;
}

int run_verify(const VerifyArgs& args) {
    ruv::VerifyConfig config = ruv::load_verify_config(args.config_path);
    if (args.seed_override >= 0)
        config.seed = static_cast<std::uint64_t>(args.seed_override);

    ruv::VerifyOutcome outcome = ruv::run_verify_check(config, args.check);

    std::filesystem::create_directories(args.out_dir);
    auto out_path =
        std::filesystem::path(args.out_dir) / ("verify_" + args.check + ".json");
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw ruv::SchemaError("cannot write " + out_path.string());
    out << outcome.report.dump(2) << '\n';

    if (args.verbose) std::cout << outcome.report.dump(2) << '\n';
    std::cout << "check " << args.check << ": " << (outcome.passed ? "PASS" : "FAIL")
              << " (max |z| = " << outcome.report["max_abs_z"].dump() << ")\n";
    return outcome.passed ? kExitOk : kExitValidation;
}

int run_debias(const DebiasArgs& args) {
    ruv::Matrix y = ruv::read_matrix_csv(args.y_path);
    ruv::GroupPartition partition = load_groups(args.groups_path);

    json diagnostics;
    ruv::Matrix y_db;
    std::vector<std::string> warnings;

    if (args.method == "observed") {
        if (args.x_path.empty())
            throw ruv::ContractError("debias: --x is required for the observed method");
        ruv::Matrix x = ruv::read_matrix_csv(args.x_path);
        ruv::ObservedFit fit = ruv::estimate_loading(y, x, partition);
        warnings = fit.warnings;
        y_db = ruv::debias_observed(y, x, fit).y_db;
        diagnostics["method"] = "observed";
        diagnostics["loading"] = ruv::matrix_to_json(fit.loading);
        diagnostics["gram_pinv"] = ruv::matrix_to_json(fit.gram_pinv);
        diagnostics["residual_norm"] = fit.residual_norm;
        diagnostics["effective_rank"] = fit.effective_rank;
    } else if (args.method == "latent") {
        if (args.rank < 1)
            throw ruv::ContractError("debias: --rank >= 1 is required for the latent method");
        ruv::SubspaceBasis basis = ruv::estimate_subspace(y, partition, args.rank);
        warnings = basis.warnings;
        y_db = ruv::debias_latent(y, basis).y_db;
        diagnostics["method"] = "latent";
        diagnostics["basis"] = ruv::matrix_to_json(basis.u);
        diagnostics["singular_values"] =
            ruv::rank_diagnostic(y, partition, std::min(y.cols(), y.rows()));
    } else {
        throw ruv::ContractError("debias: method must be observed or latent");
    }
    diagnostics["warnings"] = warnings;

    ruv::write_matrix_csv(args.out_path, y_db);
    std::ofstream fit_out(args.out_path + ".fit.json", std::ios::binary);
    if (!fit_out) throw ruv::SchemaError("cannot write " + args.out_path + ".fit.json");
    fit_out << diagnostics.dump(2) << '\n';

    for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
    if (args.verbose)
        std::cout << "debias: wrote " << y_db.rows() << " x " << y_db.cols()
                  << " matrix to " << args.out_path << '\n';
    return kExitOk;
}

int run_compas(const CompasArgs& args) {
    ruv::ExperimentConfig config = ruv::load_experiment_config(args.config_path);
    if (args.seed_override >= 0)
        config.seed = static_cast<std::uint64_t>(args.seed_override);

    ruv::ExperimentReport report = ruv::run_experiment(config);
    ruv::write_report(report, args.out_dir);

    for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
    if (args.verbose) {
        std::cout << "records kept: " << report.load_stats.kept << " of "
                  << report.load_stats.total_rows << '\n';
    }
    std::cout << "compas experiment: " << report.n_splits << " splits over "
              << report.n_records << " records; report written to " << args.out_dir
              << '\n';
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Removes protected-attribute variation from tabular representations "
                 "via group-centered regression or subspace projection"};
    app.require_subcommand(1);

    VerifyArgs verify_args;
    auto* verify = app.add_subcommand(
        "verify", "Run a Monte Carlo verification check from a JSON config");
    verify->add_option("--config", verify_args.config_path, "JSON config file")
        ->required();
    verify->add_option("--check", verify_args.check, "prop1|prop2|latent")->required();
    verify->add_option("--out", verify_args.out_dir, "output directory");
    verify->add_option("--seed", verify_args.seed_override, "seed override");
    verify->add_flag("-v,--verbose", verify_args.verbose, "print the full report");

    DebiasArgs debias_args;
    auto* debias = app.add_subcommand("debias", "Debias a representation matrix");
    debias->add_option("--y", debias_args.y_path, "representation CSV")->required();
    debias->add_option("--x", debias_args.x_path, "protected-attribute CSV");
    debias->add_option("--groups", debias_args.groups_path, "groups JSON")->required();
    debias->add_option("--method", debias_args.method, "observed|latent");
    debias->add_option("--rank", debias_args.rank, "subspace rank (latent method)");
    debias->add_option("--out", debias_args.out_path, "output CSV path")->required();
    debias->add_flag("-v,--verbose", debias_args.verbose, "verbose output");

    CompasArgs compas_args;
    auto* compas = app.add_subcommand(
        "compas", "Run the recidivism debiasing experiment end to end");
    compas->add_option("--config", compas_args.config_path, "JSON config file")
        ->required();
    compas->add_option("--out", compas_args.out_dir, "output directory")->required();
    compas->add_option("--seed", compas_args.seed_override, "seed override");
    compas->add_flag("-v,--verbose", compas_args.verbose, "verbose output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return kExitValidation;
    }

    try {
        if (verify->parsed()) return run_verify(verify_args);
        if (debias->parsed()) return run_debias(debias_args);
        if (compas->parsed()) return run_compas(compas_args);
        return kExitValidation;
    } catch (const ruv::SchemaError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const ruv::NumericalError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const ruv::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumerical;
    }
}

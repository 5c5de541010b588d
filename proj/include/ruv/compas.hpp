#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ruv/core.hpp"
#include "ruv/metrics.hpp"

namespace ruv {

enum class Race { african_american, caucasian };

std::string race_label(Race race);  // display string used in reports

/// One retained row of the two-year recidivism file.
struct CompasRecord {
    int age = 0;
    int juv_fel_count = 0;
    int juv_misd_count = 0;
    int juv_other_count = 0;
    int priors_count = 0;
    bool charge_is_felony = false;  // current charge degree
    Race race = Race::caucasian;
    int two_year_recid = 0;
    int compas_decile = 0;  // 1..10
    std::optional<char> recid_charge_degree;  // first letter: 'F', 'M', ...
};

/// Row accounting for the ingest filters, applied in the listed order.
struct LoadStats {
    long total_rows = 0;
    long kept = 0;
    long dropped_race = 0;
    long dropped_screening_window = 0;  // days_b_screening_arrest outside [-30, 30]
    long dropped_recid_flag = 0;        // is_recid == -1
    long dropped_ordinary_charge = 0;   // current charge degree 'O'
    long dropped_missing_decile = 0;
    std::vector<long> skipped_rows;     // unparseable; 1-based file line numbers
};

/// Reads the two-year COMPAS CSV, keeping African-American and Caucasian
/// rows inside the screening window with a known recidivism flag, a
/// non-ordinary current charge, and a decile score in [1, 10].
std::vector<CompasRecord> load_compas(const std::string& path,
                                      LoadStats* stats = nullptr);

struct Features {
    Matrix y;  // n x 6: age, juv felony/misdemeanor/other counts, priors, felony flag
    Matrix x;  // n x 1: 1 for African-American, 0 for Caucasian
    std::vector<int> labels;
    std::vector<int> deciles;
    std::vector<Race> race;
};

Features featurize(const std::vector<CompasRecord>& records);

/// Homogeneous groups over the estimation subset: non-recidivists; felony
/// recidivists; misdemeanor recidivists (keyed by the degree of the NEW
/// charge). Recidivists with a missing or other-degree new charge are left
/// out of the partition. Indices are positions within `subset`.
GroupPartition build_groups(const std::vector<CompasRecord>& records,
                            const std::vector<Index>& subset,
                            std::vector<std::string>* warnings = nullptr);

struct SplitIndices {
    std::vector<Index> estimation, train, test;
};

/// Seeded uniform shuffle split; sizes are floor(n * fraction) with the
/// remainder going to the last piece. Every piece must be non-empty.
SplitIndices split_records(Index n, const std::array<double, 3>& fractions,
                           std::uint64_t seed);

enum class ThresholdSource { test_scores, train_scores, pooled_scores };

struct ExperimentConfig {
    std::string data_path;
    std::array<double, 3> split_fractions{0.4, 0.3, 0.3};
    int n_splits = 30;
    std::uint64_t seed = 1;
    std::vector<double> quantiles{0.5, 0.8};
    ThresholdSource threshold_source = ThresholdSource::test_scores;
    double ridge = 1e-6;
    int max_iter = 100;
    double tol = 1e-8;
    int designated_split = 0;  // split whose ROC curves / histograms are emitted
    int histogram_bins = 20;
    double tail_cut = 0.8;     // right-tail mass threshold for the histograms
};

ExperimentConfig load_experiment_config(const std::string& path);

/// representation -> stratum -> metric cell, keys sorted for reproducible
/// emission. Representations: lr_raw, lr_debiased, compas.
struct StratumRates {
    Aggregate fpr, fnr, accuracy;
};

struct QuantileTable {
    double quantile = 0.0;
    std::map<std::string, std::map<std::string, StratumRates>> cells;
};

struct SplitCell {
    std::optional<double> fpr, fnr;
    double accuracy = 0.0;
};

struct SplitMetrics {
    int split = 0;
    // quantile key (printed) -> representation -> stratum -> cell
    std::map<std::string, std::map<std::string, std::map<std::string, SplitCell>>> cells;
    double aa_tail_raw = 0.0;
    double aa_tail_debiased = 0.0;
    double auc_lr_raw = 0.0;
    double auc_lr_debiased = 0.0;
    double auc_compas = 0.0;
    double loading_norm = 0.0;             // fitted adjustment magnitude
    std::vector<double> lr_raw_weights;    // fitted on raw train rows
    std::vector<double> lr_debiased_weights;
};

struct ExperimentReport {
    LoadStats load_stats;
    long n_records = 0;
    int n_splits = 0;
    std::uint64_t seed = 0;
    std::vector<QuantileTable> tables;
    double tail_cut = 0.8;
    Aggregate aa_tail_raw, aa_tail_debiased;
    Aggregate auc_lr_raw, auc_lr_debiased, auc_compas;
    RocCurve roc_lr_raw, roc_lr_debiased, roc_compas;  // designated split
    std::vector<HistBin> hist_aa_raw, hist_aa_debiased;
    std::vector<SplitMetrics> per_split;
    std::vector<std::string> warnings;
};

/// Full experiment: per split, estimate the protected loading on the
/// estimation piece, debias train/test, fit logistic models on raw and
/// debiased train rows, score the test rows, threshold at each configured
/// quantile (decile cuts 10*q for the COMPAS baseline), and aggregate over
/// splits. Splits are independent and run in parallel; the report is
/// bit-identical for a fixed config.
ExperimentReport run_experiment(const ExperimentConfig& config);

/// report.json, tables.txt, roc_*.csv and hist_aa_*.csv under out_dir.
void write_report(const ExperimentReport& report, const std::string& out_dir);

}  // namespace ruv

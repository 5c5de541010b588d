#include "ruv/compas.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "ruv/csv.hpp"
#include "ruv/logistic.hpp"
#include "ruv/observed.hpp"
#include "ruv/rng.hpp"

namespace ruv {

namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::optional<long> parse_long(const std::string& raw) {
    std::string s = trim(raw);
    if (s.empty()) return std::nullopt;
    long v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

std::optional<double> parse_double(const std::string& raw) {
    std::string s = trim(raw);
    if (s.empty()) return std::nullopt;
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

std::optional<char> first_alpha(const std::string& s) {
    for (char c : s)
        if (std::isalpha(static_cast<unsigned char>(c)))
            return static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return std::nullopt;
}

constexpr const char* kRequiredColumns[] = {
    "age",       "juv_fel_count",  "juv_misd_count", "juv_other_count",
    "priors_count", "c_charge_degree", "r_charge_degree", "race",
    "two_year_recid", "is_recid",   "days_b_screening_arrest", "decile_score",
};

}  // namespace

std::string race_label(Race race) {
    return race == Race::african_american ? "African-American" : "Caucasian";
}

std::vector<CompasRecord> load_compas(const std::string& path, LoadStats* stats) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SchemaError("cannot open dataset: " + path);

    std::vector<std::string> header;
    if (!read_csv_record(in, header))
        throw SchemaError(path + ": empty file, header row required");

    std::map<std::string, std::size_t> col;  // first occurrence wins
    for (std::size_t i = 0; i < header.size(); ++i)
        col.emplace(trim(header[i]), i);

    std::vector<std::string> missing;
    for (const char* name : kRequiredColumns)
        if (!col.count(name)) missing.emplace_back(name);
    if (!missing.empty()) {
        std::string msg = path + ": missing required columns:";
        for (const auto& m : missing) msg += " " + m;
        throw SchemaError(msg);
    }

    LoadStats local;
    std::vector<CompasRecord> records;
    std::vector<std::string> fields;
    long line = 1;
    while (read_csv_record(in, fields)) {
        ++line;
        if (fields.size() == 1 && fields[0].empty()) continue;
        ++local.total_rows;
        if (fields.size() < header.size()) {
            local.skipped_rows.push_back(line);
            continue;
        }
        auto field = [&](const char* name) -> const std::string& {
            return fields[col.at(name)];
        };

        std::string race = trim(field("race"));
        if (race != "African-American" && race != "Caucasian") {
            ++local.dropped_race;
            continue;
        }
        std::optional<double> days = parse_double(field("days_b_screening_arrest"));
        if (!days || *days < -30.0 || *days > 30.0) {
            ++local.dropped_screening_window;
            continue;
        }
        std::optional<long> is_recid = parse_long(field("is_recid"));
        if (!is_recid) {
            local.skipped_rows.push_back(line);
            continue;
        }
        if (*is_recid == -1) {
            ++local.dropped_recid_flag;
            continue;
        }
        std::optional<char> charge = first_alpha(field("c_charge_degree"));
        if (!charge || *charge == 'O') {
            ++local.dropped_ordinary_charge;
            continue;
        }
        std::optional<long> decile = parse_long(field("decile_score"));
        if (!decile || *decile < 1 || *decile > 10) {
            ++local.dropped_missing_decile;
            continue;
        }

        auto age = parse_long(field("age"));
        auto juv_fel = parse_long(field("juv_fel_count"));
        auto juv_misd = parse_long(field("juv_misd_count"));
        auto juv_other = parse_long(field("juv_other_count"));
        auto priors = parse_long(field("priors_count"));
        auto recid = parse_long(field("two_year_recid"));
        bool counts_ok = age && *age >= 0 && juv_fel && *juv_fel >= 0 && juv_misd &&
                         *juv_misd >= 0 && juv_other && *juv_other >= 0 && priors &&
                         *priors >= 0 && recid && (*recid == 0 || *recid == 1);
        if (!counts_ok) {
            local.skipped_rows.push_back(line);
            continue;
        }

        CompasRecord rec;
        rec.age = static_cast<int>(*age);
        rec.juv_fel_count = static_cast<int>(*juv_fel);
        rec.juv_misd_count = static_cast<int>(*juv_misd);
        rec.juv_other_count = static_cast<int>(*juv_other);
        rec.priors_count = static_cast<int>(*priors);
        rec.charge_is_felony = *charge == 'F';
        rec.race = race == "African-American" ? Race::african_american : Race::caucasian;
        rec.two_year_recid = static_cast<int>(*recid);
        rec.compas_decile = static_cast<int>(*decile);
        rec.recid_charge_degree = first_alpha(field("r_charge_degree"));
        records.push_back(rec);
        ++local.kept;
    }
    if (stats) *stats = std::move(local);
    return records;
}

Features featurize(const std::vector<CompasRecord>& records) {
    if (records.empty()) throw DataError("featurize: no records");
    const Index n = static_cast<Index>(records.size());
    Features f;
    f.y = Matrix(n, 6);
    f.x = Matrix(n, 1);
    f.labels.resize(records.size());
    f.deciles.resize(records.size());
    f.race.resize(records.size());
    for (Index i = 0; i < n; ++i) {
        const CompasRecord& r = records[static_cast<std::size_t>(i)];
        f.y(i, 0) = r.age;
        f.y(i, 1) = r.juv_fel_count;
        f.y(i, 2) = r.juv_misd_count;
        f.y(i, 3) = r.juv_other_count;
        f.y(i, 4) = r.priors_count;
        f.y(i, 5) = r.charge_is_felony ? 1.0 : 0.0;
        f.x(i, 0) = r.race == Race::african_american ? 1.0 : 0.0;
        f.labels[static_cast<std::size_t>(i)] = r.two_year_recid;
        f.deciles[static_cast<std::size_t>(i)] = r.compas_decile;
        f.race[static_cast<std::size_t>(i)] = r.race;
    }
    return f;
}

GroupPartition build_groups(const std::vector<CompasRecord>& records,
                            const std::vector<Index>& subset,
                            std::vector<std::string>* warnings) {
    std::vector<Index> non_recid, felony_recid, misd_recid;
    for (Index pos = 0; pos < static_cast<Index>(subset.size()); ++pos) {
        const CompasRecord& r = records[static_cast<std::size_t>(subset[static_cast<std::size_t>(pos)])];
        if (r.two_year_recid == 0) {
            non_recid.push_back(pos);
        } else if (r.recid_charge_degree == 'F') {
            felony_recid.push_back(pos);
        } else if (r.recid_charge_degree == 'M') {
            misd_recid.push_back(pos);
        }
        // recidivists with a missing or other-degree new charge stay out of
        // the partition but remain usable rows elsewhere
    }
    GroupPartition partition;
    auto push = [&](std::vector<Index>& g, const char* name) {
        if (g.empty()) {
            if (warnings)
                warnings->push_back(std::string("group '") + name +
                                    "' is empty and was dropped from the partition");
            return;
        }
        partition.groups.push_back(std::move(g));
    };
    push(non_recid, "non-recidivists");
    push(felony_recid, "felony recidivists");
    push(misd_recid, "misdemeanor recidivists");
    return partition;
}

SplitIndices split_records(Index n, const std::array<double, 3>& fractions,
                           std::uint64_t seed) {
    for (double f : fractions)
        if (!(f > 0.0))
            throw ContractError("split_records: all fractions must be positive");
    double total = fractions[0] + fractions[1] + fractions[2];
    if (std::abs(total - 1.0) > 1e-9)
        throw ContractError("split_records: fractions must sum to 1");

    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::mt19937_64 engine(mix_seed(seed, 0));
    std::shuffle(order.begin(), order.end(), engine);

    auto n0 = static_cast<std::size_t>(std::floor(static_cast<double>(n) * fractions[0]));
    auto n1 = static_cast<std::size_t>(std::floor(static_cast<double>(n) * fractions[1]));
    if (n0 == 0 || n1 == 0 || n0 + n1 >= static_cast<std::size_t>(n))
        throw DataError("split_records: a split piece is empty");

    SplitIndices out;
    out.estimation.assign(order.begin(), order.begin() + n0);
    out.train.assign(order.begin() + n0, order.begin() + n0 + n1);
    out.test.assign(order.begin() + n0 + n1, order.end());
    return out;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open config: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw SchemaError(path + ": " + e.what());
    }
    ExperimentConfig cfg;
    try {
        cfg.data_path = doc.at("data_path").get<std::string>();
        if (doc.contains("split_fractions")) {
            auto f = doc["split_fractions"].get<std::vector<double>>();
            if (f.size() != 3) throw SchemaError("split_fractions must have 3 entries");
            cfg.split_fractions = {f[0], f[1], f[2]};
        }
        if (doc.contains("n_splits")) cfg.n_splits = doc["n_splits"].get<int>();
        if (doc.contains("seed")) cfg.seed = doc["seed"].get<std::uint64_t>();
        if (doc.contains("quantiles"))
            cfg.quantiles = doc["quantiles"].get<std::vector<double>>();
        if (doc.contains("threshold_source")) {
            std::string s = doc["threshold_source"].get<std::string>();
            if (s == "test")
                cfg.threshold_source = ThresholdSource::test_scores;
            else if (s == "train")
                cfg.threshold_source = ThresholdSource::train_scores;
            else if (s == "pooled")
                cfg.threshold_source = ThresholdSource::pooled_scores;
            else
                throw SchemaError("threshold_source must be test, train or pooled");
        }
        if (doc.contains("ridge")) cfg.ridge = doc["ridge"].get<double>();
        if (doc.contains("max_iter")) cfg.max_iter = doc["max_iter"].get<int>();
        if (doc.contains("tol")) cfg.tol = doc["tol"].get<double>();
        if (doc.contains("designated_split"))
            cfg.designated_split = doc["designated_split"].get<int>();
        if (doc.contains("histogram_bins"))
            cfg.histogram_bins = doc["histogram_bins"].get<int>();
        if (doc.contains("tail_cut")) cfg.tail_cut = doc["tail_cut"].get<double>();
    } catch (const json::exception& e) {
        throw SchemaError(path + ": " + e.what());
    }
    return cfg;
}

namespace {

struct DesignatedArtifacts {
    RocCurve roc_lr_raw, roc_lr_debiased, roc_compas;
    std::vector<HistBin> hist_aa_raw, hist_aa_debiased;
};

template <typename T>
std::vector<T> take(const std::vector<T>& v, const std::vector<Index>& idx) {
    std::vector<T> out;
    out.reserve(idx.size());
    for (Index i : idx) out.push_back(v[static_cast<std::size_t>(i)]);
    return out;
}

SplitCell to_cell(const Rates& r) {
    return SplitCell{r.fpr, r.fnr, r.accuracy};
}

int decile_cut(double q) {
    return static_cast<int>(std::lround(10.0 * q));
}

SplitMetrics run_split(const Features& features,
                       const std::vector<CompasRecord>& records,
                       const ExperimentConfig& config, int split_index,
                       DesignatedArtifacts* artifacts,
                       std::vector<std::string>* warnings) {
    const Index n = features.y.rows();
    SplitIndices split =
        split_records(n, config.split_fractions, mix_seed(config.seed, split_index));

    GroupPartition partition = build_groups(records, split.estimation, warnings);
    Matrix y_est = take_rows(features.y, split.estimation);
    Matrix x_est = take_rows(features.x, split.estimation);
    ObservedFit fit = estimate_loading(y_est, x_est, partition);

    Matrix y_train = take_rows(features.y, split.train);
    Matrix x_train = take_rows(features.x, split.train);
    Matrix y_test = take_rows(features.y, split.test);
    Matrix x_test = take_rows(features.x, split.test);
    Matrix y_train_db = debias_observed(y_train, x_train, fit).y_db;
    Matrix y_test_db = debias_observed(y_test, x_test, fit).y_db;

    std::vector<int> labels_train = take(features.labels, split.train);
    std::vector<int> labels_test = take(features.labels, split.test);
    std::vector<int> deciles_test = take(features.deciles, split.test);
    std::vector<Race> race_test = take(features.race, split.test);

    LogisticModel lr_raw =
        fit_logistic(y_train, labels_train, config.ridge, config.max_iter, config.tol);
    LogisticModel lr_db =
        fit_logistic(y_train_db, labels_train, config.ridge, config.max_iter, config.tol);

    std::vector<double> raw_test = predict_prob(lr_raw, y_test);
    std::vector<double> db_test = predict_prob(lr_db, y_test_db);

    auto threshold_scores = [&](const LogisticModel& model, const Matrix& train,
                                const std::vector<double>& test) {
        switch (config.threshold_source) {
            case ThresholdSource::test_scores:
                return test;
            case ThresholdSource::train_scores:
                return predict_prob(model, train);
            case ThresholdSource::pooled_scores: {
                std::vector<double> pooled = predict_prob(model, train);
                pooled.insert(pooled.end(), test.begin(), test.end());
                return pooled;
            }
        }
        return test;
    };
    std::vector<double> raw_source = threshold_scores(lr_raw, y_train, raw_test);
    std::vector<double> db_source = threshold_scores(lr_db, y_train_db, db_test);

    std::vector<double> decile_scores(deciles_test.size());
    for (std::size_t i = 0; i < deciles_test.size(); ++i)
        decile_scores[i] = static_cast<double>(deciles_test[i]);

    std::vector<std::string> tags(race_test.size());
    for (std::size_t i = 0; i < race_test.size(); ++i) tags[i] = race_label(race_test[i]);

    SplitMetrics metrics;
    metrics.split = split_index;
    for (double q : config.quantiles) {
        std::string key = format_double(q);
        auto& table = metrics.cells[key];
        double thr_raw = quantile_threshold(raw_source, q);
        double thr_db = quantile_threshold(db_source, q);
        for (const auto& [stratum, r] : group_rates(raw_test, labels_test, tags, thr_raw))
            table["lr_raw"][stratum] = to_cell(r);
        for (const auto& [stratum, r] : group_rates(db_test, labels_test, tags, thr_db))
            table["lr_debiased"][stratum] = to_cell(r);
        double cut = static_cast<double>(decile_cut(q));
        for (const auto& [stratum, r] : group_rates(decile_scores, labels_test, tags, cut))
            table["compas"][stratum] = to_cell(r);
    }

    metrics.auc_lr_raw = roc(raw_test, labels_test).auc;
    metrics.auc_lr_debiased = roc(db_test, labels_test).auc;
    metrics.auc_compas = roc(decile_scores, labels_test).auc;

    long aa_count = 0, aa_raw_tail = 0, aa_db_tail = 0;
    std::vector<double> aa_raw_scores, aa_db_scores;
    for (std::size_t i = 0; i < race_test.size(); ++i) {
        if (race_test[i] != Race::african_american) continue;
        ++aa_count;
        aa_raw_scores.push_back(raw_test[i]);
        aa_db_scores.push_back(db_test[i]);
        if (raw_test[i] > config.tail_cut) ++aa_raw_tail;
        if (db_test[i] > config.tail_cut) ++aa_db_tail;
    }
    if (aa_count > 0) {
        metrics.aa_tail_raw = static_cast<double>(aa_raw_tail) / static_cast<double>(aa_count);
        metrics.aa_tail_debiased =
            static_cast<double>(aa_db_tail) / static_cast<double>(aa_count);
    } else if (warnings) {
        warnings->push_back("split " + std::to_string(split_index) +
                            ": no African-American rows in the test piece");
    }

    metrics.loading_norm = frobenius_norm(fit.loading);
    metrics.lr_raw_weights = lr_raw.weights;
    metrics.lr_debiased_weights = lr_db.weights;

    if (artifacts) {
        artifacts->roc_lr_raw = roc(raw_test, labels_test);
        artifacts->roc_lr_debiased = roc(db_test, labels_test);
        artifacts->roc_compas = roc(decile_scores, labels_test);
        artifacts->hist_aa_raw = histogram(aa_raw_scores, config.histogram_bins, 0.0, 1.0);
        artifacts->hist_aa_debiased =
            histogram(aa_db_scores, config.histogram_bins, 0.0, 1.0);
    }
    return metrics;
}

Aggregate aggregate_or_single(const std::vector<std::optional<double>>& values) {
    if (values.size() >= 2) return aggregate_cells(values);
    Aggregate out;
    if (values.size() == 1 && values[0]) {
        out.mean = values[0];
        out.count = 1;
    } else if (values.size() == 1) {
        out.excluded = 1;
    }
    return out;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& config) {
    if (config.n_splits < 1) throw ContractError("run_experiment: n_splits must be >= 1");
    if (config.designated_split < 0 || config.designated_split >= config.n_splits)
        throw ContractError("run_experiment: designated split out of range");
    for (double q : config.quantiles)
        if (!(q > 0.0 && q < 1.0))
            throw ContractError("run_experiment: quantiles must lie in (0, 1)");

    ExperimentReport report;
    std::vector<CompasRecord> records = load_compas(config.data_path, &report.load_stats);
    if (records.empty()) throw DataError("run_experiment: no usable records");
    Features features = featurize(records);

    report.n_records = static_cast<long>(records.size());
    report.n_splits = config.n_splits;
    report.seed = config.seed;
    report.tail_cut = config.tail_cut;
    report.per_split.resize(static_cast<std::size_t>(config.n_splits));

    DesignatedArtifacts artifacts;
    std::vector<std::vector<std::string>> split_warnings(
        static_cast<std::size_t>(config.n_splits));
    std::string failure;

#pragma omp parallel for schedule(dynamic)
    for (int s = 0; s < config.n_splits; ++s) {
        try {
            DesignatedArtifacts* sink = s == config.designated_split ? &artifacts : nullptr;
            report.per_split[static_cast<std::size_t>(s)] =
                run_split(features, records, config, s, sink,
                          &split_warnings[static_cast<std::size_t>(s)]);
        } catch (const std::exception& e) {
#pragma omp critical
            if (failure.empty())
                failure = "split " + std::to_string(s) + ": " + e.what();
        }
    }
    if (!failure.empty()) throw DataError(failure);

    for (const auto& w : split_warnings)
        for (const auto& msg : w)
            if (std::find(report.warnings.begin(), report.warnings.end(), msg) ==
                report.warnings.end())
                report.warnings.push_back(msg);

    // aggregate each cell over splits
    for (double q : config.quantiles) {
        std::string key = format_double(q);
        QuantileTable table;
        table.quantile = q;
        for (const char* rep : {"compas", "lr_debiased", "lr_raw"}) {
            for (const char* stratum : {"Population", "African-American", "Caucasian"}) {
                std::vector<std::optional<double>> fpr, fnr, acc;
                for (const auto& split : report.per_split) {
                    const SplitCell* found = nullptr;
                    auto qt = split.cells.find(key);
                    if (qt != split.cells.end()) {
                        auto rt = qt->second.find(rep);
                        if (rt != qt->second.end()) {
                            auto st = rt->second.find(stratum);
                            if (st != rt->second.end()) found = &st->second;
                        }
                    }
                    // a stratum absent from a split aggregates as undefined
                    fpr.push_back(found ? found->fpr : std::nullopt);
                    fnr.push_back(found ? found->fnr : std::nullopt);
                    acc.push_back(found ? std::optional<double>(found->accuracy)
                                        : std::nullopt);
                }
                StratumRates agg;
                agg.fpr = aggregate_or_single(fpr);
                agg.fnr = aggregate_or_single(fnr);
                agg.accuracy = aggregate_or_single(acc);
                table.cells[rep][stratum] = agg;
            }
        }
        report.tables.push_back(std::move(table));
    }

    auto collect = [&](auto member) {
        std::vector<std::optional<double>> values;
        for (const auto& split : report.per_split) values.emplace_back(member(split));
        return aggregate_or_single(values);
    };
    report.aa_tail_raw = collect([](const SplitMetrics& m) { return m.aa_tail_raw; });
    report.aa_tail_debiased =
        collect([](const SplitMetrics& m) { return m.aa_tail_debiased; });
    report.auc_lr_raw = collect([](const SplitMetrics& m) { return m.auc_lr_raw; });
    report.auc_lr_debiased =
        collect([](const SplitMetrics& m) { return m.auc_lr_debiased; });
    report.auc_compas = collect([](const SplitMetrics& m) { return m.auc_compas; });

    report.roc_lr_raw = std::move(artifacts.roc_lr_raw);
    report.roc_lr_debiased = std::move(artifacts.roc_lr_debiased);
    report.roc_compas = std::move(artifacts.roc_compas);
    report.hist_aa_raw = std::move(artifacts.hist_aa_raw);
    report.hist_aa_debiased = std::move(artifacts.hist_aa_debiased);
    return report;
}

namespace {

json aggregate_to_json(const Aggregate& a) {
    json j;
    j["mean"] = a.mean ? json(*a.mean) : json(nullptr);
    j["se"] = a.se ? json(*a.se) : json(nullptr);
    j["count"] = a.count;
    j["excluded"] = a.excluded;
    return j;
}

json cell_to_json(const SplitCell& c) {
    json j;
    j["fpr"] = c.fpr ? json(*c.fpr) : json(nullptr);
    j["fnr"] = c.fnr ? json(*c.fnr) : json(nullptr);
    j["accuracy"] = c.accuracy;
    return j;
}

void write_roc_csv(const std::string& path, const RocCurve& curve) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw SchemaError("cannot write " + path);
    out << "fpr,tpr\n";
    for (const auto& [fpr, tpr] : curve.points)
        out << format_double(fpr) << ',' << format_double(tpr) << '\n';
}

void write_hist_csv(const std::string& path, const std::vector<HistBin>& bins) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw SchemaError("cannot write " + path);
    out << "bin_left,bin_right,count\n";
    for (const auto& b : bins)
        out << format_double(b.left) << ',' << format_double(b.right) << ','
            << b.count << '\n';
}

std::string fmt_cell(const Aggregate& a) {
    if (!a.mean) return "--";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.3f (%.3f)", *a.mean, a.se ? *a.se : 0.0);
    return buf;
}

void write_tables_txt(const std::string& path, const ExperimentReport& report) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw SchemaError("cannot write " + path);
    char line[200];
    for (const auto& table : report.tables) {
        out << "FPR/FNR at the " << format_double(table.quantile)
            << " quantile threshold (mean (SE) over " << report.n_splits
            << " splits)\n";
        std::snprintf(line, sizeof(line), "  %-18s%-30s%s\n", "", "LR raw", "LR debiased");
        out << line;
        std::snprintf(line, sizeof(line), "  %-18s%-15s%-15s%-15s%s\n", "",
                      "FPR (SE)", "FNR (SE)", "FPR (SE)", "FNR (SE)");
        out << line;
        for (const char* stratum : {"Population", "Caucasian", "African-American"}) {
            const auto& raw = table.cells.at("lr_raw").at(stratum);
            const auto& db = table.cells.at("lr_debiased").at(stratum);
            std::snprintf(line, sizeof(line), "  %-18s%-15s%-15s%-15s%s\n", stratum,
                          fmt_cell(raw.fpr).c_str(), fmt_cell(raw.fnr).c_str(),
                          fmt_cell(db.fpr).c_str(), fmt_cell(db.fnr).c_str());
            out << line;
        }
        out << '\n';
    }
    out << "Accuracy (mean (SE) over " << report.n_splits << " splits)\n";
    std::snprintf(line, sizeof(line), "  %-18s%-16s%-16s%s\n", "quantile", "LR raw",
                  "LR debiased", "COMPAS");
    out << line;
    for (const auto& table : report.tables) {
        const auto& raw = table.cells.at("lr_raw").at("Population").accuracy;
        const auto& db = table.cells.at("lr_debiased").at("Population").accuracy;
        const auto& compas = table.cells.at("compas").at("Population").accuracy;
        std::snprintf(line, sizeof(line), "  %-18s%-16s%-16s%s\n",
                      format_double(table.quantile).c_str(), fmt_cell(raw).c_str(),
                      fmt_cell(db).c_str(), fmt_cell(compas).c_str());
        out << line;
    }
}

}  // namespace

void write_report(const ExperimentReport& report, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    auto path = [&](const char* name) {
        return (std::filesystem::path(out_dir) / name).string();
    };

    json doc;
    doc["n_records"] = report.n_records;
    doc["n_splits"] = report.n_splits;
    doc["seed"] = report.seed;
    json stats;
    stats["total_rows"] = report.load_stats.total_rows;
    stats["kept"] = report.load_stats.kept;
    stats["dropped_race"] = report.load_stats.dropped_race;
    stats["dropped_screening_window"] = report.load_stats.dropped_screening_window;
    stats["dropped_recid_flag"] = report.load_stats.dropped_recid_flag;
    stats["dropped_ordinary_charge"] = report.load_stats.dropped_ordinary_charge;
    stats["dropped_missing_decile"] = report.load_stats.dropped_missing_decile;
    stats["skipped_rows"] = report.load_stats.skipped_rows;
    doc["load_stats"] = stats;

    json tables = json::array();
    for (const auto& table : report.tables) {
        json t;
        t["quantile"] = table.quantile;
        for (const auto& [rep, strata] : table.cells)
            for (const auto& [stratum, cell] : strata) {
                t["cells"][rep][stratum]["fpr"] = aggregate_to_json(cell.fpr);
                t["cells"][rep][stratum]["fnr"] = aggregate_to_json(cell.fnr);
                t["cells"][rep][stratum]["accuracy"] = aggregate_to_json(cell.accuracy);
            }
        tables.push_back(t);
    }
    doc["tables"] = tables;

    doc["aa_tail_mass"] = {{"cut", report.tail_cut},
                           {"raw", aggregate_to_json(report.aa_tail_raw)},
                           {"debiased", aggregate_to_json(report.aa_tail_debiased)}};
    doc["auc"] = {{"lr_raw", aggregate_to_json(report.auc_lr_raw)},
                  {"lr_debiased", aggregate_to_json(report.auc_lr_debiased)},
                  {"compas", aggregate_to_json(report.auc_compas)}};

    json splits = json::array();
    for (const auto& split : report.per_split) {
        json s;
        s["split"] = split.split;
        for (const auto& [q, reps] : split.cells)
            for (const auto& [rep, strata] : reps)
                for (const auto& [stratum, cell] : strata)
                    s["cells"][q][rep][stratum] = cell_to_json(cell);
        s["aa_tail_raw"] = split.aa_tail_raw;
        s["aa_tail_debiased"] = split.aa_tail_debiased;
        s["auc_lr_raw"] = split.auc_lr_raw;
        s["auc_lr_debiased"] = split.auc_lr_debiased;
        s["auc_compas"] = split.auc_compas;
        s["loading_norm"] = split.loading_norm;
        s["lr_raw_weights"] = split.lr_raw_weights;
        s["lr_debiased_weights"] = split.lr_debiased_weights;
        splits.push_back(s);
    }
    doc["per_split"] = splits;
    doc["warnings"] = report.warnings;

    std::ofstream json_out(path("report.json"), std::ios::binary);
    if (!json_out) throw SchemaError("cannot write report.json");
    json_out << doc.dump(2) << '\n';

    write_tables_txt(path("tables.txt"), report);
    write_roc_csv(path("roc_lr_raw.csv"), report.roc_lr_raw);
    write_roc_csv(path("roc_lr_debiased.csv"), report.roc_lr_debiased);
    write_roc_csv(path("roc_compas.csv"), report.roc_compas);
    write_hist_csv(path("hist_aa_raw.csv"), report.hist_aa_raw);
    write_hist_csv(path("hist_aa_debiased.csv"), report.hist_aa_debiased);
}

}  // namespace ruv

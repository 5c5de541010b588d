#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ruv/matrix.hpp"

namespace ruv {

/// Nearest-rank (type 1) quantile: the smallest score s such that at least
/// ceil(q * n) scores are <= s. The downstream classification rule is
/// "predict positive iff score > threshold".
double quantile_threshold(const std::vector<double>& scores, double q);

/// A rate is absent (not zero) when its denominator class is empty.
struct Rates {
    std::optional<double> fpr;  // FP / (FP + TN) over actual negatives
    std::optional<double> fnr;  // FN / (FN + TP) over actual positives
    double accuracy = 0.0;
};

Rates rates(const std::vector<double>& scores, const std::vector<int>& labels,
            double threshold);

/// Rates over all rows ("Population" first) and within each tag, tags in
/// first-appearance order.
std::vector<std::pair<std::string, Rates>> group_rates(
    const std::vector<double>& scores, const std::vector<int>& labels,
    const std::vector<std::string>& tags, double threshold);

/// Monotone staircase from (0,0) to (1,1); thresholds swept descending with
/// ties grouped; AUC by the trapezoidal rule (equals the pairwise
/// probability that a positive outscores a negative, ties counting 1/2).
struct RocCurve {
    std::vector<std::pair<double, double>> points;  // (fpr, tpr)
    double auc = 0.0;
};

RocCurve roc(const std::vector<double>& scores, const std::vector<int>& labels);

/// Mean and standard error (sd / sqrt(count)) over the defined cells of a
/// per-split metric; undefined cells are excluded and counted.
struct Aggregate {
    std::optional<double> mean;
    std::optional<double> se;
    int count = 0;
    int excluded = 0;
};

Aggregate aggregate_cells(const std::vector<std::optional<double>>& values);

struct HistBin {
    double left = 0.0;
    double right = 0.0;
    int count = 0;
};

std::vector<HistBin> histogram(const std::vector<double>& values, int bins,
                               double lo, double hi);

}  // namespace ruv

#include "ruv/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ruv/error.hpp"

namespace ruv {

double quantile_threshold(const std::vector<double>& scores, double q) {
    if (scores.empty()) throw DataError("quantile_threshold: empty scores");
    if (!(q > 0.0 && q < 1.0))
        throw ContractError("quantile_threshold: q must lie in (0, 1)");
    std::vector<double> sorted = scores;
    std::sort(sorted.begin(), sorted.end());
    auto n = static_cast<double>(sorted.size());
    auto rank = static_cast<std::size_t>(std::ceil(q * n));
    rank = std::clamp<std::size_t>(rank, 1, sorted.size());
    return sorted[rank - 1];
}

Rates rates(const std::vector<double>& scores, const std::vector<int>& labels,
            double threshold) {
    if (scores.size() != labels.size())
        throw DimensionError("rates: scores and labels differ in length");
    if (scores.empty()) throw DataError("rates: empty input");
    long tp = 0, tn = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        bool predicted = scores[i] > threshold;
        if (labels[i]) {
            (predicted ? tp : fn)++;
        } else {
            (predicted ? fp : tn)++;
        }
    }
    Rates out;
    if (fp + tn > 0) out.fpr = static_cast<double>(fp) / static_cast<double>(fp + tn);
    if (fn + tp > 0) out.fnr = static_cast<double>(fn) / static_cast<double>(fn + tp);
    out.accuracy = static_cast<double>(tp + tn) / static_cast<double>(scores.size());
    return out;
}

std::vector<std::pair<std::string, Rates>> group_rates(
    const std::vector<double>& scores, const std::vector<int>& labels,
    const std::vector<std::string>& tags, double threshold) {
    if (tags.size() != scores.size())
        throw DimensionError("group_rates: tags and scores differ in length");
    std::vector<std::pair<std::string, Rates>> out;
    out.emplace_back("Population", rates(scores, labels, threshold));
    std::vector<std::string> order;
    for (const auto& t : tags)
        if (std::find(order.begin(), order.end(), t) == order.end()) order.push_back(t);
    for (const auto& tag : order) {
        std::vector<double> s;
        std::vector<int> y;
        for (std::size_t i = 0; i < tags.size(); ++i)
            if (tags[i] == tag) {
                s.push_back(scores[i]);
                y.push_back(labels[i]);
            }
        out.emplace_back(tag, rates(s, y, threshold));
    }
    return out;
}

RocCurve roc(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size())
        throw DimensionError("roc: scores and labels differ in length");
    long pos = std::accumulate(labels.begin(), labels.end(), 0L);
    long neg = static_cast<long>(labels.size()) - pos;
    if (pos == 0 || neg == 0) throw DataError("roc: both classes must be present");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scores[a] > scores[b];
    });

    RocCurve curve;
    curve.points.emplace_back(0.0, 0.0);
    long tp = 0, fp = 0;
    double auc_num = 0.0;  // accumulated in count space, normalized once
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        long tied_tp = 0, tied_fp = 0;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) {
            (labels[order[j]] ? tied_tp : tied_fp)++;
            ++j;
        }
        auc_num += static_cast<double>(tied_fp) *
                   (2.0 * static_cast<double>(tp) + static_cast<double>(tied_tp));
        tp += tied_tp;
        fp += tied_fp;
        curve.points.emplace_back(static_cast<double>(fp) / static_cast<double>(neg),
                                  static_cast<double>(tp) / static_cast<double>(pos));
        i = j;
    }
    curve.auc = auc_num / (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
    return curve;
}

Aggregate aggregate_cells(const std::vector<std::optional<double>>& values) {
    if (values.size() < 2)
        throw DataError("aggregate_cells: need at least two splits");
    Aggregate out;
    double sum = 0.0;
    for (const auto& v : values) {
        if (v) {
            sum += *v;
            ++out.count;
        } else {
            ++out.excluded;
        }
    }
    if (out.count == 0) return out;
    out.mean = sum / out.count;
    if (out.count >= 2) {
        double ss = 0.0;
        for (const auto& v : values)
            if (v) ss += (*v - *out.mean) * (*v - *out.mean);
        double sd = std::sqrt(ss / (out.count - 1));
        out.se = sd / std::sqrt(static_cast<double>(out.count));
    }
    return out;
}

std::vector<HistBin> histogram(const std::vector<double>& values, int bins,
                               double lo, double hi) {
    if (bins < 1 || !(hi > lo)) throw ContractError("histogram: bad bin spec");
    std::vector<HistBin> out(static_cast<std::size_t>(bins));
    double width = (hi - lo) / bins;
    for (int b = 0; b < bins; ++b) {
        out[static_cast<std::size_t>(b)].left = lo + b * width;
        out[static_cast<std::size_t>(b)].right = lo + (b + 1) * width;
    }
    for (double v : values) {
        if (v < lo || v > hi) continue;
        int b = std::min(static_cast<int>((v - lo) / width), bins - 1);
        out[static_cast<std::size_t>(b)].count++;
    }
    return out;
}

}  // namespace ruv

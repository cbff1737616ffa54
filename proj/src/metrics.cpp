#include "metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace adarnn {
namespace {

double pearson(const std::vector<double>& x, const std::vector<double>& y, bool& degenerate) {
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) {
        degenerate = true;
        return 0.0;
    }
    degenerate = false;
    return sxy / std::sqrt(sxx * syy);
}

// Average ranks with ties sharing their midpoint.
std::vector<double> ranks(const std::vector<double>& values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> out(values.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
        const double shared = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) out[order[k]] = shared;
        i = j + 1;
    }
    return out;
}

struct MeanStd {
    double mean = 0.0;
    double stddev = 0.0; // population
};

MeanStd mean_population_std(const std::vector<double>& values) {
    MeanStd out;
    for (double v : values) out.mean += v;
    out.mean /= static_cast<double>(values.size());
    double acc = 0.0;
    for (double v : values) acc += (v - out.mean) * (v - out.mean);
    out.stddev = std::sqrt(acc / static_cast<double>(values.size()));
    return out;
}

// One-vs-rest ROC area by trapezoids, processing tied scores together.
double roc_auc(const std::vector<double>& scores, const std::vector<bool>& positive) {
    std::size_t pos = 0;
    for (bool p : positive) pos += p ? 1 : 0;
    const std::size_t neg = positive.size() - pos;
    if (pos == 0 || neg == 0) return -1.0;

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    double area = 0.0;
    double tp = 0.0, fp = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        double dtp = 0.0, dfp = 0.0;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) {
            if (positive[order[j]]) {
                dtp += 1.0;
            } else {
                dfp += 1.0;
            }
            ++j;
        }
        area += dfp * (tp + 0.5 * dtp);
        tp += dtp;
        fp += dfp;
        i = j;
    }
    return area / (static_cast<double>(pos) * static_cast<double>(neg));
}

struct PerClass {
    std::size_t tp = 0, fp = 0, fn = 0, truth_count = 0;
};

ClassificationMetrics prf_from_labels(const std::vector<int>& pred, const std::vector<int>& truth,
                                      std::size_t classes) {
    if (pred.size() != truth.size()) {
        throw ContractError("classification_metrics: prediction/truth length mismatch");
    }
    if (pred.empty()) throw DataError("classification_metrics: no records");
    if (classes < 2) throw ConfigError("classification_metrics: need at least 2 classes");

    std::vector<PerClass> stats(classes);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (pred[i] < 0 || truth[i] < 0 || static_cast<std::size_t>(pred[i]) >= classes ||
            static_cast<std::size_t>(truth[i]) >= classes) {
            throw DataError("classification_metrics: label outside [0, classes)");
        }
        ++stats[truth[i]].truth_count;
        if (pred[i] == truth[i]) {
            ++correct;
            ++stats[truth[i]].tp;
        } else {
            ++stats[pred[i]].fp;
            ++stats[truth[i]].fn;
        }
    }

    ClassificationMetrics out;
    out.acc = static_cast<double>(correct) / static_cast<double>(pred.size());

    auto prf = [&](const PerClass& s) {
        const double p = s.tp + s.fp == 0 ? 0.0
                                          : static_cast<double>(s.tp) /
                                                static_cast<double>(s.tp + s.fp);
        const double r = s.tp + s.fn == 0 ? 0.0
                                          : static_cast<double>(s.tp) /
                                                static_cast<double>(s.tp + s.fn);
        const double f = p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
        return std::array<double, 3>{p, r, f};
    };

    if (classes == 2) {
        // Binary convention: metrics of the positive class.
        const auto [p, r, f] = prf(stats[1]);
        out.precision = p;
        out.recall = r;
        out.f1 = f;
        for (const PerClass& s : stats) out.classes_skipped += s.truth_count == 0 ? 1 : 0;
    } else {
        std::size_t present = 0;
        for (const PerClass& s : stats) {
            if (s.truth_count == 0) {
                ++out.classes_skipped;
                continue;
            }
            ++present;
            const auto [p, r, f] = prf(s);
            out.precision += p;
            out.recall += r;
            out.f1 += f;
        }
        if (present == 0) throw DataError("classification_metrics: no classes present in truth");
        out.precision /= static_cast<double>(present);
        out.recall /= static_cast<double>(present);
        out.f1 /= static_cast<double>(present);
    }
    return out;
}

} // namespace

RegressionMetrics regression_metrics(const std::vector<double>& pred,
                                     const std::vector<double>& truth) {
    if (pred.size() != truth.size()) {
        throw ContractError("regression_metrics: prediction/truth length mismatch");
    }
    if (pred.empty()) throw DataError("regression_metrics: no records");
    double sq = 0.0, ab = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double r = pred[i] - truth[i];
        sq += r * r;
        ab += std::abs(r);
    }
    const double n = static_cast<double>(pred.size());
    return {std::sqrt(sq / n), ab / n};
}

ClassificationMetrics classification_metrics(const std::vector<int>& pred_labels,
                                             const std::vector<int>& truth, std::size_t classes) {
    return prf_from_labels(pred_labels, truth, classes);
}

ClassificationMetrics classification_metrics(const std::vector<std::vector<double>>& scores,
                                             const std::vector<int>& truth, std::size_t classes) {
    if (scores.size() != truth.size()) {
        throw ContractError("classification_metrics: scores/truth length mismatch");
    }
    std::vector<int> labels(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (scores[i].size() != classes) {
            throw ContractError("classification_metrics: score row width != classes");
        }
        labels[i] = static_cast<int>(std::max_element(scores[i].begin(), scores[i].end()) -
                                     scores[i].begin());
    }
    ClassificationMetrics out = prf_from_labels(labels, truth, classes);

    double auc_acc = 0.0;
    std::size_t auc_classes = 0;
    for (std::size_t c = 0; c < classes; ++c) {
        std::vector<double> score_c(scores.size());
        std::vector<bool> positive(scores.size());
        for (std::size_t i = 0; i < scores.size(); ++i) {
            score_c[i] = scores[i][c];
            positive[i] = truth[i] == static_cast<int>(c);
        }
        const double auc = roc_auc(score_c, positive);
        if (auc >= 0.0) {
            auc_acc += auc;
            ++auc_classes;
        }
    }
    if (auc_classes > 0) {
        out.auc = auc_acc / static_cast<double>(auc_classes);
        out.has_auc = true;
    }
    return out;
}

IcMetrics information_coefficients(const GroupedPredictions& data) {
    std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> groups;
    for (const auto& rec : data.records) {
        groups[rec.group].first.push_back(rec.predicted);
        groups[rec.group].second.push_back(rec.actual);
    }
    if (groups.size() < 2) throw DataError("information_coefficients: need at least 2 groups");

    IcMetrics out;
    std::vector<double> ics, rank_ics;
    for (const auto& [key, series] : groups) {
        const auto& [pred, actual] = series;
        if (pred.size() < 2) {
            throw DataError("information_coefficients: group '" + key + "' has fewer than 2 records");
        }
        bool degenerate = false;
        const double ic = pearson(pred, actual, degenerate);
        if (degenerate) {
            ++out.groups_skipped;
            continue;
        }
        bool rank_degenerate = false;
        const double rank_ic = pearson(ranks(pred), ranks(actual), rank_degenerate);
        ics.push_back(ic);
        rank_ics.push_back(rank_degenerate ? 0.0 : rank_ic);
    }
    if (ics.empty()) throw DataError("information_coefficients: every group was degenerate");

    const MeanStd ic_stats = mean_population_std(ics);
    const MeanStd rank_stats = mean_population_std(rank_ics);
    out.ic = ic_stats.mean;
    out.rank_ic = rank_stats.mean;
    out.icir = ic_stats.stddev == 0.0 ? std::numeric_limits<double>::quiet_NaN()
                                      : ic_stats.mean / ic_stats.stddev;
    out.rank_icir = rank_stats.stddev == 0.0 ? std::numeric_limits<double>::quiet_NaN()
                                             : rank_stats.mean / rank_stats.stddev;
    return out;
}

double ir(double ic, double breadth) {
    if (breadth < 0.0) throw ConfigError("ir: breadth must be non-negative");
    return ic * std::sqrt(breadth);
}

} // namespace adarnn

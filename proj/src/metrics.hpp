#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "errors.hpp"

namespace adarnn {

struct RegressionMetrics {
    double rmse = 0.0;
    double mae = 0.0;
};

RegressionMetrics regression_metrics(const std::vector<double>& pred,
                                     const std::vector<double>& truth);

struct ClassificationMetrics {
    double acc = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double auc = 0.0;
    bool has_auc = false;
    std::size_t classes_skipped = 0; // absent from truth, excluded from macros
};

// Binary problems report the positive-class precision/recall/F1; larger
// class counts macro-average over the classes present in the truth. AUC
// is the macro one-vs-rest trapezoidal area and needs score rows.
ClassificationMetrics classification_metrics(const std::vector<std::vector<double>>& scores,
                                             const std::vector<int>& truth, std::size_t classes);
ClassificationMetrics classification_metrics(const std::vector<int>& pred_labels,
                                             const std::vector<int>& truth, std::size_t classes);

// Predictions grouped by evaluation date (or any other key).
struct GroupedPredictions {
    struct Record {
        std::string group;
        double predicted;
        double actual;
    };
    std::vector<Record> records;
};

struct IcMetrics {
    double ic = 0.0;
    double rank_ic = 0.0;
    double icir = 0.0;
    double rank_icir = 0.0;
    std::size_t groups_skipped = 0; // zero-variance groups
};

// Per-group Pearson (IC) and Spearman (RankIC) correlations between
// predictions and outcomes; the reported values are means over groups and
// the IR variants divide by the population standard deviation.
IcMetrics information_coefficients(const GroupedPredictions& data);

// The breadth-based information ratio IC * sqrt(BR).
double ir(double ic, double breadth);

} // namespace adarnn

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "metrics.hpp"
#include "rng.hpp"

using namespace adarnn;

TEST_CASE("regression metrics hand cases") {
    std::vector<double> truth{1.0, 2.0, 3.0};
    RegressionMetrics exact = regression_metrics(truth, truth);
    CHECK(exact.rmse == 0.0);
    CHECK(exact.mae == 0.0);

    std::vector<double> plus_one{2.0, 3.0, 4.0};
    RegressionMetrics unit = regression_metrics(plus_one, truth);
    CHECK(unit.rmse == doctest::Approx(1.0));
    CHECK(unit.mae == doctest::Approx(1.0));

    std::vector<double> spread{1.0, 5.0, 7.0}; // residuals 0, 3, 4
    RegressionMetrics mixed = regression_metrics(spread, truth);
    CHECK(mixed.rmse == doctest::Approx(std::sqrt(25.0 / 3.0)).epsilon(1e-12));
    CHECK(mixed.rmse == doctest::Approx(2.8868).epsilon(1e-4));
    CHECK(mixed.mae == doctest::Approx(7.0 / 3.0).epsilon(1e-12));

    CHECK_THROWS_AS(regression_metrics({1.0}, truth), ContractError);
}

TEST_CASE("rmse dominates mae on random residuals") {
    Rng rng(5);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> pred(17), truth(17);
        for (std::size_t i = 0; i < pred.size(); ++i) {
            pred[i] = rng.uniform(-3, 3);
            truth[i] = rng.uniform(-3, 3);
        }
        RegressionMetrics m = regression_metrics(pred, truth);
        CHECK(m.rmse >= m.mae);
        CHECK(m.mae >= 0.0);
    }
}

TEST_CASE("classification metrics hand cases") {
    std::vector<int> truth{0, 1, 2, 0, 1, 2};
    ClassificationMetrics perfect = classification_metrics(truth, truth, 3);
    CHECK(perfect.acc == 1.0);
    CHECK(perfect.precision == 1.0);
    CHECK(perfect.recall == 1.0);
    CHECK(perfect.f1 == 1.0);

    // Binary: one true positive and one false positive, nothing else.
    std::vector<int> pred{1, 1};
    std::vector<int> binary_truth{1, 0};
    ClassificationMetrics bin = classification_metrics(pred, binary_truth, 2);
    CHECK(bin.acc == doctest::Approx(0.5));
    CHECK(bin.precision == doctest::Approx(0.5));
    CHECK(bin.recall == doctest::Approx(1.0));
    CHECK(bin.f1 == doctest::Approx(2.0 / 3.0));

    // Chance-level scores give AUC 0.5 for every class.
    std::vector<std::vector<double>> flat(6, std::vector<double>(3, 1.0 / 3.0));
    ClassificationMetrics chance = classification_metrics(flat, truth, 3);
    CHECK(chance.has_auc);
    CHECK(chance.auc == doctest::Approx(0.5));
}

TEST_CASE("classes absent from the truth are excluded with a count") {
    std::vector<int> truth{0, 1, 0, 1};
    std::vector<int> pred{0, 1, 1, 2};
    ClassificationMetrics m = classification_metrics(pred, truth, 3);
    CHECK(m.classes_skipped == 1);
    // Macro over classes 0 and 1 only: P0 = 1, R0 = 1/2; P1 = 1/2, R1 = 1/2.
    CHECK(m.precision == doctest::Approx(0.75));
    CHECK(m.recall == doctest::Approx(0.5));
}

TEST_CASE("classification metrics stay in the unit interval") {
    Rng rng(7);
    for (int rep = 0; rep < 10; ++rep) {
        const std::size_t n = 30;
        const std::size_t classes = 3;
        std::vector<std::vector<double>> scores(n, std::vector<double>(classes));
        std::vector<int> truth(n);
        for (std::size_t i = 0; i < n; ++i) {
            double total = 0.0;
            for (double& s : scores[i]) {
                s = rng.uniform(0.01, 1.0);
                total += s;
            }
            for (double& s : scores[i]) s /= total;
            truth[i] = static_cast<int>(rng.below(classes));
        }
        ClassificationMetrics m = classification_metrics(scores, truth, classes);
        for (double v : {m.acc, m.precision, m.recall, m.f1, m.auc}) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
}

TEST_CASE("information coefficients hand cases") {
    GroupedPredictions affine;
    for (int g = 0; g < 3; ++g) {
        for (int i = 0; i < 4; ++i) {
            const double actual = static_cast<double>(i) + g;
            affine.records.push_back({"g" + std::to_string(g), 2.0 * actual + 3.0, actual});
        }
    }
    IcMetrics ic = information_coefficients(affine);
    CHECK(ic.ic == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(ic.rank_ic == doctest::Approx(1.0));

    GroupedPredictions reversed;
    for (int g = 0; g < 2; ++g) {
        for (int i = 0; i < 5; ++i) {
            const double actual = static_cast<double>(i);
            reversed.records.push_back({"g" + std::to_string(g), -actual * actual * actual, actual});
        }
    }
    CHECK(information_coefficients(reversed).rank_ic == doctest::Approx(-1.0));
}

TEST_CASE("icir is the mean over the population std of group ics") {
    // Groups constructed to have Pearson correlations exactly 0.2 and 0.4:
    // pred = a + c * b with a = (-1,0,1), b = (1,-2,1) orthogonal to a,
    // giving corr = sqrt(2) / sqrt(2 + 6 c^2).
    auto group_with_corr = [](const std::string& name, double c, GroupedPredictions& out) {
        const double a[3] = {-1.0, 0.0, 1.0};
        const double b[3] = {1.0, -2.0, 1.0};
        for (int i = 0; i < 3; ++i) {
            out.records.push_back({name, a[i] + c * b[i], a[i]});
        }
    };
    GroupedPredictions data;
    group_with_corr("g1", std::sqrt(8.0), data);   // corr 0.2
    group_with_corr("g2", std::sqrt(1.75), data);  // corr 0.4
    IcMetrics m = information_coefficients(data);
    CHECK(m.ic == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(m.icir == doctest::Approx(3.0).epsilon(1e-9));
}

TEST_CASE("rank ic survives monotone transforms of the predictions") {
    Rng rng(11);
    GroupedPredictions base;
    for (int g = 0; g < 3; ++g) {
        for (int i = 0; i < 8; ++i) {
            base.records.push_back(
                {"g" + std::to_string(g), rng.uniform(-2, 2), rng.uniform(-2, 2)});
        }
    }
    const double reference = information_coefficients(base).rank_ic;
    auto transformed = [&](auto&& fn) {
        GroupedPredictions t = base;
        for (auto& rec : t.records) rec.predicted = fn(rec.predicted);
        return information_coefficients(t).rank_ic;
    };
    CHECK(transformed([](double x) { return x * x * x; }) == doctest::Approx(reference));
    CHECK(transformed([](double x) { return std::exp(x); }) == doctest::Approx(reference));
    CHECK(transformed([](double x) { return 2.0 * x + 1.0; }) == doctest::Approx(reference));
}

TEST_CASE("degenerate groups are skipped and counted") {
    GroupedPredictions data;
    for (int i = 0; i < 4; ++i) data.records.push_back({"flat", 1.0, static_cast<double>(i)});
    for (int i = 0; i < 4; ++i) {
        data.records.push_back({"ok", static_cast<double>(i), static_cast<double>(2 * i + 1)});
    }
    IcMetrics m = information_coefficients(data);
    CHECK(m.groups_skipped == 1);
    CHECK(m.ic == doctest::Approx(1.0).epsilon(1e-6));

    GroupedPredictions tiny;
    tiny.records.push_back({"a", 1.0, 2.0});
    tiny.records.push_back({"b", 1.0, 2.0});
    tiny.records.push_back({"b", 2.0, 3.0});
    CHECK_THROWS_AS(information_coefficients(tiny), DataError);
}

TEST_CASE("breadth-based information ratio") {
    CHECK(ir(0.05, 100.0) == doctest::Approx(0.5));
    CHECK(ir(0.0, 50.0) == 0.0);
    CHECK_THROWS_AS(ir(0.1, -1.0), ConfigError);
}

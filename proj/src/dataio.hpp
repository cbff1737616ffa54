#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "errors.hpp"
#include "gru.hpp"

namespace adarnn {

struct CsvSchema {
    std::string time_col;
    std::string target_col;
    // Empty means every column except time and target, in header order.
    std::vector<std::string> feature_cols;
};

// A parsed series: feature columns first, the target column last,
// column-major storage with NaN as the missing marker. The time column is
// kept only to validate ordering and report positions.
struct RawTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> values; // per column
    std::vector<std::int64_t> time;

    std::size_t rows() const { return time.size(); }
    std::size_t feature_count() const { return columns.size() - 1; }
    std::size_t target_index() const { return columns.size() - 1; }
};

// Comma-separated, UTF-8, one header line. Empty cells become missing
// markers; non-numeric non-empty cells are format errors with their
// position. The time column may hold integers or ISO-8601 timestamps and
// must be strictly increasing.
RawTable load_csv(const std::string& path, const CsvSchema& schema);

// Replaces missing entries with the column mean over present values.
void fill_missing(RawTable& table);

struct NormStats {
    std::vector<double> min, max; // per column of the table
};

// Stats over rows [0, fit_rows) only, so values outside the fitted range
// may leave [0, 1].
NormStats fit_minmax(const RawTable& table, std::size_t fit_rows);
void apply_minmax(RawTable& table, const NormStats& stats);

struct WindowSpec {
    std::size_t window = 24;  // m
    std::size_t horizon = 1;  // r
    std::size_t stride = 1;   // s
    Task task = Task::kRegression;
};

// Sliding-window segments; origins index the raw rows.
struct Dataset {
    Task task = Task::kRegression;
    std::size_t p = 0;
    std::size_t window = 0;
    std::size_t horizon = 0;
    std::size_t classes = 0; // classification only
    std::vector<std::size_t> origins;
    std::vector<double> x; // [n][window][p]
    std::vector<double> y; // [n][horizon] targets, or [n] class labels

    std::size_t size() const { return origins.size(); }
    const double* segment(std::size_t i) const { return x.data() + i * window * p; }
};

// Segment i covers rows [origin, origin + m). Regression targets are the
// next r target-column values; classification predicts the class at the
// next step (horizon must be 1, labels small non-negative integers).
Dataset make_windows(const RawTable& table, const WindowSpec& spec);

struct ChronoSplit {
    std::size_t train_end = 0;
    std::size_t valid_end = 0;
};

// Contiguous chronological partition by segment order; sizes floor to the
// ratios with the remainder going to the training part.
ChronoSplit chrono_split(const Dataset& dataset, const std::array<double, 3>& ratios);

// The same partition arithmetic on a bare count, usable before windowing.
ChronoSplit chrono_sizes(std::size_t count, const std::array<double, 3>& ratios);

// Number of windows a table of `rows` rows yields under the spec.
std::size_t window_count(std::size_t rows, const WindowSpec& spec);

// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

} // namespace adarnn

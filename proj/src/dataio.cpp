#include "dataio.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace adarnn {
namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string::npos) {
            cells.push_back(trim(line.substr(start)));
            break;
        }
        cells.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
    return cells;
}

bool parse_double(const std::string& cell, double& out) {
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc{} && ptr == end;
}

// Days since 1970-01-01 for a civil date (Howard Hinnant's algorithm).
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

bool parse_fixed_uint(const std::string& s, std::size_t pos, std::size_t len, unsigned& out) {
    if (pos + len > s.size()) return false;
    out = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
        if (s[i] < '0' || s[i] > '9') return false;
        out = out * 10 + static_cast<unsigned>(s[i] - '0');
    }
    return true;
}

// Integer, or ISO-8601 "YYYY-MM-DD[( |T)HH:MM[:SS]]" mapped to epoch seconds.
bool parse_time(const std::string& cell, std::int64_t& out) {
    {
        std::int64_t v = 0;
        const char* begin = cell.data();
        const char* end = begin + cell.size();
        auto [ptr, ec] = std::from_chars(begin, end, v);
        if (ec == std::errc{} && ptr == end) {
            out = v;
            return true;
        }
    }
    unsigned year, month, day;
    if (!parse_fixed_uint(cell, 0, 4, year) || cell.size() < 10 || cell[4] != '-' ||
        !parse_fixed_uint(cell, 5, 2, month) || cell[7] != '-' ||
        !parse_fixed_uint(cell, 8, 2, day)) {
        return false;
    }
    if (month < 1 || month > 12 || day < 1 || day > 31) return false;
    std::int64_t seconds = days_from_civil(year, month, day) * 86400;
    if (cell.size() == 10) {
        out = seconds;
        return true;
    }
    if (cell[10] != ' ' && cell[10] != 'T') return false;
    unsigned hh, mm, ss = 0;
    if (!parse_fixed_uint(cell, 11, 2, hh) || cell.size() < 16 || cell[13] != ':' ||
        !parse_fixed_uint(cell, 14, 2, mm)) {
        return false;
    }
    if (cell.size() > 16) {
        if (cell[16] != ':' || !parse_fixed_uint(cell, 17, 2, ss) || cell.size() != 19) return false;
    } else if (cell.size() != 16) {
        return false;
    }
    if (hh > 23 || mm > 59 || ss > 60) return false;
    out = seconds + hh * 3600 + mm * 60 + ss;
    return true;
}

[[noreturn]] void cell_error(const std::string& what, std::size_t row, const std::string& col) {
    std::ostringstream os;
    os << what << " at data row " << row + 1 << ", column '" << col << "'";
    throw FormatError(os.str());
}

} // namespace

RawTable load_csv(const std::string& path, const CsvSchema& schema) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw FormatError("'" + path + "': empty file");
    const std::vector<std::string> header = split_line(line);

    auto column_index = [&](const std::string& name) {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) {
            throw FormatError("'" + path + "': header is missing column '" + name + "'");
        }
        return static_cast<std::size_t>(it - header.begin());
    };

    const std::size_t time_idx = column_index(schema.time_col);
    const std::size_t target_idx = column_index(schema.target_col);
    if (time_idx == target_idx) throw ConfigError("time and target columns must differ");

    std::vector<std::size_t> feature_idx;
    if (schema.feature_cols.empty()) {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (i != time_idx && i != target_idx) feature_idx.push_back(i);
        }
    } else {
        for (const std::string& name : schema.feature_cols) {
            const std::size_t idx = column_index(name);
            if (idx == time_idx) throw ConfigError("feature list must not include the time column");
            feature_idx.push_back(idx);
        }
    }
    if (feature_idx.empty()) throw ConfigError("'" + path + "': no feature columns");

    RawTable table;
    for (std::size_t idx : feature_idx) table.columns.push_back(header[idx]);
    table.columns.push_back(header[target_idx]);
    table.values.resize(table.columns.size());

    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty() && in.eof()) break;
        const std::vector<std::string> cells = split_line(line);
        if (cells.size() != header.size()) {
            cell_error("wrong cell count", row, header.empty() ? "?" : header[0]);
        }
        std::int64_t t = 0;
        if (!parse_time(cells[time_idx], t)) cell_error("unparseable time", row, schema.time_col);
        if (!table.time.empty() && t <= table.time.back()) {
            cell_error("time not strictly increasing", row, schema.time_col);
        }
        table.time.push_back(t);

        auto read_cell = [&](std::size_t idx, std::size_t out_col) {
            const std::string& cell = cells[idx];
            if (cell.empty()) {
                table.values[out_col].push_back(std::numeric_limits<double>::quiet_NaN());
                return;
            }
            double v = 0.0;
            if (!parse_double(cell, v)) cell_error("unparseable number", row, header[idx]);
            table.values[out_col].push_back(v);
        };
        for (std::size_t j = 0; j < feature_idx.size(); ++j) read_cell(feature_idx[j], j);
        read_cell(target_idx, table.columns.size() - 1);
        ++row;
    }
    if (table.rows() == 0) throw DataError("'" + path + "': no data rows");
    return table;
}

void fill_missing(RawTable& table) {
    for (std::size_t c = 0; c < table.values.size(); ++c) {
        auto& col = table.values[c];
        double acc = 0.0;
        std::size_t present = 0;
        for (double v : col) {
            if (!std::isnan(v)) {
                acc += v;
                ++present;
            }
        }
        if (present == 0) {
            throw DataError("column '" + table.columns[c] + "' has no present values");
        }
        const double mean = acc / static_cast<double>(present);
        for (double& v : col) {
            if (std::isnan(v)) v = mean;
        }
    }
}

NormStats fit_minmax(const RawTable& table, std::size_t fit_rows) {
    if (fit_rows == 0 || fit_rows > table.rows()) {
        throw ContractError("fit_minmax: fit range must be non-empty and inside the table");
    }
    NormStats stats;
    for (const auto& col : table.values) {
        double lo = col[0], hi = col[0];
        for (std::size_t r = 1; r < fit_rows; ++r) {
            lo = std::min(lo, col[r]);
            hi = std::max(hi, col[r]);
        }
        stats.min.push_back(lo);
        stats.max.push_back(hi);
    }
    return stats;
}

void apply_minmax(RawTable& table, const NormStats& stats) {
    if (stats.min.size() != table.values.size()) {
        throw ContractError("apply_minmax: stats do not match the table");
    }
    for (std::size_t c = 0; c < table.values.size(); ++c) {
        const double lo = stats.min[c];
        const double range = stats.max[c] - stats.min[c];
        for (double& v : table.values[c]) {
            v = range == 0.0 ? 0.0 : (v - lo) / range;
        }
    }
}

Dataset make_windows(const RawTable& table, const WindowSpec& spec) {
    if (spec.window < 1 || spec.stride < 1) {
        throw ConfigError("make_windows: window and stride must be at least 1");
    }
    if (spec.horizon < 1) throw ConfigError("make_windows: horizon must be at least 1");
    if (spec.task == Task::kClassification && spec.horizon != 1) {
        throw ConfigError("make_windows: classification predicts a single next step");
    }
    const std::size_t rows = table.rows();
    if (rows < spec.window + spec.horizon) {
        throw DataError("make_windows: table shorter than window + horizon");
    }

    Dataset data;
    data.task = spec.task;
    data.p = table.feature_count();
    data.window = spec.window;
    data.horizon = spec.horizon;
    const std::size_t count = (rows - spec.window - spec.horizon) / spec.stride + 1;
    data.origins.reserve(count);
    data.x.reserve(count * spec.window * data.p);
    const auto& target = table.values[table.target_index()];

    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t origin = i * spec.stride;
        data.origins.push_back(origin);
        for (std::size_t t = 0; t < spec.window; ++t) {
            for (std::size_t j = 0; j < data.p; ++j) {
                data.x.push_back(table.values[j][origin + t]);
            }
        }
        if (spec.task == Task::kRegression) {
            for (std::size_t h = 0; h < spec.horizon; ++h) {
                data.y.push_back(target[origin + spec.window + h]);
            }
        } else {
            const double label = target[origin + spec.window];
            const double rounded = std::round(label);
            if (std::abs(label - rounded) > 1e-9 || rounded < 0.0 || rounded > 1e6) {
                throw DataError("make_windows: class labels must be small non-negative integers");
            }
            data.y.push_back(rounded);
        }
    }
    if (spec.task == Task::kClassification) {
        double top = 0.0;
        for (double v : data.y) top = std::max(top, v);
        data.classes = static_cast<std::size_t>(top) + 1;
    }
    return data;
}

ChronoSplit chrono_sizes(std::size_t count, const std::array<double, 3>& ratios) {
    double total = 0.0;
    for (double r : ratios) {
        if (r < 0.0) throw ConfigError("chrono_split: ratios must be non-negative");
        total += r;
    }
    if (std::abs(total - 1.0) > 1e-9) throw ConfigError("chrono_split: ratios must sum to 1");

    const std::size_t valid = static_cast<std::size_t>(ratios[1] * static_cast<double>(count));
    const std::size_t test = static_cast<std::size_t>(ratios[2] * static_cast<double>(count));
    if (valid + test >= count) throw DataError("chrono_split: empty training partition");
    const std::size_t train = count - valid - test; // remainder goes to train
    if (valid == 0 || test == 0) throw DataError("chrono_split: empty partition");

    ChronoSplit split;
    split.train_end = train;
    split.valid_end = train + valid;
    return split;
}

ChronoSplit chrono_split(const Dataset& dataset, const std::array<double, 3>& ratios) {
    return chrono_sizes(dataset.size(), ratios);
}

std::size_t window_count(std::size_t rows, const WindowSpec& spec) {
    if (rows < spec.window + spec.horizon) {
        throw DataError("window_count: table shorter than window + horizon");
    }
    return (rows - spec.window - spec.horizon) / spec.stride + 1;
}

std::string format_double(double v) {
    std::array<char, 32> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    (void)ec;
    return std::string(buf.data(), ptr);
}

} // namespace adarnn

#include "synth.hpp"

#include <fstream>

#include <json.hpp>

#include "rng.hpp"

namespace adarnn {

SynthResult synth_tcs_generate(const SynthSpec& spec) {
    if (spec.regimes < 2) throw ConfigError("synth: need at least 2 regimes");
    if (spec.steps_per_regime < 1 || spec.features < 1) {
        throw ConfigError("synth: steps per regime and features must be at least 1");
    }
    const std::size_t p = spec.features;
    const std::size_t total = spec.regimes * spec.steps_per_regime;
    Rng rng(spec.seed);

    // One global target map across all regimes, centered so the regime
    // mean offsets cancel out of the target: the feature marginals shift
    // while the predictable part of y stays level-free.
    std::vector<double> w(p);
    double w_mean = 0.0;
    for (double& v : w) {
        v = rng.uniform(0.3, 1.0);
        w_mean += v;
    }
    w_mean /= static_cast<double>(p);
    for (double& v : w) v -= w_mean;

    // Stable VAR(1) transition: 0.5 on the diagonal, the rest spread evenly.
    const double off = p > 1 ? 0.1 / static_cast<double>(p - 1) : 0.1;
    auto transition = [&](const std::vector<double>& dev, std::size_t i) {
        double acc = 0.5 * dev[i];
        for (std::size_t j = 0; j < p; ++j) {
            if (j != i) acc += off * dev[j];
        }
        return acc;
    };

    SynthResult out;
    out.spec = spec;
    out.table.columns.reserve(p + 1);
    for (std::size_t j = 0; j < p; ++j) out.table.columns.push_back("f" + std::to_string(j));
    out.table.columns.push_back("y");
    out.table.values.assign(p + 1, {});
    for (auto& col : out.table.values) col.reserve(total);
    out.table.time.reserve(total);

    std::vector<double> x(p, 0.0), prev_dev(p, 0.0);
    bool first = true;
    for (std::size_t k = 0; k < spec.regimes; ++k) {
        const double mean = static_cast<double>(k) * spec.delta;
        const double sigma = 1.0 + 0.1 * spec.delta * static_cast<double>(k);
        if (k > 0) out.change_rows.push_back(k * spec.steps_per_regime);
        for (std::size_t step = 0; step < spec.steps_per_regime; ++step) {
            for (std::size_t i = 0; i < p; ++i) {
                const double drift = first ? 0.0 : transition(prev_dev, i);
                x[i] = mean + drift + sigma * rng.normal();
            }
            first = false;
            for (std::size_t i = 0; i < p; ++i) prev_dev[i] = x[i] - mean;

            double y = 0.1 * rng.normal();
            for (std::size_t i = 0; i < p; ++i) y += w[i] * x[i];

            out.table.time.push_back(static_cast<std::int64_t>(out.table.time.size()));
            for (std::size_t i = 0; i < p; ++i) out.table.values[i].push_back(x[i]);
            out.table.values[p].push_back(y);
        }
    }
    return out;
}

void write_synth_csv(const SynthResult& synth, const std::string& path) {
    std::ofstream outfile(path);
    if (!outfile) throw DataError("cannot write '" + path + "'");
    outfile << "time";
    for (const std::string& col : synth.table.columns) outfile << "," << col;
    outfile << "\n";
    for (std::size_t r = 0; r < synth.table.rows(); ++r) {
        outfile << synth.table.time[r];
        for (const auto& col : synth.table.values) outfile << "," << format_double(col[r]);
        outfile << "\n";
    }
    if (!outfile) throw DataError("short write to '" + path + "'");
}

std::string synth_truth_json(const SynthResult& synth) {
    nlohmann::json doc;
    doc["regimes"] = synth.spec.regimes;
    doc["steps_per_regime"] = synth.spec.steps_per_regime;
    doc["features"] = synth.spec.features;
    doc["delta"] = synth.spec.delta;
    doc["seed"] = synth.spec.seed;
    doc["change_rows"] = synth.change_rows;
    return doc.dump();
}

} // namespace adarnn

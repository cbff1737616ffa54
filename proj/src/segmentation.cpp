#include "segmentation.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <sstream>

#include <json.hpp>

namespace adarnn {
namespace {

using Json = nlohmann::json;

Tensor range_samples(const Tensor& features, std::size_t begin, std::size_t end,
                     std::size_t max_samples) {
    const std::size_t len = end - begin;
    const std::size_t p = features.cols();
    if (max_samples == 0 || len <= max_samples) {
        std::vector<double> data(features.values().begin() + begin * p,
                                 features.values().begin() + end * p);
        return Tensor::from_data(len, p, std::move(data));
    }
    // Even deterministic stride over the range.
    std::vector<double> data(max_samples * p);
    for (std::size_t t = 0; t < max_samples; ++t) {
        const std::size_t row = begin + (t * len) / max_samples;
        for (std::size_t j = 0; j < p; ++j) data[t * p + j] = features.at(row, j);
    }
    return Tensor::from_data(max_samples, p, std::move(data));
}

// Shared evaluation state for one splitting run: distances between unit
// ranges recur many times across candidate boundary sets.
class ObjectiveEvaluator {
public:
    ObjectiveEvaluator(const Tensor& features, const UnitPartition& units,
                       const SegmentationOptions& opts)
        : features_(features), units_(units), opts_(opts) {}

    // Mean pairwise distance over the periods described by the sorted
    // interior unit boundaries.
    double objective(const std::vector<std::size_t>& interior) {
        std::vector<std::size_t> cuts;
        cuts.reserve(interior.size() + 2);
        cuts.push_back(0);
        cuts.insert(cuts.end(), interior.begin(), interior.end());
        cuts.push_back(units_.units());
        const std::size_t k = cuts.size() - 1;
        if (k < 2) return 0.0;
        double acc = 0.0;
        std::size_t pairs = 0;
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
            for (std::size_t j = i + 1; j + 1 < cuts.size(); ++j) {
                acc += pair_distance(cuts[i], cuts[i + 1], cuts[j], cuts[j + 1]);
                ++pairs;
            }
        }
        return acc / static_cast<double>(pairs);
    }

private:
    double pair_distance(std::size_t a0, std::size_t a1, std::size_t b0, std::size_t b1) {
        const auto key = std::array<std::size_t, 4>{a0, a1, b0, b1};
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
        const double d =
            period_distance(features_, units_.boundaries[a0], units_.boundaries[a1],
                            units_.boundaries[b0], units_.boundaries[b1], opts_);
        cache_.emplace(key, d);
        return d;
    }

    const Tensor& features_;
    const UnitPartition& units_;
    const SegmentationOptions& opts_;
    std::map<std::array<std::size_t, 4>, double> cache_;
};

PeriodSplit finish_split(const UnitPartition& units, const std::vector<std::size_t>& interior,
                         double objective, const SegmentationOptions& opts) {
    PeriodSplit split;
    split.k = interior.size() + 1;
    split.boundaries.push_back(0);
    for (std::size_t u : interior) split.boundaries.push_back(units.boundaries[u]);
    split.boundaries.push_back(units.length());
    split.objective = objective;
    split.distance = opts.kind.name();
    split.validate(2);
    return split;
}

void check_k(std::size_t k, std::size_t n_units) {
    if (k < 2) throw ConfigError("split: k must be at least 2");
    if (k > n_units) {
        std::ostringstream os;
        os << "split: k = " << k << " is infeasible with " << n_units << " units";
        throw ConfigError(os.str());
    }
}

} // namespace

UnitPartition partition_units(std::size_t length, std::size_t n_units) {
    if (n_units < 1) throw ConfigError("partition_units: need at least one unit");
    if (length < n_units) {
        std::ostringstream os;
        os << "partition_units: series of length " << length << " is too short for " << n_units
           << " units";
        throw DataError(os.str());
    }
    const std::size_t base = length / n_units;
    const std::size_t remainder = length % n_units;
    UnitPartition part;
    part.boundaries.reserve(n_units + 1);
    part.boundaries.push_back(0);
    for (std::size_t u = 0; u < n_units; ++u) {
        part.boundaries.push_back(part.boundaries.back() + base + (u < remainder ? 1 : 0));
    }
    return part;
}

PeriodSplit PeriodSplit::trivial(std::size_t length) {
    PeriodSplit split;
    split.k = 1;
    split.boundaries = {0, length};
    split.distance = "none";
    return split;
}

void PeriodSplit::validate(std::size_t min_k) const {
    if (k < min_k) throw ConfigError("period split: too few periods");
    if (boundaries.size() != k + 1) throw ConfigError("period split: boundary count mismatch");
    if (boundaries.front() != 0) throw ConfigError("period split: first boundary must be 0");
    for (std::size_t i = 0; i + 1 < boundaries.size(); ++i) {
        if (boundaries[i] >= boundaries[i + 1]) {
            throw ConfigError("period split: boundaries must be strictly increasing");
        }
    }
}

std::string PeriodSplit::to_json() const {
    Json doc;
    doc["k"] = k;
    doc["boundaries"] = boundaries;
    doc["objective"] = objective;
    doc["distance"] = distance;
    return doc.dump();
}

PeriodSplit PeriodSplit::from_json(const std::string& text) {
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const Json::exception& e) {
        throw FormatError(std::string("period split: invalid JSON: ") + e.what());
    }
    PeriodSplit split;
    try {
        split.k = doc.at("k").get<std::size_t>();
        split.boundaries = doc.at("boundaries").get<std::vector<std::size_t>>();
        split.objective = doc.value("objective", 0.0);
        split.distance = doc.value("distance", "mmd");
    } catch (const Json::exception& e) {
        throw FormatError(std::string("period split: missing or mistyped field: ") + e.what());
    }
    split.validate(1);
    return split;
}

double period_distance(const Tensor& features, std::size_t a_begin, std::size_t a_end,
                       std::size_t b_begin, std::size_t b_end, const SegmentationOptions& opts) {
    if (a_begin >= a_end || b_begin >= b_end || a_end > features.rows() ||
        b_end > features.rows()) {
        throw ContractError("period_distance: invalid ranges");
    }
    if (std::max(a_begin, b_begin) < std::min(a_end, b_end)) {
        throw ContractError("period_distance: ranges overlap");
    }
    if (opts.kind.needs_discriminator()) {
        throw ConfigError(
            "period_distance: the adversarial distance needs training and cannot score splits; "
            "use cosine, mmd, mmd_linear or coral");
    }
    NoTape guard;
    Tensor a = range_samples(features, a_begin, a_end, opts.max_samples);
    Tensor b = range_samples(features, b_begin, b_end, opts.max_samples);
    return distance(opts.kind, a, b).item();
}

PeriodSplit greedy_split(const Tensor& features, const UnitPartition& units, std::size_t k,
                         const SegmentationOptions& opts) {
    check_k(k, units.units());
    ObjectiveEvaluator eval(features, units, opts);
    std::vector<std::size_t> chosen;
    double best_objective = 0.0;
    for (std::size_t step = 1; step < k; ++step) {
        bool found = false;
        std::size_t best_candidate = 0;
        best_objective = 0.0;
        for (std::size_t c = 1; c < units.units(); ++c) {
            if (std::find(chosen.begin(), chosen.end(), c) != chosen.end()) continue;
            std::vector<std::size_t> trial = chosen;
            trial.insert(std::upper_bound(trial.begin(), trial.end(), c), c);
            const double obj = eval.objective(trial);
            // Strict improvement keeps the earliest boundary on exact ties.
            if (!found || obj > best_objective) {
                found = true;
                best_candidate = c;
                best_objective = obj;
            }
        }
        chosen.insert(std::upper_bound(chosen.begin(), chosen.end(), best_candidate),
                      best_candidate);
    }
    return finish_split(units, chosen, best_objective, opts);
}

PeriodSplit brute_force_split(const Tensor& features, const UnitPartition& units, std::size_t k,
                              const SegmentationOptions& opts) {
    check_k(k, units.units());
    const std::size_t slots = units.units() - 1;
    const std::size_t picks = k - 1;
    double combos = 1.0;
    for (std::size_t i = 0; i < picks; ++i) {
        combos *= static_cast<double>(slots - i) / static_cast<double>(i + 1);
    }
    if (combos > 1e5) throw ConfigError("brute_force_split: combinatorial budget exceeded");

    ObjectiveEvaluator eval(features, units, opts);
    std::vector<std::size_t> current(picks);
    std::vector<std::size_t> best;
    double best_objective = 0.0;
    bool found = false;
    // Enumerates boundary sets in lexicographic order so that the first
    // maximum seen is also the earliest.
    auto recurse = [&](auto&& self, std::size_t depth, std::size_t next) -> void {
        if (depth == picks) {
            const double obj = eval.objective(current);
            if (!found || obj > best_objective) {
                found = true;
                best_objective = obj;
                best = current;
            }
            return;
        }
        for (std::size_t c = next; c <= slots - (picks - depth - 1); ++c) {
            current[depth] = c;
            self(self, depth + 1, c + 1);
        }
    };
    recurse(recurse, 0, 1);
    return finish_split(units, best, best_objective, opts);
}

SelectResult select_split(const Tensor& features, const UnitPartition& units,
                          std::vector<std::size_t> k_candidates, const SegmentationOptions& opts) {
    if (k_candidates.empty()) throw ConfigError("select_split: empty candidate set");
    std::sort(k_candidates.begin(), k_candidates.end());
    k_candidates.erase(std::unique(k_candidates.begin(), k_candidates.end()), k_candidates.end());
    for (std::size_t k : k_candidates) check_k(k, units.units());

    SelectResult result;
    bool found = false;
    for (std::size_t k : k_candidates) {
        PeriodSplit split = greedy_split(features, units, k, opts);
        result.candidates.emplace_back(k, split.objective);
        // Candidates ascend in k, so strict improvement prefers smaller k
        // (and the greedy tie-break already picked the earliest
        // boundaries within each k).
        if (!found || split.objective > result.best.objective) {
            found = true;
            result.best = std::move(split);
        }
    }
    return result;
}

} // namespace adarnn

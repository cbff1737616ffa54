#include "config.hpp"

#include <cmath>

#include <json.hpp>

#include "distances.hpp"
#include "gru.hpp"

namespace adarnn {
namespace {

using Json = nlohmann::json;

template <typename T>
void read_into(const Json& obj, const char* key, T& out) {
    const auto it = obj.find(key);
    if (it == obj.end()) return;
    try {
        out = it->get<T>();
    } catch (const Json::exception&) {
        throw ConfigError(std::string("config: field '") + key + "' has the wrong type");
    }
}

} // namespace

RunConfig RunConfig::from_json(const std::string& text) {
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config: top level must be an object");

    RunConfig cfg;
    if (doc.contains("data")) {
        const Json& d = doc["data"];
        read_into(d, "path", cfg.data.path);
        read_into(d, "time_col", cfg.data.time_col);
        read_into(d, "target_col", cfg.data.target_col);
        read_into(d, "features", cfg.data.features);
        read_into(d, "window", cfg.data.window);
        read_into(d, "horizon", cfg.data.horizon);
        read_into(d, "stride", cfg.data.stride);
        if (d.contains("ratios")) {
            std::vector<double> ratios;
            read_into(d, "ratios", ratios);
            if (ratios.size() != 3) throw ConfigError("config: ratios must have 3 entries");
            std::copy(ratios.begin(), ratios.end(), cfg.data.ratios.begin());
        }
    }
    if (doc.contains("tdc")) {
        const Json& t = doc["tdc"];
        read_into(t, "distance", cfg.tdc.distance);
        read_into(t, "units", cfg.tdc.units);
        read_into(t, "max_samples", cfg.tdc.max_samples);
        if (t.contains("k")) {
            if (t["k"].is_string()) {
                if (t["k"].get<std::string>() != "auto") {
                    throw ConfigError("config: tdc.k must be \"auto\" or an integer");
                }
                cfg.tdc.k = 0;
            } else {
                read_into(t, "k", cfg.tdc.k);
            }
        }
    }
    if (doc.contains("train")) {
        const Json& t = doc["train"];
        read_into(t, "task", cfg.train.task);
        read_into(t, "hidden", cfg.train.hidden);
        read_into(t, "layers", cfg.train.layers);
        read_into(t, "lambda", cfg.train.lambda);
        read_into(t, "lr", cfg.train.lr);
        read_into(t, "batch", cfg.train.batch);
        read_into(t, "epochs", cfg.train.epochs);
        read_into(t, "pretrain_epochs", cfg.train.pretrain_epochs);
        read_into(t, "seed", cfg.train.seed);
        read_into(t, "match_all_layers", cfg.train.match_all_layers);
        read_into(t, "share_alpha_layers", cfg.train.share_alpha_layers);
    }
    if (doc.contains("out")) {
        const Json& o = doc["out"];
        read_into(o, "model", cfg.out.model);
        read_into(o, "history", cfg.out.history);
        read_into(o, "split", cfg.out.split);
    }
    cfg.validate();
    return cfg;
}

void RunConfig::validate() const {
    DistanceKind::parse(tdc.distance);
    parse_task(train.task);
    if (data.window < 1 || data.horizon < 1 || data.stride < 1) {
        throw ConfigError("config: window, horizon and stride must be at least 1");
    }
    double total = 0.0;
    for (double r : data.ratios) {
        if (r < 0.0) throw ConfigError("config: ratios must be non-negative");
        total += r;
    }
    if (std::abs(total - 1.0) > 1e-9) throw ConfigError("config: ratios must sum to 1");
    if (tdc.units < 2) throw ConfigError("config: tdc.units must be at least 2");
    if (tdc.k > 1 && tdc.k > tdc.units) {
        throw ConfigError("config: tdc.k cannot exceed tdc.units");
    }
    if (train.hidden < 1 || train.layers < 1) {
        throw ConfigError("config: hidden and layers must be at least 1");
    }
    if (train.lambda < 0.0) throw ConfigError("config: lambda must be non-negative");
    if (train.lr <= 0.0) throw ConfigError("config: lr must be positive");
    if (train.batch < 2) throw ConfigError("config: batch must be at least 2");
    if (train.epochs < 1) throw ConfigError("config: epochs must be at least 1");
}

} // namespace adarnn

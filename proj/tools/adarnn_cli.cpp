// Command-line front end; talks to the library through the C API only.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "adarnn.h"

namespace {

using Json = nlohmann::json;

struct Session {
    ada_session* handle = ada_session_new();
    ~Session() { ada_session_free(handle); }
};

struct OwnedString {
    char* ptr = nullptr;
    ~OwnedString() { ada_string_free(ptr); }
    std::string str() const { return ptr == nullptr ? "" : ptr; }
};

int fail(const Session& session, int rc) {
    std::cerr << "error: " << ada_last_error(session.handle) << "\n";
    return rc;
}

std::optional<std::string> read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) return std::nullopt;
    std::ostringstream text;
    text << in.rdbuf();
    return text.str();
}

// Shared state for commands that take --config plus overriding flags.
struct ConfigArgs {
    std::string config_path;
    std::string distance;
    std::string k;
    std::uint64_t units = 0;
    double lambda = -1.0;
    double lr = 0.0;
    std::uint64_t batch = 0;
    std::uint64_t epochs = 0;
    std::int64_t pretrain_epochs = -1;
    std::uint64_t hidden = 0;
    std::uint64_t layers = 0;
    bool seed_set = false;
    std::uint64_t seed = 0;
    std::string model_out;
    std::string history_out;
    std::string split_out;

    void add_common(CLI::App* cmd) {
        cmd->add_option("--config", config_path, "run configuration JSON file")->required();
        cmd->add_option("--distance", distance, "distance kind (cosine|mmd|mmd_linear|coral|adv)");
        cmd->add_option("--k", k, "period count, or 'auto'");
        cmd->add_option("--units", units, "minimal units for characterization");
    }

    void add_train(CLI::App* cmd) {
        cmd->add_option("--lambda", lambda, "matching trade-off weight");
        cmd->add_option("--lr", lr, "learning rate");
        cmd->add_option("--batch", batch, "mini-batch size");
        cmd->add_option("--epochs", epochs, "training epochs");
        cmd->add_option("--pretrain-epochs", pretrain_epochs, "pre-training epochs");
        cmd->add_option("--hidden", hidden, "hidden state dimension");
        cmd->add_option("--layers", layers, "recurrent layers");
        cmd->add_option("--seed", seed, "random seed")->each([this](const std::string&) {
            seed_set = true;
        });
        cmd->add_option("--model", model_out, "model output path");
        cmd->add_option("--history", history_out, "history output path");
    }

    // Loads the config file and applies flag overrides; flags win.
    std::optional<std::string> merged() const {
        auto text = read_file(config_path);
        if (!text.has_value()) {
            std::cerr << "error: cannot open config '" << config_path << "'\n";
            return std::nullopt;
        }
        Json doc;
        try {
            doc = Json::parse(*text);
        } catch (const Json::exception& e) {
            std::cerr << "error: config is not valid JSON: " << e.what() << "\n";
            return std::nullopt;
        }
        if (!distance.empty()) doc["tdc"]["distance"] = distance;
        if (!k.empty()) {
            if (k == "auto") {
                doc["tdc"]["k"] = "auto";
            } else {
                try {
                    doc["tdc"]["k"] = std::stoull(k);
                } catch (const std::exception&) {
                    std::cerr << "error: --k expects an integer or 'auto'\n";
                    return std::nullopt;
                }
            }
        }
        if (units > 0) doc["tdc"]["units"] = units;
        if (lambda >= 0.0) doc["train"]["lambda"] = lambda;
        if (lr > 0.0) doc["train"]["lr"] = lr;
        if (batch > 0) doc["train"]["batch"] = batch;
        if (epochs > 0) doc["train"]["epochs"] = epochs;
        if (pretrain_epochs >= 0) doc["train"]["pretrain_epochs"] = pretrain_epochs;
        if (hidden > 0) doc["train"]["hidden"] = hidden;
        if (layers > 0) doc["train"]["layers"] = layers;
        if (seed_set) doc["train"]["seed"] = seed;
        if (!model_out.empty()) doc["out"]["model"] = model_out;
        if (!history_out.empty()) doc["out"]["history"] = history_out;
        if (!split_out.empty()) doc["out"]["split"] = split_out;
        return doc.dump();
    }
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"adaptive forecasting for non-stationary time series"};
    app.require_subcommand(1);

    ConfigArgs split_args;
    auto* cmd_split = app.add_subcommand("split", "characterize the training range into periods");
    split_args.add_common(cmd_split);
    cmd_split->add_option("--out", split_args.split_out, "split JSON output path");

    ConfigArgs train_args;
    std::string train_split_path;
    auto* cmd_train = app.add_subcommand("train", "train a distribution-matched model");
    train_args.add_common(cmd_train);
    train_args.add_train(cmd_train);
    cmd_train->add_option("--split", train_split_path, "use a previously computed split file");

    ConfigArgs predict_args;
    std::string model_path, predict_range = "test", predict_out, truth_out;
    auto* cmd_predict = app.add_subcommand("predict", "write predictions for a data range");
    cmd_predict->add_option("--config", predict_args.config_path, "run configuration JSON file")
        ->required();
    cmd_predict->add_option("--model", model_path, "trained model file")->required();
    cmd_predict->add_option("--range", predict_range, "train | valid | test | all");
    cmd_predict->add_option("--out", predict_out, "predictions CSV path (default: stdout)");
    cmd_predict->add_option("--truth-out", truth_out, "aligned truth CSV path");

    std::string eval_pred, eval_truth, eval_task = "regression";
    auto* cmd_evaluate = app.add_subcommand("evaluate", "metrics for aligned prediction files");
    cmd_evaluate->add_option("--pred", eval_pred, "predictions CSV")->required();
    cmd_evaluate->add_option("--truth", eval_truth, "truth CSV")->required();
    cmd_evaluate->add_option("--task", eval_task, "regression | classification");

    std::int64_t synth_regimes = 3, synth_steps = 1500, synth_features = 4;
    double synth_delta = 4.0;
    std::uint64_t synth_seed = 0;
    std::string synth_out = "synth.csv", synth_truth = "synth_truth.json";
    auto* cmd_synth = app.add_subcommand("synth", "generate a shifted synthetic series");
    cmd_synth->add_option("--regimes", synth_regimes, "number of regimes (>= 2)");
    cmd_synth->add_option("--steps", synth_steps, "steps per regime");
    cmd_synth->add_option("--features", synth_features, "feature count");
    cmd_synth->add_option("--delta", synth_delta, "mean shift per regime");
    cmd_synth->add_option("--seed", synth_seed, "random seed");
    cmd_synth->add_option("--out", synth_out, "CSV output path");
    cmd_synth->add_option("--truth", synth_truth, "ground-truth JSON output path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    Session session;

    if (cmd_split->parsed()) {
        auto config = split_args.merged();
        if (!config.has_value()) return 2;
        OwnedString split_json;
        const int rc = ada_split(session.handle, config->c_str(), &split_json.ptr);
        if (rc != ADA_OK) return fail(session, rc);
        std::cout << split_json.str() << "\n";
        return 0;
    }

    if (cmd_train->parsed()) {
        auto config = train_args.merged();
        if (!config.has_value()) return 2;
        std::optional<std::string> split_text;
        if (!train_split_path.empty()) {
            split_text = read_file(train_split_path);
            if (!split_text.has_value()) {
                std::cerr << "error: cannot open split '" << train_split_path << "'\n";
                return 3;
            }
        }
        OwnedString summary;
        const int rc = ada_train(session.handle, config->c_str(),
                                 split_text ? split_text->c_str() : nullptr, &summary.ptr);
        if (rc != ADA_OK) return fail(session, rc);
        std::cout << summary.str() << "\n";
        return 0;
    }

    if (cmd_predict->parsed()) {
        auto config = read_file(predict_args.config_path);
        if (!config.has_value()) {
            std::cerr << "error: cannot open config '" << predict_args.config_path << "'\n";
            return 2;
        }
        ada_model* model = nullptr;
        int rc = ada_model_open(session.handle, model_path.c_str(), &model);
        if (rc != ADA_OK) return fail(session, rc);
        std::unique_ptr<ada_model, decltype(&ada_model_close)> guard(model, &ada_model_close);
        OwnedString csv;
        rc = ada_predict(session.handle, model, config->c_str(), predict_range.c_str(),
                         predict_out.empty() ? nullptr : predict_out.c_str(),
                         truth_out.empty() ? nullptr : truth_out.c_str(),
                         predict_out.empty() ? &csv.ptr : nullptr);
        if (rc != ADA_OK) return fail(session, rc);
        if (predict_out.empty()) std::cout << csv.str();
        return 0;
    }

    if (cmd_evaluate->parsed()) {
        OwnedString metrics;
        const int rc = ada_evaluate(session.handle, eval_pred.c_str(), eval_truth.c_str(),
                                    eval_task.c_str(), &metrics.ptr);
        if (rc != ADA_OK) return fail(session, rc);
        std::cout << metrics.str() << "\n";
        return 0;
    }

    if (cmd_synth->parsed()) {
        const int rc = ada_synth(session.handle, static_cast<int>(synth_regimes), synth_steps,
                                 static_cast<int>(synth_features), synth_delta, synth_seed,
                                 synth_out.c_str(), synth_truth.c_str());
        if (rc != ADA_OK) return fail(session, rc);
        Json done{{"csv", synth_out}, {"truth", synth_truth}};
        std::cout << done.dump() << "\n";
        return 0;
    }

    return 2;
}

#include "adarnn.h"

#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "pipeline.hpp"

using namespace adarnn;

struct ada_session {
    std::string last_error;
};

struct ada_model {
    ModelParams params;
};

namespace {

char *copy_string(const std::string &text) {
    char *out = new char[text.size() + 1];
    std::memcpy(out, text.c_str(), text.size() + 1);
    return out;
}

template <typename Fn>
int guarded(ada_session *session, Fn &&fn) {
    if (session == nullptr) return ADA_ERR_CONFIG;
    session->last_error.clear();
    try {
        fn();
        return ADA_OK;
    } catch (const Error &e) {
        session->last_error = e.what();
        return static_cast<int>(e.status());
    } catch (const std::exception &e) {
        session->last_error = std::string("internal error: ") + e.what();
        return ADA_ERR_NUMERIC;
    }
}

std::string require(const char *value, const char *name) {
    if (value == nullptr) throw ConfigError(std::string(name) + " must not be null");
    return value;
}

} // namespace

extern "C" {

ada_session *ada_session_new(void) { return new ada_session; }

void ada_session_free(ada_session *session) { delete session; }

const char *ada_last_error(const ada_session *session) {
    return session == nullptr ? "" : session->last_error.c_str();
}

void ada_string_free(char *text) { delete[] text; }

int ada_synth(ada_session *session, int regimes, int64_t steps_per_regime, int features,
              double delta, uint64_t seed, const char *csv_path, const char *truth_json_path) {
    return guarded(session, [&] {
        if (regimes < 0 || steps_per_regime < 0 || features < 0) {
            throw ConfigError("synth: counts must be non-negative");
        }
        SynthSpec spec;
        spec.regimes = static_cast<std::size_t>(regimes);
        spec.steps_per_regime = static_cast<std::size_t>(steps_per_regime);
        spec.features = static_cast<std::size_t>(features);
        spec.delta = delta;
        spec.seed = seed;
        run_synth(spec, require(csv_path, "csv_path"),
                  truth_json_path == nullptr ? "" : truth_json_path);
    });
}

int ada_split(ada_session *session, const char *config_json, char **split_json_out) {
    return guarded(session, [&] {
        RunConfig cfg = RunConfig::from_json(require(config_json, "config_json"));
        SplitOutcome outcome = run_split(cfg);
        if (split_json_out != nullptr) *split_json_out = copy_string(outcome.json);
    });
}

int ada_train(ada_session *session, const char *config_json, const char *split_json,
              char **summary_json_out) {
    return guarded(session, [&] {
        RunConfig cfg = RunConfig::from_json(require(config_json, "config_json"));
        std::optional<std::string> split;
        if (split_json != nullptr) split = std::string(split_json);
        TrainOutcome outcome = run_train(cfg, split);
        if (summary_json_out != nullptr) *summary_json_out = copy_string(outcome.summary_json);
    });
}

int ada_model_open(ada_session *session, const char *path, ada_model **model_out) {
    return guarded(session, [&] {
        const std::string filename = require(path, "path");
        std::ifstream in(filename);
        if (!in) throw DataError("cannot open '" + filename + "'");
        std::ostringstream text;
        text << in.rdbuf();
        auto model = std::make_unique<ada_model>();
        model->params = ModelParams::deserialize(text.str());
        if (model_out == nullptr) throw ConfigError("model_out must not be null");
        *model_out = model.release();
    });
}

void ada_model_close(ada_model *model) { delete model; }

int ada_model_info(ada_session *session, const ada_model *model, char **info_json_out) {
    return guarded(session, [&] {
        if (model == nullptr) throw ConfigError("model must not be null");
        nlohmann::json info{{"task", task_name(model->params.task)},
                            {"p", model->params.p},
                            {"q", model->params.q},
                            {"layers", model->params.layers.size()},
                            {"r_or_c", model->params.output_dim}};
        if (info_json_out != nullptr) *info_json_out = copy_string(info.dump());
    });
}

int ada_predict(ada_session *session, const ada_model *model, const char *config_json,
                const char *range, const char *pred_csv_path, const char *truth_csv_path,
                char **csv_out) {
    return guarded(session, [&] {
        if (model == nullptr) throw ConfigError("model must not be null");
        RunConfig cfg = RunConfig::from_json(require(config_json, "config_json"));
        PredictOutcome outcome =
            run_predict(model->params, cfg, range == nullptr ? "test" : range);
        if (pred_csv_path != nullptr) {
            std::ofstream out(pred_csv_path);
            if (!out) throw DataError(std::string("cannot write '") + pred_csv_path + "'");
            out << outcome.csv;
        }
        if (truth_csv_path != nullptr) {
            std::ofstream out(truth_csv_path);
            if (!out) throw DataError(std::string("cannot write '") + truth_csv_path + "'");
            out << outcome.truth_csv;
        }
        if (csv_out != nullptr) *csv_out = copy_string(outcome.csv);
    });
}

int ada_evaluate(ada_session *session, const char *pred_csv_path, const char *truth_csv_path,
                 const char *task, char **metrics_json_out) {
    return guarded(session, [&] {
        const std::string metrics =
            run_evaluate(require(pred_csv_path, "pred_csv_path"),
                         require(truth_csv_path, "truth_csv_path"), require(task, "task"));
        if (metrics_json_out != nullptr) *metrics_json_out = copy_string(metrics);
    });
}

} // extern "C"

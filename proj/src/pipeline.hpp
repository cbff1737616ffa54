#pragma once

#include <optional>
#include <string>

#include "config.hpp"
#include "dataio.hpp"
#include "gru.hpp"
#include "segmentation.hpp"
#include "synth.hpp"
#include "trainer.hpp"

namespace adarnn {

// Preprocessed inputs shared by the commands. The order is fixed: fill
// missing values, fit min-max stats on the training row extent only,
// apply them everywhere, window, split chronologically.
struct PipelineData {
    RawTable table; // filled and normalized
    NormStats stats;
    Dataset dataset;
    ChronoSplit chrono;
    std::size_t train_extent_rows = 0; // raw rows covered by training windows
    Tensor train_features;             // train extent rows x p, for characterization
};

PipelineData prepare(const RunConfig& cfg);

struct SplitOutcome {
    PeriodSplit split;
    std::vector<std::pair<std::size_t, double>> candidates; // (k, objective)
    std::string json;
};

// Characterizes the training range; writes cfg.out.split when set.
SplitOutcome run_split(const RunConfig& cfg);

struct TrainOutcome {
    std::string summary_json;
    std::string model_json;
};

// Splits (inline or from the given document), trains, writes the model
// file and streams the history as JSON lines; the final record carries
// the importance-weight snapshot.
TrainOutcome run_train(const RunConfig& cfg, const std::optional<std::string>& split_json);

// Predictions for one chronological range ("train" | "valid" | "test" |
// "all") as CSV text; optionally the aligned truth rows as well.
struct PredictOutcome {
    std::string csv;
    std::string truth_csv;
};

PredictOutcome run_predict(const ModelParams& model, const RunConfig& cfg,
                           const std::string& range);

// Metrics for aligned prediction/truth CSV files as a flat JSON object.
// Regression truth files may carry a leading "group" column, which turns
// on the information-coefficient family.
std::string run_evaluate(const std::string& pred_path, const std::string& truth_path,
                         const std::string& task);

// Synthetic data files: CSV plus ground-truth boundary JSON.
void run_synth(const SynthSpec& spec, const std::string& csv_path,
               const std::string& truth_path);

} // namespace adarnn

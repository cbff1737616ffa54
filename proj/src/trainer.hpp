#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "dataio.hpp"
#include "distances.hpp"
#include "gru.hpp"
#include "optim.hpp"
#include "segmentation.hpp"

namespace adarnn {

struct TrainConfig {
    double lambda = 0.5;
    double lr = 5e-3;
    std::size_t batch = 36;
    std::size_t epochs = 30;
    std::size_t pretrain_epochs = 10;
    DistanceKind kind;
    std::uint64_t seed = 0;
    bool match_all_layers = true;  // otherwise only the last layer
    bool share_alpha_layers = false;

    void validate() const;
};

// Per period pair and matched layer, a simplex over the segment steps.
struct ImportanceWeights {
    std::size_t pairs = 0;
    std::size_t layers = 0; // alpha slots: matched layers, or 1 when shared
    std::size_t steps = 0;

    std::vector<double> alpha; // [pair][layer][step]

    static ImportanceWeights uniform(std::size_t pairs, std::size_t layers, std::size_t steps);
    double at(std::size_t pair, std::size_t layer, std::size_t step) const;
    double& at(std::size_t pair, std::size_t layer, std::size_t step);
    // Every (pair, layer) row sums to 1 within 1e-9 with non-negative entries.
    void validate() const;
    double entropy_mean() const;
};

// Epoch-mean unweighted step distances (divergence indicators) with the
// same [pair][layer][step] layout as the weights.
struct DistanceLog {
    std::size_t pairs = 0;
    std::size_t layers = 0;
    std::size_t steps = 0;
    std::vector<std::vector<double>> epochs; // epochs[n-1] holds epoch n

    const std::vector<double>& epoch(std::size_t n) const; // 1-based
    double epoch_mean(std::size_t n) const;
};

// Multiplies the weight of every step whose distance did not decrease
// between epochs n-1 and n by 1 + sigmoid(increase), then renormalizes
// each (pair, layer) row. Needs n >= 2.
ImportanceWeights boosting_update(const ImportanceWeights& alpha, const DistanceLog& log,
                                  std::size_t epoch_n);

// One aligned mini-batch for one period.
struct PeriodBatch {
    std::vector<Tensor> steps; // m tensors of shape B x p
    Tensor targets;            // B x r values, or B x c one-hot rows
};

// Mean per-sample task loss of one batch: MSE for regression,
// cross-entropy against one-hot rows for classification.
Tensor task_loss(Task task, const Tensor& predictions, const Tensor& targets);

// Mean over periods of the per-period task loss; optionally hands back
// the forward traces for reuse by the matching term.
Tensor prediction_loss(const ModelParams& params, const std::vector<PeriodBatch>& batches,
                       std::vector<HiddenTrace>* traces = nullptr);

// Alpha-weighted sum over steps (and matched layers) of the step-wise
// distances between two traces. alpha holds one weight row per entry of
// `layers_i`; `indicators` receives the unweighted divergence values.
Tensor tdm_pair_loss(const std::vector<std::vector<Tensor>>& layers_i,
                     const std::vector<std::vector<Tensor>>& layers_j,
                     const std::vector<std::vector<double>>& alpha, const DistanceKind& kind,
                     const Discriminator* disc = nullptr,
                     std::vector<double>* indicators = nullptr);

struct LossBreakdown {
    Tensor total;
    Tensor pred;
    double match_value = 0.0;            // mean pair loss, before lambda
    std::vector<double> step_indicators; // [pair][alpha-layer][step]
};

// prediction_loss + lambda * mean over period pairs of tdm_pair_loss.
// With lambda == 0 or fewer than two periods the returned total IS the
// prediction loss tensor and no distances are evaluated.
LossBreakdown total_loss(const ModelParams& params, const std::vector<PeriodBatch>& batches,
                         const ImportanceWeights& alpha, const TrainConfig& cfg,
                         const Discriminator* disc = nullptr);

struct EpochRecord {
    std::size_t epoch = 0; // 1-based over the main (post pre-train) epochs
    double pred_loss = 0.0;
    double match_loss = 0.0;
    double alpha_entropy_mean = 0.0;
    double dist_mean = 0.0;
    std::vector<double> alpha; // snapshot after this epoch's boosting
};

struct TrainHistory {
    std::vector<double> pretrain_loss; // per pre-train epoch
    std::vector<EpochRecord> epochs;
};

struct TrainResult {
    ImportanceWeights alpha;
    DistanceLog log;
    TrainHistory history;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

// Pre-training alone: Adam on the prediction loss for
// cfg.pretrain_epochs epochs, importance weights untouched. Returns the
// per-epoch training losses.
std::vector<double> pretrain(ModelParams& params, const Dataset& data, std::size_t begin,
                             std::size_t end, const PeriodSplit& split, const TrainConfig& cfg);

// The full procedure: characterized periods in, pre-train, then joint
// epochs of Adam on the total loss with the boosting update at every
// epoch end from the second one on. Deterministic per (seed, config).
TrainResult train(ModelParams& params, const Dataset& data, std::size_t begin, std::size_t end,
                  const PeriodSplit& split, const TrainConfig& cfg,
                  const EpochCallback& on_epoch = nullptr);

} // namespace adarnn

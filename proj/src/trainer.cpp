#include "trainer.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rng.hpp"

namespace adarnn {
namespace {

double sigmoid_scalar(double x) {
    return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

// Shuffled per-period index stream; wraps around with a reshuffle so
// shorter periods keep supplying batches of the common size.
struct IndexStream {
    std::vector<std::size_t> order;
    std::size_t cursor = 0;

    void reset() { cursor = order.size(); }

    std::size_t next(Rng& rng) {
        if (cursor >= order.size()) {
            for (std::size_t i = order.size() - 1; i > 0; --i) {
                const std::size_t j = rng.below(i + 1);
                std::swap(order[i], order[j]);
            }
            cursor = 0;
        }
        return order[cursor++];
    }
};

PeriodBatch build_batch(const Dataset& data, const std::vector<std::size_t>& picks) {
    const std::size_t batch = picks.size();
    PeriodBatch out;
    out.steps.reserve(data.window);
    for (std::size_t t = 0; t < data.window; ++t) {
        std::vector<double> step(batch * data.p);
        for (std::size_t b = 0; b < batch; ++b) {
            const double* seg = data.segment(picks[b]) + t * data.p;
            std::copy(seg, seg + data.p, step.begin() + b * data.p);
        }
        out.steps.push_back(Tensor::from_data(batch, data.p, std::move(step)));
    }
    if (data.task == Task::kRegression) {
        std::vector<double> targets(batch * data.horizon);
        for (std::size_t b = 0; b < batch; ++b) {
            for (std::size_t h = 0; h < data.horizon; ++h) {
                targets[b * data.horizon + h] = data.y[picks[b] * data.horizon + h];
            }
        }
        out.targets = Tensor::from_data(batch, data.horizon, std::move(targets));
    } else {
        std::vector<double> onehot(batch * data.classes, 0.0);
        for (std::size_t b = 0; b < batch; ++b) {
            onehot[b * data.classes + static_cast<std::size_t>(data.y[picks[b]])] = 1.0;
        }
        out.targets = Tensor::from_data(batch, data.classes, std::move(onehot));
    }
    return out;
}

std::size_t triangle_pairs(std::size_t k) { return k < 2 ? 0 : k * (k - 1) / 2; }

} // namespace

void TrainConfig::validate() const {
    if (lambda < 0.0) throw ConfigError("train: lambda must be non-negative");
    if (lr <= 0.0) throw ConfigError("train: learning rate must be positive");
    if (batch < 2) throw ConfigError("train: batch size must be at least 2");
    if (epochs < 1) throw ConfigError("train: need at least one epoch");
}

ImportanceWeights ImportanceWeights::uniform(std::size_t pairs, std::size_t layers,
                                             std::size_t steps) {
    ImportanceWeights w;
    w.pairs = pairs;
    w.layers = layers;
    w.steps = steps;
    const double v = steps > 0 ? 1.0 / static_cast<double>(steps) : 0.0;
    w.alpha.assign(pairs * layers * steps, v);
    return w;
}

double ImportanceWeights::at(std::size_t pair, std::size_t layer, std::size_t step) const {
    return alpha[(pair * layers + layer) * steps + step];
}

double& ImportanceWeights::at(std::size_t pair, std::size_t layer, std::size_t step) {
    return alpha[(pair * layers + layer) * steps + step];
}

void ImportanceWeights::validate() const {
    if (alpha.size() != pairs * layers * steps) {
        throw ContractError("importance weights: buffer does not match dimensions");
    }
    for (std::size_t p = 0; p < pairs; ++p) {
        for (std::size_t l = 0; l < layers; ++l) {
            double total = 0.0;
            for (std::size_t t = 0; t < steps; ++t) {
                const double a = at(p, l, t);
                if (a < 0.0) throw ContractError("importance weights: negative entry");
                total += a;
            }
            if (std::abs(total - 1.0) > 1e-9) {
                throw ContractError("importance weights: row does not sum to 1");
            }
        }
    }
}

double ImportanceWeights::entropy_mean() const {
    if (pairs * layers == 0) return 0.0;
    double acc = 0.0;
    for (std::size_t p = 0; p < pairs; ++p) {
        for (std::size_t l = 0; l < layers; ++l) {
            for (std::size_t t = 0; t < steps; ++t) {
                const double a = at(p, l, t);
                if (a > 0.0) acc -= a * std::log(a);
            }
        }
    }
    return acc / static_cast<double>(pairs * layers);
}

const std::vector<double>& DistanceLog::epoch(std::size_t n) const {
    if (n < 1 || n > epochs.size()) {
        throw ContractError("distance log: epoch " + std::to_string(n) + " not recorded");
    }
    return epochs[n - 1];
}

double DistanceLog::epoch_mean(std::size_t n) const {
    const auto& grid = epoch(n);
    if (grid.empty()) return 0.0;
    double acc = 0.0;
    for (double v : grid) acc += v;
    return acc / static_cast<double>(grid.size());
}

ImportanceWeights boosting_update(const ImportanceWeights& alpha, const DistanceLog& log,
                                  std::size_t epoch_n) {
    if (epoch_n < 2) throw ContractError("boosting_update: needs epochs n and n-1");
    const auto& cur = log.epoch(epoch_n);
    const auto& prev = log.epoch(epoch_n - 1);
    if (cur.size() != alpha.alpha.size() || prev.size() != alpha.alpha.size()) {
        throw ContractError("boosting_update: log and weights disagree in shape");
    }
    alpha.validate();

    ImportanceWeights out = alpha;
    for (std::size_t p = 0; p < out.pairs; ++p) {
        for (std::size_t l = 0; l < out.layers; ++l) {
            double total = 0.0;
            for (std::size_t t = 0; t < out.steps; ++t) {
                const std::size_t idx = (p * out.layers + l) * out.steps + t;
                if (cur[idx] >= prev[idx]) {
                    out.alpha[idx] *= 1.0 + sigmoid_scalar(cur[idx] - prev[idx]);
                }
                total += out.alpha[idx];
            }
            for (std::size_t t = 0; t < out.steps; ++t) {
                out.alpha[(p * out.layers + l) * out.steps + t] /= total;
            }
        }
    }
    return out;
}

Tensor task_loss(Task task, const Tensor& predictions, const Tensor& targets) {
    if (predictions.rows() != targets.rows() || predictions.cols() != targets.cols()) {
        throw DimensionError("task_loss: prediction/target shape mismatch");
    }
    if (task == Task::kRegression) {
        return mean(square(sub(predictions, targets)));
    }
    const double inv_batch = -1.0 / static_cast<double>(predictions.rows());
    return scale(sum(mul(targets, log(clamp(predictions, 1e-12, 1.0)))), inv_batch);
}

Tensor prediction_loss(const ModelParams& params, const std::vector<PeriodBatch>& batches,
                       std::vector<HiddenTrace>* traces) {
    if (batches.empty()) throw DataError("prediction_loss: no period batches");
    const std::size_t batch_rows = batches.front().steps.empty()
                                       ? 0
                                       : batches.front().steps.front().rows();
    Tensor acc;
    for (const PeriodBatch& period : batches) {
        if (period.steps.empty() || period.steps.front().rows() == 0) {
            throw DataError("prediction_loss: empty period batch");
        }
        if (period.steps.front().rows() != batch_rows) {
            throw ContractError("prediction_loss: periods must share one batch size");
        }
        ForwardResult fr = gru_forward(params, period.steps);
        Tensor loss = task_loss(params.task, fr.predictions, period.targets);
        acc = acc.defined() ? add(acc, loss) : loss;
        if (traces != nullptr) traces->push_back(std::move(fr.trace));
    }
    return scale(acc, 1.0 / static_cast<double>(batches.size()));
}

Tensor tdm_pair_loss(const std::vector<std::vector<Tensor>>& layers_i,
                     const std::vector<std::vector<Tensor>>& layers_j,
                     const std::vector<std::vector<double>>& alpha, const DistanceKind& kind,
                     const Discriminator* disc, std::vector<double>* indicators) {
    if (layers_i.size() != layers_j.size() || layers_i.size() != alpha.size() ||
        layers_i.empty()) {
        throw ContractError("tdm_pair_loss: layer counts disagree");
    }
    Tensor acc;
    for (std::size_t l = 0; l < layers_i.size(); ++l) {
        const std::size_t steps = layers_i[l].size();
        if (layers_j[l].size() != steps || alpha[l].size() != steps) {
            throw ContractError("tdm_pair_loss: step counts disagree");
        }
        for (std::size_t t = 0; t < steps; ++t) {
            Tensor d = distance(kind, layers_i[l][t], layers_j[l][t], disc);
            if (indicators != nullptr) {
                indicators->push_back(divergence_indicator(kind, d.item()));
            }
            Tensor weighted = scale(d, alpha[l][t]);
            acc = acc.defined() ? add(acc, weighted) : weighted;
        }
    }
    return acc;
}

LossBreakdown total_loss(const ModelParams& params, const std::vector<PeriodBatch>& batches,
                         const ImportanceWeights& alpha, const TrainConfig& cfg,
                         const Discriminator* disc) {
    const std::size_t k = batches.size();
    const bool matching = cfg.lambda > 0.0 && k >= 2;

    LossBreakdown out;
    std::vector<HiddenTrace> traces;
    out.pred = prediction_loss(params, batches, matching ? &traces : nullptr);
    if (!matching) {
        out.total = out.pred;
        return out;
    }

    const std::size_t n_layers = params.layers.size();
    const std::size_t matched = cfg.match_all_layers ? n_layers : 1;
    const std::size_t steps = traces.front().steps();
    if (alpha.pairs != triangle_pairs(k) || alpha.steps != steps ||
        alpha.layers != (cfg.share_alpha_layers ? 1 : matched)) {
        throw ContractError("total_loss: importance weights do not match this configuration");
    }

    auto matched_layers = [&](const HiddenTrace& trace) {
        std::vector<std::vector<Tensor>> out_layers;
        for (std::size_t l = n_layers - matched; l < n_layers; ++l) {
            out_layers.push_back(trace.layers[l]);
        }
        return out_layers;
    };

    Tensor pair_sum;
    std::size_t pair = 0;
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i + 1; j < k; ++j, ++pair) {
            std::vector<std::vector<double>> pair_alpha(matched);
            for (std::size_t l = 0; l < matched; ++l) {
                const std::size_t slot = cfg.share_alpha_layers ? 0 : l;
                pair_alpha[l].resize(steps);
                for (std::size_t t = 0; t < steps; ++t) {
                    pair_alpha[l][t] = alpha.at(pair, slot, t);
                }
            }
            std::vector<double> indicators;
            Tensor pl = tdm_pair_loss(matched_layers(traces[i]), matched_layers(traces[j]),
                                      pair_alpha, cfg.kind, disc, &indicators);
            pair_sum = pair_sum.defined() ? add(pair_sum, pl) : pl;

            if (cfg.share_alpha_layers && matched > 1) {
                // One alpha slot: boost from the layer-mean indicator.
                for (std::size_t t = 0; t < steps; ++t) {
                    double acc = 0.0;
                    for (std::size_t l = 0; l < matched; ++l) acc += indicators[l * steps + t];
                    out.step_indicators.push_back(acc / static_cast<double>(matched));
                }
            } else {
                out.step_indicators.insert(out.step_indicators.end(), indicators.begin(),
                                           indicators.end());
            }
        }
    }

    Tensor term = scale(pair_sum, 2.0 / (static_cast<double>(k) * static_cast<double>(k - 1)));
    out.match_value = term.item();
    out.total = add(out.pred, scale(term, cfg.lambda));
    return out;
}

namespace {

// Everything one training run needs to iterate epochs.
struct Loop {
    ModelParams& params;
    const Dataset& data;
    TrainConfig cfg;
    std::vector<std::vector<std::size_t>> period_windows;
    std::vector<IndexStream> streams;
    std::size_t steps_per_epoch = 0;
    ImportanceWeights alpha;
    AdamOptimizer optimizer;
    std::optional<Discriminator> disc;
    std::optional<AdamOptimizer> disc_optimizer;
    Rng rng;

    Loop(ModelParams& params_in, const Dataset& data_in, std::size_t begin, std::size_t end,
         const PeriodSplit& split, const TrainConfig& cfg_in)
        : params(params_in),
          data(data_in),
          cfg(cfg_in),
          optimizer(params_in.parameters(), {.lr = cfg_in.lr}),
          rng(cfg_in.seed) {
        cfg.validate();
        split.validate(1);
        if (begin >= end || end > data.size()) {
            throw ContractError("train: empty or out-of-range window span");
        }
        if (data.task == Task::kClassification && data.classes < 2) {
            throw DataError("train: classification needs at least 2 classes");
        }

        period_windows.resize(split.k);
        for (std::size_t i = begin; i < end; ++i) {
            const std::size_t origin = data.origins[i];
            if (origin >= split.boundaries.back()) {
                throw DataError("train: split does not cover the training windows");
            }
            const auto it =
                std::upper_bound(split.boundaries.begin(), split.boundaries.end(), origin);
            const std::size_t k = static_cast<std::size_t>(it - split.boundaries.begin()) - 1;
            period_windows[k].push_back(i);
        }
        std::size_t largest = 0;
        for (std::size_t k = 0; k < period_windows.size(); ++k) {
            if (period_windows[k].empty()) {
                throw DataError("train: period " + std::to_string(k + 1) +
                                " has no windows after segmentation");
            }
            largest = std::max(largest, period_windows[k].size());
        }
        steps_per_epoch = (largest + cfg.batch - 1) / cfg.batch;

        const std::size_t matched = cfg.match_all_layers ? params.layers.size() : 1;
        const std::size_t slots = cfg.share_alpha_layers ? 1 : matched;
        alpha = ImportanceWeights::uniform(triangle_pairs(split.k), slots, data.window);

        if (cfg.kind.needs_discriminator() && cfg.lambda > 0.0 && split.k >= 2) {
            const std::size_t hidden = cfg.kind.adv_hidden > 0 ? cfg.kind.adv_hidden : params.q;
            disc = Discriminator::init(params.q, hidden, cfg.seed ^ 0x9e3779b97f4a7c15ULL,
                                       cfg.kind.grl_coeff);
            disc_optimizer.emplace(disc->params(), AdamConfig{.lr = cfg.lr});
        }
    }

    // One pass over the aligned batches; fills the epoch-mean indicator
    // grid when matching is on. Returns the epoch-mean prediction loss.
    double run_epoch(bool matching, std::vector<double>* grid, double* match_mean) {
        for (IndexStream& s : streams) s.reset();
        TrainConfig step_cfg = cfg;
        if (!matching) step_cfg.lambda = 0.0;

        double pred_acc = 0.0;
        double match_acc = 0.0;
        for (std::size_t step = 0; step < steps_per_epoch; ++step) {
            std::vector<PeriodBatch> batches;
            batches.reserve(period_windows.size());
            for (IndexStream& s : streams) {
                std::vector<std::size_t> picks(cfg.batch);
                for (std::size_t b = 0; b < cfg.batch; ++b) picks[b] = s.next(rng);
                batches.push_back(build_batch(data, picks));
            }

            optimizer.zero_grad();
            if (disc_optimizer) disc_optimizer->zero_grad();
            LossBreakdown lb;
            try {
                Tape tape;
                lb = total_loss(params, batches, alpha, step_cfg, disc ? &*disc : nullptr);
                if (!std::isfinite(lb.total.item())) {
                    throw NumericError("loss is not finite");
                }
                tape.backward(lb.total);
            } catch (const NumericError& e) {
                // Debug builds surface divergence as per-op numeric errors.
                throw DivergenceError("train: diverged at step " + std::to_string(step + 1) +
                                      ": " + e.what());
            }
            optimizer.step();
            if (matching && disc_optimizer) disc_optimizer->step();

            pred_acc += lb.pred.item();
            match_acc += lb.match_value;
            if (grid != nullptr && !lb.step_indicators.empty()) {
                if (grid->empty()) grid->assign(lb.step_indicators.size(), 0.0);
                for (std::size_t i = 0; i < lb.step_indicators.size(); ++i) {
                    (*grid)[i] += lb.step_indicators[i];
                }
            }
        }
        const double inv = 1.0 / static_cast<double>(steps_per_epoch);
        if (grid != nullptr) {
            for (double& v : *grid) v *= inv;
        }
        if (match_mean != nullptr) *match_mean = match_acc * inv;
        return pred_acc * inv;
    }

    void init_streams() {
        streams.clear();
        for (const auto& windows : period_windows) {
            IndexStream s;
            s.order = windows;
            s.reset();
            streams.push_back(std::move(s));
        }
    }
};

} // namespace

std::vector<double> pretrain(ModelParams& params, const Dataset& data, std::size_t begin,
                             std::size_t end, const PeriodSplit& split, const TrainConfig& cfg) {
    Loop loop(params, data, begin, end, split, cfg);
    loop.init_streams();
    std::vector<double> losses;
    try {
        for (std::size_t e = 0; e < cfg.pretrain_epochs; ++e) {
            losses.push_back(loop.run_epoch(false, nullptr, nullptr));
        }
    } catch (const DivergenceError& e) {
        throw NumericError(std::string("pretrain: ") + e.what());
    }
    return losses;
}

TrainResult train(ModelParams& params, const Dataset& data, std::size_t begin, std::size_t end,
                  const PeriodSplit& split, const TrainConfig& cfg,
                  const EpochCallback& on_epoch) {
    Loop loop(params, data, begin, end, split, cfg);
    loop.init_streams();

    TrainResult result;
    const bool matching = cfg.lambda > 0.0 && split.k >= 2;
    result.log.pairs = loop.alpha.pairs;
    result.log.layers = loop.alpha.layers;
    result.log.steps = loop.alpha.steps;

    for (std::size_t e = 0; e < cfg.pretrain_epochs; ++e) {
        result.history.pretrain_loss.push_back(loop.run_epoch(false, nullptr, nullptr));
    }

    const std::size_t grid_size = matching ? loop.alpha.alpha.size() : 0;
    for (std::size_t n = 1; n <= cfg.epochs; ++n) {
        std::vector<double> grid;
        double match_mean = 0.0;
        const double pred_mean = loop.run_epoch(matching, matching ? &grid : nullptr, &match_mean);
        if (matching && grid.size() != grid_size) {
            throw ContractError("train: indicator grid has unexpected shape");
        }
        result.log.epochs.push_back(std::move(grid));
        if (matching && n >= 2) {
            loop.alpha = boosting_update(loop.alpha, result.log, n);
        }

        EpochRecord record;
        record.epoch = n;
        record.pred_loss = pred_mean;
        record.match_loss = match_mean;
        record.alpha_entropy_mean = loop.alpha.entropy_mean();
        record.dist_mean = result.log.epoch_mean(n);
        record.alpha = loop.alpha.alpha;
        if (on_epoch) on_epoch(record);
        result.history.epochs.push_back(std::move(record));
    }
    result.alpha = loop.alpha;
    return result;
}

} // namespace adarnn

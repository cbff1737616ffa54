#include "pipeline.hpp"

#include <charconv>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "metrics.hpp"

namespace adarnn {
namespace {

using Json = nlohmann::json;

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path + "'");
    out << text;
    if (!out) throw DataError("short write to '" + path + "'");
}

WindowSpec window_spec(const RunConfig& cfg) {
    WindowSpec spec;
    spec.window = cfg.data.window;
    spec.horizon = cfg.data.horizon;
    spec.stride = cfg.data.stride;
    spec.task = parse_task(cfg.train.task);
    return spec;
}

SplitOutcome characterize(const PipelineData& data, const RunConfig& cfg) {
    const UnitPartition units = partition_units(data.train_extent_rows, cfg.tdc.units);
    SegmentationOptions opts;
    opts.kind = DistanceKind::parse(cfg.tdc.distance);
    opts.max_samples = cfg.tdc.max_samples;

    SplitOutcome out;
    if (cfg.tdc.k >= 2) {
        out.split = greedy_split(data.train_features, units, cfg.tdc.k, opts);
        out.candidates = {{cfg.tdc.k, out.split.objective}};
    } else if (cfg.tdc.k == 1) {
        throw ConfigError("split: k = 1 disables characterization; use k >= 2 or \"auto\"");
    } else {
        std::vector<std::size_t> ks;
        for (std::size_t k : default_k_candidates()) {
            if (k <= units.units()) ks.push_back(k);
        }
        if (ks.empty()) throw ConfigError("split: no feasible k candidates for these units");
        SelectResult res = select_split(data.train_features, units, ks, opts);
        for (const auto& [k, objective] : res.candidates) {
            std::cerr << "split: candidate k=" << k << " objective=" << objective << "\n";
        }
        out.split = std::move(res.best);
        out.candidates = std::move(res.candidates);
    }
    out.json = out.split.to_json();
    return out;
}

struct FlatCsv {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

FlatCsv read_flat_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    FlatCsv out;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty() && in.eof()) break;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::vector<std::string> cells;
        std::size_t start = 0;
        while (true) {
            const auto comma = line.find(',', start);
            if (comma == std::string::npos) {
                cells.push_back(line.substr(start));
                break;
            }
            cells.push_back(line.substr(start, comma - start));
            start = comma + 1;
        }
        if (first) {
            out.header = std::move(cells);
            first = false;
        } else {
            if (cells.size() != out.header.size()) {
                throw FormatError("'" + path + "': ragged row " + std::to_string(out.rows.size() + 1));
            }
            out.rows.push_back(std::move(cells));
        }
    }
    if (first) throw FormatError("'" + path + "': empty file");
    return out;
}

double parse_number(const std::string& cell, const std::string& path) {
    double v = 0.0;
    const char* begin = cell.data();
    auto [ptr, ec] = std::from_chars(begin, begin + cell.size(), v);
    if (ec != std::errc{} || ptr != begin + cell.size()) {
        throw FormatError("'" + path + "': unparseable number '" + cell + "'");
    }
    return v;
}

} // namespace

PipelineData prepare(const RunConfig& cfg) {
    cfg.validate();
    if (cfg.data.path.empty()) throw ConfigError("config: data.path is required");
    if (cfg.data.target_col.empty()) throw ConfigError("config: data.target_col is required");

    CsvSchema schema;
    schema.time_col = cfg.data.time_col;
    schema.target_col = cfg.data.target_col;
    schema.feature_cols = cfg.data.features;

    PipelineData out;
    out.table = load_csv(cfg.data.path, schema);
    fill_missing(out.table);

    const WindowSpec spec = window_spec(cfg);
    const std::size_t count = window_count(out.table.rows(), spec);
    const ChronoSplit sizes = chrono_sizes(count, cfg.data.ratios);
    out.train_extent_rows = (sizes.train_end - 1) * spec.stride + spec.window + spec.horizon;

    out.stats = fit_minmax(out.table, out.train_extent_rows);
    apply_minmax(out.table, out.stats);
    out.dataset = make_windows(out.table, spec);
    out.chrono = chrono_split(out.dataset, cfg.data.ratios);

    const std::size_t p = out.table.feature_count();
    std::vector<double> features(out.train_extent_rows * p);
    for (std::size_t r = 0; r < out.train_extent_rows; ++r) {
        for (std::size_t j = 0; j < p; ++j) features[r * p + j] = out.table.values[j][r];
    }
    out.train_features = Tensor::from_data(out.train_extent_rows, p, std::move(features));
    return out;
}

SplitOutcome run_split(const RunConfig& cfg) {
    PipelineData data = prepare(cfg);
    SplitOutcome out = characterize(data, cfg);
    if (!cfg.out.split.empty()) write_text_file(cfg.out.split, out.json + "\n");
    return out;
}

TrainOutcome run_train(const RunConfig& cfg, const std::optional<std::string>& split_json) {
    PipelineData data = prepare(cfg);

    PeriodSplit split;
    if (split_json.has_value()) {
        split = PeriodSplit::from_json(*split_json);
        if (split.boundaries.back() != data.train_extent_rows) {
            throw DataError("train: split does not cover this configuration's training range (" +
                            std::to_string(split.boundaries.back()) + " vs " +
                            std::to_string(data.train_extent_rows) + " rows)");
        }
    } else if (cfg.tdc.k == 1) {
        split = PeriodSplit::trivial(data.train_extent_rows);
    } else {
        split = characterize(data, cfg).split;
    }

    const Task task = parse_task(cfg.train.task);
    const std::size_t output_dim =
        task == Task::kRegression ? cfg.data.horizon : data.dataset.classes;
    ModelParams model = ModelParams::init(data.dataset.p, cfg.train.hidden, cfg.train.layers,
                                          task, output_dim, cfg.train.seed);

    TrainConfig tcfg;
    tcfg.lambda = cfg.train.lambda;
    tcfg.lr = cfg.train.lr;
    tcfg.batch = cfg.train.batch;
    tcfg.epochs = cfg.train.epochs;
    tcfg.pretrain_epochs = cfg.train.pretrain_epochs;
    tcfg.kind = DistanceKind::parse(cfg.tdc.distance);
    tcfg.seed = cfg.train.seed;
    tcfg.match_all_layers = cfg.train.match_all_layers;
    tcfg.share_alpha_layers = cfg.train.share_alpha_layers;

    std::ofstream history;
    if (!cfg.out.history.empty()) {
        history.open(cfg.out.history);
        if (!history) throw DataError("cannot write '" + cfg.out.history + "'");
    }
    const EpochCallback on_epoch = [&](const EpochRecord& rec) {
        if (!history.is_open()) return;
        Json line{{"epoch", rec.epoch},
                  {"pred_loss", rec.pred_loss},
                  {"match_loss", rec.match_loss},
                  {"alpha_entropy_mean", rec.alpha_entropy_mean},
                  {"dist_mean", rec.dist_mean}};
        if (rec.epoch == cfg.train.epochs) {
            line["alpha"] = rec.alpha; // final snapshot
        }
        history << line.dump() << "\n";
        history.flush(); // keep progress on divergence aborts
    };

    TrainResult result =
        train(model, data.dataset, 0, data.chrono.train_end, split, tcfg, on_epoch);

    TrainOutcome out;
    out.model_json = model.serialize();
    if (!cfg.out.model.empty()) write_text_file(cfg.out.model, out.model_json);

    Json summary;
    summary["model"] = cfg.out.model;
    summary["history"] = cfg.out.history;
    summary["split"] = Json::parse(split.to_json());
    summary["epochs"] = cfg.train.epochs;
    if (!result.history.epochs.empty()) {
        const EpochRecord& last = result.history.epochs.back();
        summary["final_pred_loss"] = last.pred_loss;
        summary["final_match_loss"] = last.match_loss;
        summary["final_dist_mean"] = last.dist_mean;
    }
    out.summary_json = summary.dump();
    return out;
}

PredictOutcome run_predict(const ModelParams& model, const RunConfig& cfg,
                           const std::string& range) {
    if (model.task != parse_task(cfg.train.task)) {
        throw ConfigError("predict: config task does not match the model");
    }
    PipelineData data = prepare(cfg);
    if (model.p != data.dataset.p) {
        throw ConfigError("predict: model expects " + std::to_string(model.p) +
                          " features, data has " + std::to_string(data.dataset.p));
    }
    if (model.task == Task::kRegression) {
        if (model.output_dim != cfg.data.horizon) {
            throw ConfigError("predict: model horizon does not match the configuration");
        }
    } else if (data.dataset.classes > model.output_dim) {
        throw ConfigError("predict: data contains labels outside the model's classes");
    }

    std::size_t begin = 0, end = data.dataset.size();
    if (range == "train") {
        end = data.chrono.train_end;
    } else if (range == "valid") {
        begin = data.chrono.train_end;
        end = data.chrono.valid_end;
    } else if (range == "test") {
        begin = data.chrono.valid_end;
    } else if (range != "all") {
        throw ConfigError("predict: range must be train | valid | test | all");
    }

    std::ostringstream csv, truth;
    csv << "origin";
    for (std::size_t c = 0; c < model.output_dim; ++c) {
        csv << "," << (model.task == Task::kRegression ? "p" : "prob") << c;
    }
    csv << "\n";
    if (model.task == Task::kRegression) {
        truth << "origin";
        for (std::size_t c = 0; c < data.dataset.horizon; ++c) truth << ",y" << c;
        truth << "\n";
    } else {
        truth << "origin,label\n";
    }

    const Dataset& ds = data.dataset;
    const std::size_t chunk = 256;
    for (std::size_t at = begin; at < end; at += chunk) {
        const std::size_t stop = std::min(end, at + chunk);
        std::vector<Tensor> steps;
        steps.reserve(ds.window);
        for (std::size_t t = 0; t < ds.window; ++t) {
            std::vector<double> step((stop - at) * ds.p);
            for (std::size_t i = at; i < stop; ++i) {
                const double* seg = ds.segment(i) + t * ds.p;
                std::copy(seg, seg + ds.p, step.begin() + (i - at) * ds.p);
            }
            steps.push_back(Tensor::from_data(stop - at, ds.p, std::move(step)));
        }
        Tensor pred = predict(model, steps);
        for (std::size_t i = at; i < stop; ++i) {
            csv << ds.origins[i];
            for (std::size_t c = 0; c < pred.cols(); ++c) {
                csv << "," << format_double(pred.at(i - at, c));
            }
            csv << "\n";
            truth << ds.origins[i];
            if (model.task == Task::kRegression) {
                for (std::size_t h = 0; h < ds.horizon; ++h) {
                    truth << "," << format_double(ds.y[i * ds.horizon + h]);
                }
            } else {
                truth << "," << static_cast<long>(ds.y[i]);
            }
            truth << "\n";
        }
    }

    PredictOutcome out;
    out.csv = csv.str();
    out.truth_csv = truth.str();
    return out;
}

std::string run_evaluate(const std::string& pred_path, const std::string& truth_path,
                         const std::string& task_name) {
    const Task task = parse_task(task_name);
    FlatCsv pred = read_flat_csv(pred_path);
    FlatCsv truth = read_flat_csv(truth_path);

    if (pred.header.empty() || pred.header[0] != "origin") {
        throw FormatError("'" + pred_path + "': first column must be origin");
    }
    const bool grouped = !truth.header.empty() && truth.header[0] == "group";
    const std::size_t truth_origin_col = grouped ? 1 : 0;
    if (truth.header.size() <= truth_origin_col || truth.header[truth_origin_col] != "origin") {
        throw FormatError("'" + truth_path + "': expected an origin column");
    }
    if (pred.rows.size() != truth.rows.size()) {
        throw ConfigError("evaluate: files are not aligned (row counts differ)");
    }
    for (std::size_t i = 0; i < pred.rows.size(); ++i) {
        if (pred.rows[i][0] != truth.rows[i][truth_origin_col]) {
            throw ConfigError("evaluate: files are not aligned at row " + std::to_string(i + 1));
        }
    }

    const std::size_t pred_vals = pred.header.size() - 1;
    const std::size_t truth_vals = truth.header.size() - truth_origin_col - 1;
    Json out;

    if (task == Task::kRegression) {
        if (pred_vals != truth_vals) {
            throw ConfigError("evaluate: prediction and truth column counts differ");
        }
        std::vector<double> p, t;
        for (std::size_t i = 0; i < pred.rows.size(); ++i) {
            for (std::size_t c = 0; c < pred_vals; ++c) {
                p.push_back(parse_number(pred.rows[i][1 + c], pred_path));
                t.push_back(parse_number(truth.rows[i][truth_origin_col + 1 + c], truth_path));
            }
        }
        const RegressionMetrics rm = regression_metrics(p, t);
        out["rmse"] = rm.rmse;
        out["mae"] = rm.mae;
        if (grouped) {
            GroupedPredictions gp;
            for (std::size_t i = 0; i < pred.rows.size(); ++i) {
                gp.records.push_back({truth.rows[i][0],
                                      parse_number(pred.rows[i][1], pred_path),
                                      parse_number(truth.rows[i][truth_origin_col + 1], truth_path)});
            }
            const IcMetrics ic = information_coefficients(gp);
            out["ic"] = ic.ic;
            out["icir"] = ic.icir;
            out["rank_ic"] = ic.rank_ic;
            out["rank_icir"] = ic.rank_icir;
            if (ic.groups_skipped > 0) out["groups_skipped"] = ic.groups_skipped;
        }
    } else {
        if (pred_vals < 2) throw ConfigError("evaluate: classification needs score columns");
        if (truth_vals != 1) throw ConfigError("evaluate: classification truth needs one label column");
        std::vector<std::vector<double>> scores(pred.rows.size());
        std::vector<int> labels(pred.rows.size());
        for (std::size_t i = 0; i < pred.rows.size(); ++i) {
            for (std::size_t c = 0; c < pred_vals; ++c) {
                scores[i].push_back(parse_number(pred.rows[i][1 + c], pred_path));
            }
            labels[i] = static_cast<int>(parse_number(truth.rows[i][truth_origin_col + 1], truth_path));
        }
        const ClassificationMetrics cm = classification_metrics(scores, labels, pred_vals);
        out["acc"] = cm.acc;
        out["p"] = cm.precision;
        out["r"] = cm.recall;
        out["f1"] = cm.f1;
        out["auc"] = cm.auc;
        if (cm.classes_skipped > 0) out["classes_skipped"] = cm.classes_skipped;
    }
    return out.dump();
}

void run_synth(const SynthSpec& spec, const std::string& csv_path,
               const std::string& truth_path) {
    SynthResult synth = synth_tcs_generate(spec);
    write_synth_csv(synth, csv_path);
    if (!truth_path.empty()) write_text_file(truth_path, synth_truth_json(synth) + "\n");
}

} // namespace adarnn

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "errors.hpp"

namespace adarnn {

// The JSON run configuration shared by the split/train/predict commands.
struct RunConfig {
    struct Data {
        std::string path;
        std::string time_col = "time";
        std::string target_col;
        std::vector<std::string> features; // empty: all but time and target
        std::size_t window = 24;
        std::size_t horizon = 1;
        std::size_t stride = 1;
        std::array<double, 3> ratios{0.6, 0.2, 0.2};
    } data;

    struct Tdc {
        std::string distance = "mmd";
        std::size_t k = 0; // 0: search the candidate set; 1: no split
        std::size_t units = 10;
        std::size_t max_samples = 512;
    } tdc;

    struct Train {
        std::string task = "regression";
        std::size_t hidden = 64;
        std::size_t layers = 2;
        double lambda = 0.5;
        double lr = 5e-3;
        std::size_t batch = 36;
        std::size_t epochs = 30;
        std::size_t pretrain_epochs = 10;
        std::uint64_t seed = 0;
        bool match_all_layers = true;
        bool share_alpha_layers = false;
    } train;

    struct Out {
        std::string model = "model.adarnn.json";
        std::string history = "history.jsonl";
        std::string split; // empty: no split file
    } out;

    static RunConfig from_json(const std::string& text);

    // Structural checks that need no data: enum values, ranges, ratio sum.
    void validate() const;
};

} // namespace adarnn

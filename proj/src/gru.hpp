#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tensor.hpp"

namespace adarnn {

enum class Task { kRegression, kClassification };

Task parse_task(const std::string& name);
std::string task_name(Task task);

struct GruLayerParams {
    // Gate weights: w_* act on the input, u_* on the previous state.
    Tensor w_z, u_z, b_z;
    Tensor w_r, u_r, b_r;
    Tensor w_h, u_h, b_h;

    std::size_t input_dim() const { return w_z.rows(); }
    std::size_t hidden_dim() const { return w_z.cols(); }
};

// GRU stack with a two-layer ReLU bottleneck and a linear task head.
// Classification heads add a row softmax.
struct ModelParams {
    Task task = Task::kRegression;
    std::size_t p = 0;          // input features per step
    std::size_t q = 0;          // hidden dimension
    std::size_t output_dim = 0; // r outputs or c classes
    std::vector<GruLayerParams> layers;
    Tensor bn_w1, bn_b1, bn_w2, bn_b2;
    Tensor head_w, head_b;

    // Uniform(-1/sqrt(q), 1/sqrt(q)) weights, zero biases, reproducible
    // per seed.
    static ModelParams init(std::size_t p, std::size_t q, std::size_t n_layers, Task task,
                            std::size_t output_dim, std::uint64_t seed);

    // Every trainable leaf in a fixed order.
    std::vector<Tensor> parameters();

    // Versioned JSON document; round-trips bit-exactly for finite floats.
    std::string serialize() const;
    static ModelParams deserialize(const std::string& text);
};

// Per-layer, per-step hidden states; layers[l][t] is a B x q batch.
struct HiddenTrace {
    std::vector<std::vector<Tensor>> layers;

    std::size_t steps() const { return layers.empty() ? 0 : layers.front().size(); }
};

struct ForwardResult {
    HiddenTrace trace;
    Tensor predictions; // B x output_dim
};

// One recurrence step: z and r gates, reset-gated candidate, convex
// combination h = (1 - z) * h_prev + z * h_tilde.
Tensor gru_cell_step(const GruLayerParams& layer, const Tensor& x_t, const Tensor& h_prev);

// Full forward pass over a batch given as m step tensors of shape B x p.
// States start at zero; the trace captures every step of every layer and
// the head consumes the bottleneck of the last layer's final state.
ForwardResult gru_forward(const ModelParams& params, const std::vector<Tensor>& steps);

// gru_forward without tape recording; values are identical bitwise.
Tensor predict(const ModelParams& params, const std::vector<Tensor>& steps);

} // namespace adarnn

#include "gru.hpp"

#include <cmath>

#include <json.hpp>

#include "rng.hpp"

namespace adarnn {
namespace {

using Json = nlohmann::json;

Tensor uniform_matrix(Rng& rng, std::size_t rows, std::size_t cols, double bound) {
    std::vector<double> data(rows * cols);
    for (double& v : data) v = rng.uniform(-bound, bound);
    return Tensor::from_data(rows, cols, std::move(data)).set_requires_grad(true);
}

Tensor zero_param(std::size_t rows, std::size_t cols) {
    return Tensor::zeros(rows, cols).set_requires_grad(true);
}

Json dump_tensor(const Tensor& t) { return Json(t.values()); }

Tensor load_tensor(const Json& j, std::size_t rows, std::size_t cols, const char* name) {
    std::vector<double> data;
    try {
        data = j.get<std::vector<double>>();
    } catch (const Json::exception&) {
        throw FormatError(std::string("model: weight '") + name + "' is not a number array");
    }
    if (data.size() != rows * cols) {
        throw FormatError(std::string("model: weight '") + name + "' has wrong length");
    }
    return Tensor::from_data(rows, cols, std::move(data)).set_requires_grad(true);
}

} // namespace

Task parse_task(const std::string& name) {
    if (name == "regression") return Task::kRegression;
    if (name == "classification") return Task::kClassification;
    throw ConfigError("unknown task '" + name + "' (expected regression | classification)");
}

std::string task_name(Task task) {
    return task == Task::kRegression ? "regression" : "classification";
}

ModelParams ModelParams::init(std::size_t p, std::size_t q, std::size_t n_layers, Task task,
                              std::size_t output_dim, std::uint64_t seed) {
    if (p < 1 || q < 1 || n_layers < 1 || output_dim < 1) {
        throw ConfigError("model init: dimensions must be at least 1");
    }
    const double bound = 1.0 / std::sqrt(static_cast<double>(q));
    Rng rng(seed);
    ModelParams params;
    params.task = task;
    params.p = p;
    params.q = q;
    params.output_dim = output_dim;
    params.layers.reserve(n_layers);
    for (std::size_t l = 0; l < n_layers; ++l) {
        const std::size_t d_in = l == 0 ? p : q;
        GruLayerParams layer;
        layer.w_z = uniform_matrix(rng, d_in, q, bound);
        layer.u_z = uniform_matrix(rng, q, q, bound);
        layer.b_z = zero_param(1, q);
        layer.w_r = uniform_matrix(rng, d_in, q, bound);
        layer.u_r = uniform_matrix(rng, q, q, bound);
        layer.b_r = zero_param(1, q);
        layer.w_h = uniform_matrix(rng, d_in, q, bound);
        layer.u_h = uniform_matrix(rng, q, q, bound);
        layer.b_h = zero_param(1, q);
        params.layers.push_back(std::move(layer));
    }
    params.bn_w1 = uniform_matrix(rng, q, q, bound);
    params.bn_b1 = zero_param(1, q);
    params.bn_w2 = uniform_matrix(rng, q, q, bound);
    params.bn_b2 = zero_param(1, q);
    params.head_w = uniform_matrix(rng, q, output_dim, bound);
    params.head_b = zero_param(1, output_dim);
    return params;
}

std::vector<Tensor> ModelParams::parameters() {
    std::vector<Tensor> out;
    for (GruLayerParams& layer : layers) {
        for (Tensor* t : {&layer.w_z, &layer.u_z, &layer.b_z, &layer.w_r, &layer.u_r, &layer.b_r,
                          &layer.w_h, &layer.u_h, &layer.b_h}) {
            out.push_back(*t);
        }
    }
    for (Tensor* t : {&bn_w1, &bn_b1, &bn_w2, &bn_b2, &head_w, &head_b}) out.push_back(*t);
    return out;
}

std::string ModelParams::serialize() const {
    Json gru = Json::array();
    for (const GruLayerParams& layer : layers) {
        gru.push_back({{"w_z", dump_tensor(layer.w_z)},
                       {"u_z", dump_tensor(layer.u_z)},
                       {"b_z", dump_tensor(layer.b_z)},
                       {"w_r", dump_tensor(layer.w_r)},
                       {"u_r", dump_tensor(layer.u_r)},
                       {"b_r", dump_tensor(layer.b_r)},
                       {"w_h", dump_tensor(layer.w_h)},
                       {"u_h", dump_tensor(layer.u_h)},
                       {"b_h", dump_tensor(layer.b_h)}});
    }
    Json doc{{"version", 1},
             {"task", task_name(task)},
             {"p", p},
             {"q", q},
             {"layers", layers.size()},
             {"r_or_c", output_dim},
             {"weights",
              {{"gru", std::move(gru)},
               {"bottleneck",
                {{"w1", dump_tensor(bn_w1)},
                 {"b1", dump_tensor(bn_b1)},
                 {"w2", dump_tensor(bn_w2)},
                 {"b2", dump_tensor(bn_b2)}}},
               {"head", {{"w", dump_tensor(head_w)}, {"b", dump_tensor(head_b)}}}}}};
    return doc.dump();
}

ModelParams ModelParams::deserialize(const std::string& text) {
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const Json::exception& e) {
        throw FormatError(std::string("model: invalid JSON: ") + e.what());
    }
    try {
        const int version = doc.at("version").get<int>();
        if (version != 1) {
            throw FormatError("model: unsupported version " + std::to_string(version));
        }
        ModelParams params;
        params.task = parse_task(doc.at("task").get<std::string>());
        params.p = doc.at("p").get<std::size_t>();
        params.q = doc.at("q").get<std::size_t>();
        params.output_dim = doc.at("r_or_c").get<std::size_t>();
        const auto n_layers = doc.at("layers").get<std::size_t>();
        if (params.p < 1 || params.q < 1 || params.output_dim < 1 || n_layers < 1) {
            throw FormatError("model: dimensions must be at least 1");
        }
        const Json& weights = doc.at("weights");
        const Json& gru = weights.at("gru");
        if (!gru.is_array() || gru.size() != n_layers) {
            throw FormatError("model: layer count does not match weights");
        }
        const std::size_t q = params.q;
        for (std::size_t l = 0; l < n_layers; ++l) {
            const std::size_t d_in = l == 0 ? params.p : q;
            const Json& jl = gru[l];
            GruLayerParams layer;
            layer.w_z = load_tensor(jl.at("w_z"), d_in, q, "w_z");
            layer.u_z = load_tensor(jl.at("u_z"), q, q, "u_z");
            layer.b_z = load_tensor(jl.at("b_z"), 1, q, "b_z");
            layer.w_r = load_tensor(jl.at("w_r"), d_in, q, "w_r");
            layer.u_r = load_tensor(jl.at("u_r"), q, q, "u_r");
            layer.b_r = load_tensor(jl.at("b_r"), 1, q, "b_r");
            layer.w_h = load_tensor(jl.at("w_h"), d_in, q, "w_h");
            layer.u_h = load_tensor(jl.at("u_h"), q, q, "u_h");
            layer.b_h = load_tensor(jl.at("b_h"), 1, q, "b_h");
            params.layers.push_back(std::move(layer));
        }
        const Json& bn = weights.at("bottleneck");
        params.bn_w1 = load_tensor(bn.at("w1"), q, q, "bottleneck.w1");
        params.bn_b1 = load_tensor(bn.at("b1"), 1, q, "bottleneck.b1");
        params.bn_w2 = load_tensor(bn.at("w2"), q, q, "bottleneck.w2");
        params.bn_b2 = load_tensor(bn.at("b2"), 1, q, "bottleneck.b2");
        const Json& head = weights.at("head");
        params.head_w = load_tensor(head.at("w"), q, params.output_dim, "head.w");
        params.head_b = load_tensor(head.at("b"), 1, params.output_dim, "head.b");
        return params;
    } catch (const Json::exception& e) {
        throw FormatError(std::string("model: missing or mistyped field: ") + e.what());
    }
}

Tensor gru_cell_step(const GruLayerParams& layer, const Tensor& x_t, const Tensor& h_prev) {
    Tensor z = sigmoid(add(add(matmul(x_t, layer.w_z), matmul(h_prev, layer.u_z)), layer.b_z));
    Tensor r = sigmoid(add(add(matmul(x_t, layer.w_r), matmul(h_prev, layer.u_r)), layer.b_r));
    Tensor candidate =
        tanh(add(add(matmul(x_t, layer.w_h), matmul(mul(r, h_prev), layer.u_h)), layer.b_h));
    // h = (1 - z) * h_prev + z * candidate
    return add(sub(h_prev, mul(z, h_prev)), mul(z, candidate));
}

ForwardResult gru_forward(const ModelParams& params, const std::vector<Tensor>& steps) {
    if (steps.empty()) throw DataError("gru_forward: empty batch");
    const std::size_t batch = steps.front().rows();
    for (const Tensor& x : steps) {
        if (x.rows() != batch || x.cols() != params.p) {
            throw DimensionError("gru_forward: step shape does not match the model");
        }
    }

    ForwardResult result;
    result.trace.layers.resize(params.layers.size());
    std::vector<Tensor> inputs(steps.begin(), steps.end());
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        Tensor h = Tensor::zeros(batch, params.q);
        auto& trace = result.trace.layers[l];
        trace.reserve(inputs.size());
        for (std::size_t t = 0; t < inputs.size(); ++t) {
            h = gru_cell_step(params.layers[l], inputs[t], h);
            trace.push_back(h);
        }
        inputs = trace; // next layer consumes this layer's states
    }

    const Tensor& last = result.trace.layers.back().back();
    Tensor bn1 = relu(add(matmul(last, params.bn_w1), params.bn_b1));
    Tensor bn2 = relu(add(matmul(bn1, params.bn_w2), params.bn_b2));
    Tensor out = add(matmul(bn2, params.head_w), params.head_b);
    result.predictions = params.task == Task::kClassification ? softmax(out) : out;
    return result;
}

Tensor predict(const ModelParams& params, const std::vector<Tensor>& steps) {
    NoTape guard;
    return gru_forward(params, steps).predictions;
}

} // namespace adarnn

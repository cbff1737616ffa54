#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gru.hpp"
#include "optim.hpp"
#include "rng.hpp"

using namespace adarnn;

namespace {

std::vector<Tensor> random_steps(Rng& rng, std::size_t m, std::size_t batch, std::size_t p) {
    std::vector<Tensor> steps;
    for (std::size_t t = 0; t < m; ++t) {
        std::vector<double> data(batch * p);
        for (double& v : data) v = rng.uniform(-1.0, 1.0);
        steps.push_back(Tensor::from_data(batch, p, std::move(data)));
    }
    return steps;
}

ModelParams zeroed_model(std::size_t p, std::size_t q, std::size_t layers, Task task,
                         std::size_t out) {
    ModelParams params = ModelParams::init(p, q, layers, task, out, 0);
    for (Tensor& t : params.parameters()) {
        for (double& v : t.mutable_values()) v = 0.0;
    }
    return params;
}

} // namespace

TEST_CASE("init is deterministic, bounded and chains shapes") {
    ModelParams a = ModelParams::init(6, 64, 2, Task::kRegression, 1, 5);
    ModelParams b = ModelParams::init(6, 64, 2, Task::kRegression, 1, 5);
    auto pa = a.parameters();
    auto pb = b.parameters();
    REQUIRE(pa.size() == pb.size());
    for (std::size_t i = 0; i < pa.size(); ++i) {
        REQUIRE(pa[i].size() == pb[i].size());
        for (std::size_t j = 0; j < pa[i].size(); ++j) CHECK(pa[i].values()[j] == pb[i].values()[j]);
    }

    for (const Tensor& t : pa) {
        for (double v : t.values()) {
            CHECK(v > -0.125);
            CHECK(v < 0.125);
        }
    }

    CHECK(a.layers[0].w_z.rows() == 6);
    CHECK(a.layers[0].w_z.cols() == 64);
    CHECK(a.layers[1].w_z.rows() == 64);
    CHECK(a.layers[1].w_z.cols() == 64);

    ModelParams c = ModelParams::init(6, 64, 2, Task::kRegression, 1, 6);
    CHECK(c.layers[0].w_z.values() != a.layers[0].w_z.values());
}

TEST_CASE("all-zero parameters hold the state at zero") {
    ModelParams params = zeroed_model(3, 4, 2, Task::kRegression, 1);
    Rng rng(1);
    auto steps = random_steps(rng, 5, 2, 3);
    ForwardResult fr = gru_forward(params, steps);
    for (const auto& layer : fr.trace.layers) {
        for (const Tensor& h : layer) {
            for (double v : h.values()) CHECK(v == 0.0);
        }
    }
    for (double v : fr.predictions.values()) CHECK(v == 0.0);
}

TEST_CASE("scalar hand evaluation of one step") {
    // z saturates via a huge update bias, the candidate path is x itself,
    // so one step from zero lands on tanh(1).
    ModelParams params = zeroed_model(1, 1, 1, Task::kRegression, 1);
    params.layers[0].b_z.mutable_values()[0] = 100.0;
    params.layers[0].w_h.mutable_values()[0] = 1.0;
    std::vector<Tensor> steps{Tensor::from_data(1, 1, {1.0})};
    ForwardResult fr = gru_forward(params, steps);
    CHECK(fr.trace.layers[0][0].values()[0] == doctest::Approx(std::tanh(1.0)).epsilon(1e-5));
    CHECK(fr.trace.layers[0][0].values()[0] == doctest::Approx(0.76159).epsilon(1e-4));
}

TEST_CASE("trace shape contract") {
    ModelParams params = ModelParams::init(6, 64, 2, Task::kRegression, 1, 3);
    Rng rng(2);
    auto steps = random_steps(rng, 16, 4, 6);
    ForwardResult fr = gru_forward(params, steps);
    REQUIRE(fr.trace.layers.size() == 2);
    for (const auto& layer : fr.trace.layers) {
        REQUIRE(layer.size() == 16);
        for (const Tensor& h : layer) {
            CHECK(h.rows() == 4);
            CHECK(h.cols() == 64);
        }
    }
    CHECK(fr.predictions.rows() == 4);
    CHECK(fr.predictions.cols() == 1);
}

TEST_CASE("predict matches gru_forward bitwise and keeps softmax rows normalized") {
    ModelParams params = ModelParams::init(5, 8, 2, Task::kClassification, 6, 9);
    Rng rng(3);
    auto steps = random_steps(rng, 7, 4, 5);
    ForwardResult fr = gru_forward(params, steps);
    Tensor inferred = predict(params, steps);
    REQUIRE(inferred.size() == fr.predictions.size());
    for (std::size_t i = 0; i < inferred.size(); ++i) {
        CHECK(inferred.values()[i] == fr.predictions.values()[i]);
    }
    for (std::size_t r = 0; r < inferred.rows(); ++r) {
        double acc = 0.0;
        for (std::size_t c = 0; c < inferred.cols(); ++c) acc += inferred.at(r, c);
        CHECK(std::abs(acc - 1.0) <= 1e-12);
    }

    ModelParams reg = ModelParams::init(5, 8, 2, Task::kRegression, 3, 9);
    Tensor out = predict(reg, steps);
    CHECK(out.rows() == 4);
    CHECK(out.cols() == 3);
}

TEST_CASE("hidden states stay inside the unit box") {
    // h starts at zero and every step is a convex combination of the
    // previous state and a tanh value.
    ModelParams params = ModelParams::init(3, 6, 2, Task::kRegression, 1, 11);
    Rng rng(4);
    auto steps = random_steps(rng, 24, 5, 3);
    ForwardResult fr = gru_forward(params, steps);
    for (const auto& layer : fr.trace.layers) {
        for (const Tensor& h : layer) {
            for (double v : h.values()) CHECK(std::abs(v) <= 1.0 + 1e-12);
        }
    }
}

TEST_CASE("trace entries recompute exactly from the previous state") {
    ModelParams params = ModelParams::init(3, 5, 2, Task::kRegression, 1, 13);
    Rng rng(5);
    auto steps = random_steps(rng, 6, 4, 3);
    ForwardResult fr = gru_forward(params, steps);
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        const auto& inputs = l == 0 ? steps : fr.trace.layers[l - 1];
        for (std::size_t t = 0; t < steps.size(); ++t) {
            Tensor prev = t == 0 ? Tensor::zeros(4, 5) : fr.trace.layers[l][t - 1];
            Tensor redo = gru_cell_step(params.layers[l], inputs[t], prev);
            for (std::size_t i = 0; i < redo.size(); ++i) {
                CHECK(redo.values()[i] == fr.trace.layers[l][t].values()[i]);
            }
        }
    }
}

TEST_CASE("model loss gradient passes the finite-difference check") {
    // Two steps, q = 3, checked against every parameter tensor. Biases
    // are randomized away from zero so no ReLU input sits exactly on the
    // kink where the derivative is one-sided.
    ModelParams params = ModelParams::init(2, 3, 2, Task::kRegression, 1, 17);
    Rng rng(6);
    for (Tensor& t : params.parameters()) {
        for (double& v : t.mutable_values()) v += rng.uniform(-0.3, 0.3);
    }
    auto steps = random_steps(rng, 2, 4, 2);
    Tensor target = Tensor::from_data(4, 1, {0.1, -0.2, 0.3, 0.05});

    auto params_list = params.parameters();
    for (std::size_t idx = 0; idx < params_list.size(); ++idx) {
        auto f = [&, idx](const Tensor& candidate) {
            // Splice the candidate handle into the probed slot so the
            // graph is built from f's argument.
            ModelParams probe = params;
            std::size_t cursor = 0;
            for (auto& layer : probe.layers) {
                for (Tensor* t : {&layer.w_z, &layer.u_z, &layer.b_z, &layer.w_r, &layer.u_r,
                                  &layer.b_r, &layer.w_h, &layer.u_h, &layer.b_h}) {
                    if (cursor++ == idx) *t = candidate;
                }
            }
            for (Tensor* t : {&probe.bn_w1, &probe.bn_b1, &probe.bn_w2, &probe.bn_b2,
                              &probe.head_w, &probe.head_b}) {
                if (cursor++ == idx) *t = candidate;
            }
            ForwardResult fr = gru_forward(probe, steps);
            return mean(square(sub(fr.predictions, target)));
        };
        CHECK(grad_check(f, params_list[idx], 1e-5) < 1e-4);
    }
}

TEST_CASE("serialization round trip is bit exact") {
    ModelParams params = ModelParams::init(4, 6, 2, Task::kClassification, 3, 21);
    const std::string doc = params.serialize();
    ModelParams back = ModelParams::deserialize(doc);
    CHECK(back.task == params.task);
    CHECK(back.p == params.p);
    CHECK(back.q == params.q);
    CHECK(back.output_dim == params.output_dim);
    auto pa = params.parameters();
    auto pb = back.parameters();
    REQUIRE(pa.size() == pb.size());
    for (std::size_t i = 0; i < pa.size(); ++i) {
        for (std::size_t j = 0; j < pa[i].size(); ++j) CHECK(pa[i].values()[j] == pb[i].values()[j]);
    }
    CHECK(back.serialize() == doc);
}

TEST_CASE("deserialize rejects malformed documents") {
    ModelParams params = ModelParams::init(2, 3, 1, Task::kRegression, 1, 1);
    std::string doc = params.serialize();

    std::string wrong_version = doc;
    const auto at = wrong_version.find("\"version\":1");
    REQUIRE(at != std::string::npos);
    wrong_version.replace(at, 11, "\"version\":2");
    CHECK_THROWS_AS(ModelParams::deserialize(wrong_version), FormatError);

    std::string wrong_shape = doc;
    const auto qat = wrong_shape.find("\"q\":3");
    REQUIRE(qat != std::string::npos);
    wrong_shape.replace(qat, 5, "\"q\":4");
    CHECK_THROWS_AS(ModelParams::deserialize(wrong_shape), FormatError);

    CHECK_THROWS_AS(ModelParams::deserialize(doc.substr(0, doc.size() / 2)), FormatError);
    CHECK_THROWS_AS(ModelParams::deserialize(R"({"version":1})"), FormatError);
}

TEST_CASE("forward validates batch shapes") {
    ModelParams params = ModelParams::init(3, 4, 1, Task::kRegression, 1, 2);
    std::vector<Tensor> bad{Tensor::zeros(2, 5)};
    CHECK_THROWS_AS(gru_forward(params, bad), DimensionError);
    CHECK_THROWS_AS(gru_forward(params, {}), DataError);
}

#pragma once

#include <functional>
#include <vector>

#include "tensor.hpp"

namespace adarnn {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Adam with bias correction over a fixed set of leaf parameter tensors.
class AdamOptimizer {
public:
    AdamOptimizer(std::vector<Tensor> params, AdamConfig cfg);

    // Applies one bias-corrected update from the gradients currently held
    // by the parameters; contract error if any parameter has none.
    void step();
    void zero_grad();
    long step_count() const { return step_; }

private:
    std::vector<Tensor> params_;
    std::vector<std::vector<double>> m_;
    std::vector<std::vector<double>> v_;
    AdamConfig cfg_;
    long step_ = 0;
};

// Central-difference gradient verification. Runs f under a fresh tape to
// obtain analytic gradients, then perturbs every coordinate of x by +-eps
// with recording disabled. Returns max over coordinates of
// |analytic - fd| / max(1, |fd|).
double grad_check(const std::function<Tensor(const Tensor&)>& f, const Tensor& x, double eps);

// The central-difference gradient itself, for tests that need to compare
// against a sign-adjusted analytic gradient.
std::vector<double> finite_difference_grad(const std::function<Tensor(const Tensor&)>& f,
                                           const Tensor& x, double eps);

} // namespace adarnn

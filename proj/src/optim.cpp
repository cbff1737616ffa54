#include "optim.hpp"

#include <cmath>

namespace adarnn {

AdamOptimizer::AdamOptimizer(std::vector<Tensor> params, AdamConfig cfg)
    : params_(std::move(params)), cfg_(cfg) {
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (const Tensor& p : params_) {
        m_.emplace_back(p.size(), 0.0);
        v_.emplace_back(p.size(), 0.0);
    }
}

void AdamOptimizer::step() {
    for (const Tensor& p : params_) {
        if (!p.has_grad()) throw ContractError("adam: parameter has no gradient");
    }
    ++step_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
    for (std::size_t k = 0; k < params_.size(); ++k) {
        auto& value = params_[k].mutable_values();
        const auto& grad = params_[k].grad();
        auto& m = m_[k];
        auto& v = v_[k];
        for (std::size_t i = 0; i < value.size(); ++i) {
            const double g = grad[i];
            m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g;
            v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g * g;
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            value[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
        }
    }
}

void AdamOptimizer::zero_grad() {
    for (Tensor& p : params_) p.zero_grad();
}

std::vector<double> finite_difference_grad(const std::function<Tensor(const Tensor&)>& f,
                                           const Tensor& x, double eps) {
    if (eps <= 0.0) throw ContractError("finite_difference_grad: eps must be positive");
    NoTape guard;
    std::vector<double> fd(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        auto probe = [&](double delta) {
            std::vector<double> data = x.values();
            data[i] += delta;
            Tensor xi = Tensor::from_data(x.rows(), x.cols(), std::move(data));
            Tensor y = f(xi);
            if (y.size() != 1) throw ContractError("finite_difference_grad: f must be scalar-valued");
            const double v = y.item();
            if (!std::isfinite(v)) {
                throw NumericError("finite_difference_grad: non-finite perturbation result");
            }
            return v;
        };
        fd[i] = (probe(eps) - probe(-eps)) / (2.0 * eps);
    }
    return fd;
}

double grad_check(const std::function<Tensor(const Tensor&)>& f, const Tensor& x, double eps) {
    Tensor leaf = Tensor::from_data(x.rows(), x.cols(), x.values());
    leaf.set_requires_grad(true);
    std::vector<double> analytic;
    {
        Tape tape;
        Tensor y = f(leaf);
        if (y.size() != 1) throw ContractError("grad_check: f must be scalar-valued");
        tape.backward(y);
        analytic = leaf.has_grad() ? leaf.grad() : std::vector<double>(leaf.size(), 0.0);
    }
    const std::vector<double> fd = finite_difference_grad(f, x, eps);
    double worst = 0.0;
    for (std::size_t i = 0; i < fd.size(); ++i) {
        const double denom = std::max(1.0, std::abs(fd[i]));
        worst = std::max(worst, std::abs(analytic[i] - fd[i]) / denom);
    }
    return worst;
}

} // namespace adarnn

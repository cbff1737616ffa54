#include "tensor.hpp"

#include <cmath>
#include <sstream>
#include <utility>

namespace adarnn {
namespace {

thread_local Tape* g_active_tape = nullptr;

[[noreturn]] void dim_fail(const char* op, const Tensor& a, const Tensor& b) {
    std::ostringstream os;
    os << op << ": incompatible shapes " << a.rows() << "x" << a.cols() << " and " << b.rows()
       << "x" << b.cols();
    throw DimensionError(os.str());
}

void check_finite(const char* op, const std::vector<double>& v) {
#ifndef NDEBUG
    for (double x : v) {
        if (!std::isfinite(x)) {
            throw NumericError(std::string(op) + ": non-finite value in result");
        }
    }
#else
    (void)op;
    (void)v;
#endif
}

// Builds the result node and records it when a tape is active and any
// parent carries gradient. Unrecorded results drop their parent links so
// intermediate buffers are reclaimed as soon as the handle goes away.
Tensor make_result(std::size_t rows, std::size_t cols, std::vector<double> value, const char* op,
                   std::initializer_list<Tensor> parents,
                   std::function<void(TensorNode&)> backprop) {
    check_finite(op, value);
    auto node = std::make_shared<TensorNode>();
    node->rows = rows;
    node->cols = cols;
    node->value = std::move(value);
    node->op = op;

    Tape* tape = Tape::active();
    bool track = false;
    if (tape != nullptr) {
        for (const Tensor& p : parents) {
            if (p.requires_grad()) {
                track = true;
                break;
            }
        }
    }
    if (track) {
        node->requires_grad = true;
        node->parents.reserve(parents.size());
        for (const Tensor& p : parents) node->parents.push_back(p.node());
        node->backprop = std::move(backprop);
        tape->record(node);
    }
    return Tensor(std::move(node));
}

} // namespace

Tensor Tensor::zeros(std::size_t rows, std::size_t cols) {
    return from_data(rows, cols, std::vector<double>(rows * cols, 0.0));
}

Tensor Tensor::full(std::size_t rows, std::size_t cols, double v) {
    return from_data(rows, cols, std::vector<double>(rows * cols, v));
}

Tensor Tensor::from_data(std::size_t rows, std::size_t cols, std::vector<double> data) {
    if (data.size() != rows * cols) {
        throw DimensionError("from_data: buffer length does not match shape");
    }
    auto node = std::make_shared<TensorNode>();
    node->rows = rows;
    node->cols = cols;
    node->value = std::move(data);
    return Tensor(std::move(node));
}

double Tensor::item() const {
    if (size() != 1) throw ContractError("item: tensor is not 1x1");
    return node_->value[0];
}

const std::vector<double>& Tensor::grad() const {
    if (node_->grad.empty()) throw ContractError("grad: no gradient buffer populated");
    return node_->grad;
}

Tape::Tape() : prev_(g_active_tape) { g_active_tape = this; }

Tape::~Tape() {
    // Surviving nodes must not point at a dead (or recycled) tape.
    for (auto& node : order_) node->tape = nullptr;
    g_active_tape = prev_;
}

Tape* Tape::active() { return g_active_tape; }

void Tape::record(std::shared_ptr<TensorNode> node) {
    node->tape = this;
    order_.push_back(std::move(node));
}

void Tape::backward(const Tensor& loss) {
    if (loss.size() != 1) throw ContractError("backward: loss must be a 1x1 tensor");
    if (loss.node()->tape != this) throw ContractError("backward: loss is not on this tape");
    loss.node()->ensure_grad();
    loss.node()->grad[0] += 1.0;
    for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
        TensorNode& node = **it;
        // Nodes off every path to the loss never get a gradient buffer.
        if (node.grad.empty() || !node.backprop) continue;
        node.backprop(node);
    }
}

NoTape::NoTape() : saved_(g_active_tape) { g_active_tape = nullptr; }

NoTape::~NoTape() { g_active_tape = saved_; }

// ---- op implementations ----

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.cols() != b.rows()) dim_fail("matmul", a, b);
    const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
    std::vector<double> out(n * m, 0.0);
    const auto& av = a.values();
    const auto& bv = b.values();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
            const double aip = av[i * k + p];
            if (aip == 0.0) continue;
            const double* brow = bv.data() + p * m;
            double* orow = out.data() + i * m;
            for (std::size_t j = 0; j < m; ++j) orow[j] += aip * brow[j];
        }
    }
    return make_result(n, m, std::move(out), "matmul", {a, b}, [an = a.node(), bn = b.node()](TensorNode& self) {
        const std::size_t n = an->rows, k = an->cols, m = bn->cols;
        if (an->requires_grad) {
            an->ensure_grad();
            // dA += G * B^T
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t p = 0; p < k; ++p) {
                    double acc = 0.0;
                    const double* grow = self.grad.data() + i * m;
                    const double* brow = bn->value.data() + p * m;
                    for (std::size_t j = 0; j < m; ++j) acc += grow[j] * brow[j];
                    an->grad[i * k + p] += acc;
                }
            }
        }
        if (bn->requires_grad) {
            bn->ensure_grad();
            // dB += A^T * G
            for (std::size_t i = 0; i < n; ++i) {
                const double* arow = an->value.data() + i * k;
                const double* grow = self.grad.data() + i * m;
                for (std::size_t p = 0; p < k; ++p) {
                    const double aip = arow[p];
                    if (aip == 0.0) continue;
                    double* brow = bn->grad.data() + p * m;
                    for (std::size_t j = 0; j < m; ++j) brow[j] += aip * grow[j];
                }
            }
        }
    });
}

Tensor add(const Tensor& a, const Tensor& b) {
    const bool broadcast = b.rows() == 1 && b.cols() == a.cols() && a.rows() != 1;
    if (!broadcast && (a.rows() != b.rows() || a.cols() != b.cols())) dim_fail("add", a, b);
    std::vector<double> out(a.size());
    const auto& av = a.values();
    const auto& bv = b.values();
    if (broadcast) {
        for (std::size_t i = 0; i < a.rows(); ++i)
            for (std::size_t j = 0; j < a.cols(); ++j)
                out[i * a.cols() + j] = av[i * a.cols() + j] + bv[j];
    } else {
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + bv[i];
    }
    return make_result(a.rows(), a.cols(), std::move(out), "add", {a, b},
                       [an = a.node(), bn = b.node(), broadcast](TensorNode& self) {
                           if (an->requires_grad) {
                               an->ensure_grad();
                               for (std::size_t i = 0; i < self.grad.size(); ++i) an->grad[i] += self.grad[i];
                           }
                           if (bn->requires_grad) {
                               bn->ensure_grad();
                               if (broadcast) {
                                   for (std::size_t i = 0; i < self.rows; ++i)
                                       for (std::size_t j = 0; j < self.cols; ++j)
                                           bn->grad[j] += self.grad[i * self.cols + j];
                               } else {
                                   for (std::size_t i = 0; i < self.grad.size(); ++i) bn->grad[i] += self.grad[i];
                               }
                           }
                       });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) dim_fail("sub", a, b);
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] - b.values()[i];
    return make_result(a.rows(), a.cols(), std::move(out), "sub", {a, b},
                       [an = a.node(), bn = b.node()](TensorNode& self) {
                           if (an->requires_grad) {
                               an->ensure_grad();
                               for (std::size_t i = 0; i < self.grad.size(); ++i) an->grad[i] += self.grad[i];
                           }
                           if (bn->requires_grad) {
                               bn->ensure_grad();
                               for (std::size_t i = 0; i < self.grad.size(); ++i) bn->grad[i] -= self.grad[i];
                           }
                       });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) dim_fail("mul", a, b);
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] * b.values()[i];
    return make_result(a.rows(), a.cols(), std::move(out), "mul", {a, b},
                       [an = a.node(), bn = b.node()](TensorNode& self) {
                           if (an->requires_grad) {
                               an->ensure_grad();
                               for (std::size_t i = 0; i < self.grad.size(); ++i)
                                   an->grad[i] += self.grad[i] * bn->value[i];
                           }
                           if (bn->requires_grad) {
                               bn->ensure_grad();
                               for (std::size_t i = 0; i < self.grad.size(); ++i)
                                   bn->grad[i] += self.grad[i] * an->value[i];
                           }
                       });
}

Tensor divide(const Tensor& a, const Tensor& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) dim_fail("divide", a, b);
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] / b.values()[i];
    return make_result(a.rows(), a.cols(), std::move(out), "divide", {a, b},
                       [an = a.node(), bn = b.node()](TensorNode& self) {
                           if (an->requires_grad) {
                               an->ensure_grad();
                               for (std::size_t i = 0; i < self.grad.size(); ++i)
                                   an->grad[i] += self.grad[i] / bn->value[i];
                           }
                           if (bn->requires_grad) {
                               bn->ensure_grad();
                               for (std::size_t i = 0; i < self.grad.size(); ++i)
                                   bn->grad[i] -= self.grad[i] * an->value[i] / (bn->value[i] * bn->value[i]);
                           }
                       });
}

Tensor scale(const Tensor& a, double c) {
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] * c;
    return make_result(a.rows(), a.cols(), std::move(out), "scale", {a},
                       [an = a.node(), c](TensorNode& self) {
                           if (!an->requires_grad) return;
                           an->ensure_grad();
                           for (std::size_t i = 0; i < self.grad.size(); ++i) an->grad[i] += c * self.grad[i];
                       });
}

Tensor add_scalar(const Tensor& a, double c) {
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] + c;
    return make_result(a.rows(), a.cols(), std::move(out), "add_scalar", {a},
                       [an = a.node()](TensorNode& self) {
                           if (!an->requires_grad) return;
                           an->ensure_grad();
                           for (std::size_t i = 0; i < self.grad.size(); ++i) an->grad[i] += self.grad[i];
                       });
}

namespace {

template <typename Fwd, typename Bwd>
Tensor unary_op(const Tensor& a, const char* op, Fwd fwd, Bwd bwd) {
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = fwd(a.values()[i]);
    return make_result(a.rows(), a.cols(), std::move(out), op, {a},
                       [an = a.node(), bwd](TensorNode& self) {
                           if (!an->requires_grad) return;
                           an->ensure_grad();
                           for (std::size_t i = 0; i < self.grad.size(); ++i)
                               an->grad[i] += self.grad[i] * bwd(an->value[i], self.value[i]);
                       });
}

} // namespace

Tensor sigmoid(const Tensor& a) {
    return unary_op(
        a, "sigmoid",
        [](double x) { return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); },
        [](double, double y) { return y * (1.0 - y); });
}

Tensor tanh(const Tensor& a) {
    return unary_op(a, "tanh", [](double x) { return std::tanh(x); },
                    [](double, double y) { return 1.0 - y * y; });
}

Tensor exp(const Tensor& a) {
    return unary_op(a, "exp", [](double x) { return std::exp(x); },
                    [](double, double y) { return y; });
}

Tensor log(const Tensor& a) {
    return unary_op(a, "log", [](double x) { return std::log(x); },
                    [](double x, double) { return 1.0 / x; });
}

Tensor sqrt(const Tensor& a) {
    return unary_op(a, "sqrt", [](double x) { return std::sqrt(x); },
                    [](double, double y) { return 0.5 / y; });
}

Tensor square(const Tensor& a) {
    return unary_op(a, "square", [](double x) { return x * x; },
                    [](double x, double) { return 2.0 * x; });
}

Tensor relu(const Tensor& a) {
    return unary_op(a, "relu", [](double x) { return x > 0.0 ? x : 0.0; },
                    [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Tensor clamp(const Tensor& a, double lo, double hi) {
    if (lo > hi) throw ContractError("clamp: lo > hi");
    return unary_op(a, "clamp", [lo, hi](double x) { return x < lo ? lo : (x > hi ? hi : x); },
                    [lo, hi](double x, double) { return (x > lo && x < hi) ? 1.0 : 0.0; });
}

Tensor mean(const Tensor& a) {
    double acc = 0.0;
    for (double v : a.values()) acc += v;
    const double inv = 1.0 / static_cast<double>(a.size());
    return make_result(1, 1, {acc * inv}, "mean", {a}, [an = a.node(), inv](TensorNode& self) {
        if (!an->requires_grad) return;
        an->ensure_grad();
        const double g = self.grad[0] * inv;
        for (double& v : an->grad) v += g;
    });
}

Tensor sum(const Tensor& a) {
    double acc = 0.0;
    for (double v : a.values()) acc += v;
    return make_result(1, 1, {acc}, "sum", {a}, [an = a.node()](TensorNode& self) {
        if (!an->requires_grad) return;
        an->ensure_grad();
        const double g = self.grad[0];
        for (double& v : an->grad) v += g;
    });
}

Tensor transpose(const Tensor& a) {
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out[j * a.rows() + i] = a.values()[i * a.cols() + j];
    return make_result(a.cols(), a.rows(), std::move(out), "transpose", {a},
                       [an = a.node()](TensorNode& self) {
                           if (!an->requires_grad) return;
                           an->ensure_grad();
                           for (std::size_t i = 0; i < self.rows; ++i)
                               for (std::size_t j = 0; j < self.cols; ++j)
                                   an->grad[j * self.rows + i] += self.grad[i * self.cols + j];
                       });
}

Tensor concat_rows(const Tensor& a, const Tensor& b) {
    if (a.cols() != b.cols()) dim_fail("concat_rows", a, b);
    std::vector<double> out;
    out.reserve(a.size() + b.size());
    out.insert(out.end(), a.values().begin(), a.values().end());
    out.insert(out.end(), b.values().begin(), b.values().end());
    return make_result(a.rows() + b.rows(), a.cols(), std::move(out), "concat_rows", {a, b},
                       [an = a.node(), bn = b.node()](TensorNode& self) {
                           const std::size_t split = an->value.size();
                           if (an->requires_grad) {
                               an->ensure_grad();
                               for (std::size_t i = 0; i < split; ++i) an->grad[i] += self.grad[i];
                           }
                           if (bn->requires_grad) {
                               bn->ensure_grad();
                               for (std::size_t i = 0; i < bn->value.size(); ++i)
                                   bn->grad[i] += self.grad[split + i];
                           }
                       });
}

Tensor slice_rows(const Tensor& a, std::size_t begin, std::size_t end) {
    if (begin >= end || end > a.rows()) throw DimensionError("slice_rows: range out of bounds");
    const std::size_t cols = a.cols();
    std::vector<double> out(a.values().begin() + begin * cols, a.values().begin() + end * cols);
    return make_result(end - begin, cols, std::move(out), "slice_rows", {a},
                       [an = a.node(), begin](TensorNode& self) {
                           if (!an->requires_grad) return;
                           an->ensure_grad();
                           const std::size_t offset = begin * self.cols;
                           for (std::size_t i = 0; i < self.grad.size(); ++i)
                               an->grad[offset + i] += self.grad[i];
                       });
}

Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t end) {
    if (begin >= end || end > a.cols()) throw DimensionError("slice_cols: range out of bounds");
    const std::size_t w = end - begin;
    std::vector<double> out(a.rows() * w);
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < w; ++j) out[i * w + j] = a.values()[i * a.cols() + begin + j];
    return make_result(a.rows(), w, std::move(out), "slice_cols", {a},
                       [an = a.node(), begin](TensorNode& self) {
                           if (!an->requires_grad) return;
                           an->ensure_grad();
                           const std::size_t acols = an->cols;
                           for (std::size_t i = 0; i < self.rows; ++i)
                               for (std::size_t j = 0; j < self.cols; ++j)
                                   an->grad[i * acols + begin + j] += self.grad[i * self.cols + j];
                       });
}

Tensor softmax(const Tensor& a) {
    std::vector<double> out(a.size());
    const std::size_t cols = a.cols();
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* row = a.values().data() + i * cols;
        double mx = row[0];
        for (std::size_t j = 1; j < cols; ++j) mx = row[j] > mx ? row[j] : mx;
        double denom = 0.0;
        for (std::size_t j = 0; j < cols; ++j) {
            out[i * cols + j] = std::exp(row[j] - mx);
            denom += out[i * cols + j];
        }
        for (std::size_t j = 0; j < cols; ++j) out[i * cols + j] /= denom;
    }
    return make_result(a.rows(), cols, std::move(out), "softmax", {a},
                       [an = a.node()](TensorNode& self) {
                           if (!an->requires_grad) return;
                           an->ensure_grad();
                           const std::size_t cols = self.cols;
                           for (std::size_t i = 0; i < self.rows; ++i) {
                               const double* s = self.value.data() + i * cols;
                               const double* g = self.grad.data() + i * cols;
                               double dot = 0.0;
                               for (std::size_t j = 0; j < cols; ++j) dot += g[j] * s[j];
                               for (std::size_t j = 0; j < cols; ++j)
                                   an->grad[i * cols + j] += s[j] * (g[j] - dot);
                           }
                       });
}

Tensor grad_reverse(const Tensor& a, double coeff) {
    std::vector<double> out = a.values();
    return make_result(a.rows(), a.cols(), std::move(out), "grad_reverse", {a},
                       [an = a.node(), coeff](TensorNode& self) {
                           if (!an->requires_grad) return;
                           an->ensure_grad();
                           for (std::size_t i = 0; i < self.grad.size(); ++i)
                               an->grad[i] -= coeff * self.grad[i];
                       });
}

} // namespace adarnn

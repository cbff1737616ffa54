#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <vector>

#include "errors.hpp"

namespace adarnn {

class Tape;

// One value in the computation graph: a dense row-major 2-D matrix of
// doubles, an optional gradient buffer of the same shape, and (when the
// value was produced by an op under an active tape) the parent references
// plus the closure that pushes gradients back to them.
struct TensorNode {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> value;
    std::vector<double> grad; // empty until first needed
    bool requires_grad = false;
    const char* op = "leaf";
    Tape* tape = nullptr; // tape the node is recorded on, null for leaves
    std::vector<std::shared_ptr<TensorNode>> parents;
    std::function<void(TensorNode&)> backprop;

    std::size_t size() const { return rows * cols; }
    void ensure_grad() {
        if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
    }
};

// Value-semantics handle onto a TensorNode.
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(std::size_t rows, std::size_t cols);
    static Tensor full(std::size_t rows, std::size_t cols, double v);
    static Tensor from_data(std::size_t rows, std::size_t cols, std::vector<double> data);
    static Tensor scalar(double v) { return from_data(1, 1, {v}); }

    bool defined() const { return node_ != nullptr; }
    std::size_t rows() const { return node_->rows; }
    std::size_t cols() const { return node_->cols; }
    std::size_t size() const { return node_->size(); }

    double at(std::size_t r, std::size_t c) const { return node_->value[r * node_->cols + c]; }
    // Scalar extraction; contract error unless the tensor is 1x1.
    double item() const;

    const std::vector<double>& values() const { return node_->value; }
    std::vector<double>& mutable_values() { return node_->value; }

    bool requires_grad() const { return node_->requires_grad; }
    Tensor& set_requires_grad(bool on) {
        node_->requires_grad = on;
        return *this;
    }

    bool has_grad() const { return !node_->grad.empty(); }
    const std::vector<double>& grad() const;
    void zero_grad() {
        if (!node_->grad.empty()) node_->grad.assign(node_->size(), 0.0);
    }

    std::shared_ptr<TensorNode> node() const { return node_; }
    explicit Tensor(std::shared_ptr<TensorNode> node) : node_(std::move(node)) {}

private:
    std::shared_ptr<TensorNode> node_;
};

// Define-by-run tape. Constructing a Tape makes it the active recording
// target for the current thread; destruction restores the previous one.
// Ops record their result node when a tape is active and any input
// requires a gradient, so recording order is execution order and parents
// always precede children.
class Tape {
public:
    Tape();
    ~Tape();
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    static Tape* active();

    void record(std::shared_ptr<TensorNode> node);
    std::size_t size() const { return order_.size(); }

    // Reverse-mode sweep from a scalar loss recorded on this tape. Every
    // recorded node is visited exactly once in reverse execution order;
    // gradients accumulate into every requires_grad tensor reachable from
    // the loss, including leaves used on multiple paths.
    void backward(const Tensor& loss);

private:
    std::vector<std::shared_ptr<TensorNode>> order_;
    Tape* prev_ = nullptr;
};

// A scope that suppresses recording, used for inference paths.
class NoTape {
public:
    NoTape();
    ~NoTape();
    NoTape(const NoTape&) = delete;
    NoTape& operator=(const NoTape&) = delete;

private:
    Tape* saved_ = nullptr;
};

// ---- forward op suite ----
// All ops validate shapes, evaluate eagerly and, in debug builds, reject
// non-finite outputs with a NumericError naming the op.

Tensor matmul(const Tensor& a, const Tensor& b);
// Same-shape add, or row-broadcast when b is 1 x cols (bias add).
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor divide(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double c);
Tensor add_scalar(const Tensor& a, double c);
Tensor sigmoid(const Tensor& a);
Tensor tanh(const Tensor& a);
Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);
Tensor sqrt(const Tensor& a);
Tensor square(const Tensor& a);
Tensor relu(const Tensor& a);
Tensor clamp(const Tensor& a, double lo, double hi);
Tensor mean(const Tensor& a);
Tensor sum(const Tensor& a);
Tensor transpose(const Tensor& a);
Tensor concat_rows(const Tensor& a, const Tensor& b);
Tensor slice_rows(const Tensor& a, std::size_t begin, std::size_t end);
Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t end);
Tensor softmax(const Tensor& a); // row-wise, max-shifted
// Identity forward; backward multiplies the incoming gradient by -coeff.
Tensor grad_reverse(const Tensor& a, double coeff);

} // namespace adarnn

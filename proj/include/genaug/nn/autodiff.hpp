#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "genaug/nn/tensor.hpp"

namespace genaug::nn {

// Reverse-mode autodiff over a dynamically built graph. Each forward op
// allocates a Node holding its output value and a closure that scatters the
// incoming gradient to the parents. Graphs are built per call (define-by-run)
// and freed when the last Var referencing them goes away.
struct Node {
    Tensor value;
    Tensor grad;  // allocated on demand during backward
    bool requires_grad = false;
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void(Node&)> backward_fn;

    Tensor& ensure_grad() {
        if (grad.size() != value.size()) grad = Tensor::zeros(value.shape());
        return grad;
    }
};

using NodePtr = std::shared_ptr<Node>;

class Var {
public:
    Var() = default;
    explicit Var(NodePtr n) : node_(std::move(n)) {}

    bool defined() const { return node_ != nullptr; }
    const Tensor& value() const { return node_->value; }
    Tensor& mutable_value() { return node_->value; }
    Tensor& grad() { return node_->ensure_grad(); }
    bool requires_grad() const { return node_ && node_->requires_grad; }
    const NodePtr& node() const { return node_; }

    float scalar() const { return node_->value[0]; }

private:
    NodePtr node_;
};

// Leaf with no gradient tracking (inputs, frozen tensors).
Var constant(Tensor value);
// Trainable leaf; backward accumulates into its grad buffer.
Var parameter(Tensor value);
// Detach: new constant leaf sharing a copy of the value.
Var stop_gradient(const Var& v);

// Runs reverse-mode accumulation from a scalar root (seed gradient 1).
void backward(const Var& root);

// Internal helper used by ops.cpp; exposed for custom ops in tests.
Var make_op(Tensor value, std::vector<NodePtr> parents, std::function<void(Node&)> backward_fn);

}  // namespace genaug::nn

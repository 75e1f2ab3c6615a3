#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "stroke/tensor.hpp"

namespace stroke {

// Trainable parameter: value, gradient accumulator and optimizer state, all
// the same shape.
template <typename T>
struct ParamT {
    TensorT<T> value;
    TensorT<T> grad;
    TensorT<T> velocity;

    ParamT() = default;
    explicit ParamT(TensorT<T> v) : value(std::move(v)), grad(value.shape), velocity(value.shape) {}

    void zero_grad() { grad.fill(T(0)); }
};

using Param = ParamT<float>;

template <typename T>
class TapeT;

// One recorded operation. Saved forward state lives in the backward closure's
// captures; `grad` is allocated lazily when the first gradient arrives.
template <typename T>
struct NodeT {
    TensorT<T> value;
    TensorT<T> grad;
    bool has_grad = false;
    const char* op = "";
    std::vector<NodeT*> inputs;
    std::function<void(TapeT<T>&, NodeT&)> backward; // empty for leaves
    ParamT<T>* bound_param = nullptr;

    void accumulate(const TensorT<T>& g) {
        if (!has_grad) {
            grad = TensorT<T>(value.shape);
            has_grad = true;
        }
        for (std::int64_t i = 0; i < grad.size(); ++i) {
            grad[i] += g[i];
        }
    }

    TensorT<T>& grad_buffer() {
        if (!has_grad) {
            grad = TensorT<T>(value.shape);
            has_grad = true;
        }
        return grad;
    }
};

// Linear tape of nodes in creation order. Creation order is a topological
// order of the DAG (inputs exist before their consumers), so backward is a
// single reverse sweep visiting each node exactly once.
template <typename T>
class TapeT {
public:
    NodeT<T>* leaf(TensorT<T> value) {
        return push("leaf", std::move(value), {}, nullptr);
    }

    // Leaf bound to a parameter: backward() adds the node's gradient into
    // param.grad.
    NodeT<T>* param(ParamT<T>& p) {
        NodeT<T>* n = push("param", p.value, {}, nullptr);
        n->bound_param = &p;
        return n;
    }

    NodeT<T>* record(const char* op, TensorT<T> value, std::vector<NodeT<T>*> inputs,
                     std::function<void(TapeT<T>&, NodeT<T>&)> backward) {
        return push(op, std::move(value), std::move(inputs), std::move(backward));
    }

    std::size_t node_count() const { return nodes_.size(); }

    // Seeds the loss gradient with 1, sweeps the tape in reverse, writes
    // parameter gradients, then frees every intermediate. The tape is empty
    // afterwards and ready for the next forward pass.
    void backward(NodeT<T>* loss) {
        if (nodes_.empty()) {
            throw StateError("backward: no forward pass recorded on this tape");
        }
        if (loss == nullptr || loss != nodes_.back().get()) {
            // Allow any node on the tape as root, not just the last one.
            const bool found = loss != nullptr && owns(loss);
            if (!found) {
                throw StateError("backward: loss node does not belong to this tape");
            }
        }
        if (loss->value.size() != 1) {
            throw DimensionError("backward: loss must be a scalar, got " + shape_str(loss->value.shape));
        }
        loss->accumulate(TensorT<T>({1}, T(1)));
        for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
            NodeT<T>& n = **it;
            if (n.has_grad && n.backward) {
                n.backward(*this, n);
            }
            if (n.has_grad && n.bound_param != nullptr) {
                ParamT<T>& p = *n.bound_param;
                for (std::int64_t i = 0; i < p.grad.size(); ++i) {
                    p.grad[i] += n.grad[i];
                }
            }
        }
        nodes_.clear();
    }

    void reset() { nodes_.clear(); }

private:
    bool owns(const NodeT<T>* n) const {
        for (const auto& up : nodes_) {
            if (up.get() == n) {
                return true;
            }
        }
        return false;
    }

    NodeT<T>* push(const char* op, TensorT<T> value, std::vector<NodeT<T>*> inputs,
                   std::function<void(TapeT<T>&, NodeT<T>&)> backward) {
        auto node = std::make_unique<NodeT<T>>();
        node->op = op;
        node->value = std::move(value);
        node->inputs = std::move(inputs);
        node->backward = std::move(backward);
        nodes_.push_back(std::move(node));
        return nodes_.back().get();
    }

    std::vector<std::unique_ptr<NodeT<T>>> nodes_;
};

using Tape = TapeT<float>;

} // namespace stroke

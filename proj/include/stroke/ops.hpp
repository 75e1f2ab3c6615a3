#pragma once

#include <utility>
#include <vector>

#include "stroke/kernels.hpp"
#include "stroke/tape.hpp"

// Differentiable graph ops. Each records its forward value plus a closure
// holding whatever the backward rule needs (argmax indices, attention mask,
// softmax rows). Input values are read back through the node pointers, which
// stay alive until the tape is swept.

namespace stroke {

template <typename T>
NodeT<T>* conv3d(TapeT<T>& tape, NodeT<T>* x, NodeT<T>* w, NodeT<T>* b) {
    TensorT<T> y = kernels::conv3d_fwd(x->value, w->value, b->value);
    return tape.record("conv3d", std::move(y), {x, w, b}, [](TapeT<T>&, NodeT<T>& self) {
        NodeT<T>* x = self.inputs[0];
        NodeT<T>* w = self.inputs[1];
        NodeT<T>* b = self.inputs[2];
        kernels::conv3d_bwd_data(w->value, self.grad, x->grad_buffer());
        kernels::conv3d_bwd_filter(x->value, self.grad, w->grad_buffer(), b->grad_buffer());
    });
}

template <typename T>
NodeT<T>* maxpool3d(TapeT<T>& tape, NodeT<T>* x, kernels::Dims3 window) {
    std::vector<std::int64_t> argmax;
    TensorT<T> y = kernels::maxpool3d_fwd(x->value, window, &argmax);
    return tape.record("maxpool3d", std::move(y), {x},
                       [argmax = std::move(argmax)](TapeT<T>&, NodeT<T>& self) {
                           kernels::maxpool3d_bwd(self.grad, argmax, self.inputs[0]->grad_buffer());
                       });
}

template <typename T>
NodeT<T>* attention(TapeT<T>& tape, NodeT<T>* x, NodeT<T>* mw, NodeT<T>* mb) {
    TensorT<T> mask;
    TensorT<T> y = kernels::attention_fwd(x->value, mw->value, mb->value, &mask);
    return tape.record("attention", std::move(y), {x, mw, mb},
                       [mask = std::move(mask)](TapeT<T>&, NodeT<T>& self) {
                           NodeT<T>* x = self.inputs[0];
                           NodeT<T>* mw = self.inputs[1];
                           NodeT<T>* mb = self.inputs[2];
                           kernels::attention_bwd(x->value, mw->value, mask, self.grad, x->grad_buffer(),
                                                  mw->grad_buffer(), mb->grad_buffer());
                       });
}

template <typename T>
NodeT<T>* linear(TapeT<T>& tape, NodeT<T>* x, NodeT<T>* w, NodeT<T>* b) {
    TensorT<T> y = kernels::linear_fwd(x->value, w->value, b->value);
    return tape.record("linear", std::move(y), {x, w, b}, [](TapeT<T>&, NodeT<T>& self) {
        NodeT<T>* x = self.inputs[0];
        NodeT<T>* w = self.inputs[1];
        NodeT<T>* b = self.inputs[2];
        kernels::linear_bwd(x->value, w->value, self.grad, x->grad_buffer(), w->grad_buffer(),
                            b->grad_buffer());
    });
}

template <typename T>
NodeT<T>* relu(TapeT<T>& tape, NodeT<T>* x) {
    return tape.record("relu", kernels::relu_fwd(x->value), {x}, [](TapeT<T>&, NodeT<T>& self) {
        kernels::relu_bwd(self.inputs[0]->value, self.grad, self.inputs[0]->grad_buffer());
    });
}

// (B,C,T,H,W) -> (B, C*T*H*W). Row-major data is unchanged.
template <typename T>
NodeT<T>* flatten(TapeT<T>& tape, NodeT<T>* x) {
    const std::int64_t B = x->value.shape[0];
    const std::int64_t F = x->value.size() / B;
    TensorT<T> y({B, F}, x->value.data);
    return tape.record("flatten", std::move(y), {x}, [](TapeT<T>&, NodeT<T>& self) {
        NodeT<T>* x = self.inputs[0];
        TensorT<T>& gx = x->grad_buffer();
        for (std::int64_t i = 0; i < gx.size(); ++i) {
            gx[i] += self.grad[i];
        }
    });
}

template <typename T>
NodeT<T>* softmax(TapeT<T>& tape, NodeT<T>* logits) {
    return tape.record("softmax", kernels::softmax_fwd(logits->value), {logits},
                       [](TapeT<T>&, NodeT<T>& self) {
                           kernels::softmax_bwd(self.value, self.grad, self.inputs[0]->grad_buffer());
                       });
}

// Scalar node holding the batch-summed loss.
template <typename T>
NodeT<T>* cross_entropy(TapeT<T>& tape, NodeT<T>* logits, std::vector<int> targets) {
    TensorT<T> probs;
    const T loss = kernels::cross_entropy_fwd(logits->value, targets, &probs);
    return tape.record("cross_entropy", TensorT<T>({1}, loss), {logits},
                       [probs = std::move(probs), targets = std::move(targets)](TapeT<T>&, NodeT<T>& self) {
                           kernels::cross_entropy_bwd(probs, targets, self.grad[0],
                                                      self.inputs[0]->grad_buffer());
                       });
}

} // namespace stroke

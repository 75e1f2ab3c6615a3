#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "stroke/tape.hpp"

namespace stroke {

// SGD with Nesterov momentum and decoupled-from-nothing weight decay folded
// into the gradient:
//   g' = grad + wd * theta
//   v  = mu * v + g'
//   theta -= lr * (g' + mu * v)
template <typename T>
void sgd_nesterov_step(const std::vector<ParamT<T>*>& params, double lr, double momentum,
                       double weight_decay) {
    if (lr <= 0) {
        throw ConfigError("sgd: learning rate must be positive, got " + std::to_string(lr));
    }
    const T mu = static_cast<T>(momentum);
    const T wd = static_cast<T>(weight_decay);
    const T step = static_cast<T>(lr);
    for (ParamT<T>* p : params) {
        T* th = p->value.ptr();
        T* g = p->grad.ptr();
        T* v = p->velocity.ptr();
        const std::int64_t n = p->value.size();
        for (std::int64_t i = 0; i < n; ++i) {
            const T gp = g[i] + wd * th[i];
            v[i] = mu * v[i] + gp;
            th[i] -= step * (gp + mu * v[i]);
        }
    }
}

// Central finite-difference audit of the analytic gradients, double
// precision. `build_loss` must record a fresh forward pass on the given tape
// and return the scalar loss node. Returns the max over every parameter
// element of |analytic - numeric| / max(|analytic|, |numeric|, 1e-12).
inline double gradient_check(const std::function<NodeT<double>*(TapeT<double>&)>& build_loss,
                             const std::vector<ParamT<double>*>& params, double eps = 1e-4) {
    TapeT<double> tape;
    for (ParamT<double>* p : params) {
        p->zero_grad();
    }
    tape.backward(build_loss(tape));
    std::vector<TensorT<double>> analytic;
    analytic.reserve(params.size());
    for (ParamT<double>* p : params) {
        analytic.push_back(p->grad);
    }

    const auto eval = [&]() {
        TapeT<double> t;
        const double v = build_loss(t)->value[0];
        t.reset();
        return v;
    };

    double worst = 0.0;
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        TensorT<double>& theta = params[pi]->value;
        for (std::int64_t i = 0; i < theta.size(); ++i) {
            const double saved = theta[i];
            theta[i] = saved + eps;
            const double fp = eval();
            theta[i] = saved - eps;
            const double fm = eval();
            theta[i] = saved;
            const double numeric = (fp - fm) / (2.0 * eps);
            const double a = analytic[pi][i];
            const double err = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-12});
            worst = std::max(worst, err);
        }
    }
    return worst;
}

} // namespace stroke

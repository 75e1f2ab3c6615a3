#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "stroke/ops.hpp"
#include "stroke/rng.hpp"

namespace stroke {

// One entry of the declarative layer list. Kernels and pool windows are
// stored (time, height, width); note the paper-style "7x5x3" reads
// width x height x time.
struct LayerSpec {
    enum class Kind { conv, pool, attention, flatten, linear };
    Kind kind = Kind::conv;
    std::array<std::int64_t, 3> kernel{0, 0, 0}; // conv
    std::array<std::int64_t, 3> window{0, 0, 0}; // pool
    std::int64_t channels_out = 0;               // conv / linear

    static LayerSpec conv(std::int64_t channels, std::array<std::int64_t, 3> kernel);
    static LayerSpec pool(std::array<std::int64_t, 3> window);
    static LayerSpec attention();
    static LayerSpec flatten();
    static LayerSpec linear(std::int64_t features);

    bool operator==(const LayerSpec&) const = default;
};

struct NetworkSpec {
    std::string name;                              // "v1" | "v2"
    std::vector<LayerSpec> layers;                 // conv/pool/attention blocks, then flatten + 2 linears
    std::array<std::int64_t, 4> input_shape{3, 96, 180, 320}; // (C,T,H,W)
    std::int64_t hidden_fc = 500;
    std::int64_t num_classes = 21;

    bool operator==(const NetworkSpec&) const = default;
};

struct BuildOptions {
    std::array<std::int64_t, 4> input_shape{3, 96, 180, 320};
    std::vector<std::int64_t> channels; // per block; empty selects the default plan
    std::int64_t hidden_fc = 500;
    std::int64_t num_classes = 21;
    std::int64_t spatial_pool_blocks = 2; // v1: leading blocks pool (1,2,2)
    std::uint64_t seed = 0;
};

// Fig-style architectures. v1: n conv+pool blocks with 3x3x3 kernels, the
// first `spatial_pool_blocks` pooling (1,2,2) and the rest (2,2,2),
// attention on all but the last two blocks. v2: first two blocks kernel
// (3,5,7) / pool (2,3,4), remaining blocks (3,3,3) / (2,2,2), attention on
// every block.
NetworkSpec v1_spec(const BuildOptions& opt = {});
NetworkSpec v2_spec(const BuildOptions& opt = {});

// Structural checks (odd kernels, trailing flatten+linear+linear, class
// count) plus a shape-propagation pass. Throws ConfigError.
void validate_spec(const NetworkSpec& spec);

// Output shape after every layer, starting from (C,T,H,W) without the batch
// axis; linear layers yield rank-1 shapes. Throws ConfigError naming the
// offending layer when a dimension collapses to zero.
std::vector<Shape> infer_shapes(const NetworkSpec& spec);

// Rendered table for the `shapes` subcommand.
std::string shape_table(const NetworkSpec& spec);

std::int64_t count_params(const NetworkSpec& spec);

// Serialization used by the checkpoint container (documented key=value
// lines).
std::string spec_to_text(const NetworkSpec& spec);
NetworkSpec spec_from_text(const std::string& text);

template <typename T>
struct ModelT {
    NetworkSpec spec;
    std::vector<ParamT<T>> params; // layer order: conv w,b | attention mw,mb | linear w,b
    std::uint64_t rng_seed = 0;

    std::vector<ParamT<T>*> param_ptrs() {
        std::vector<ParamT<T>*> out;
        out.reserve(params.size());
        for (auto& p : params) {
            out.push_back(&p);
        }
        return out;
    }

    void zero_grads() {
        for (auto& p : params) {
            p.zero_grad();
        }
    }

    // Inference forward, no tape. Rectifier after every conv and after the
    // hidden (non-final) linear.
    TensorT<T> forward(const TensorT<T>& batch) const {
        check_batch(batch);
        TensorT<T> cur = batch;
        std::size_t pi = 0;
        std::size_t linear_seen = 0;
        const std::size_t linear_total = count_linears();
        for (const LayerSpec& l : spec.layers) {
            switch (l.kind) {
            case LayerSpec::Kind::conv:
                cur = kernels::relu_fwd(kernels::conv3d_fwd(cur, params[pi].value, params[pi + 1].value));
                pi += 2;
                break;
            case LayerSpec::Kind::pool:
                cur = kernels::maxpool3d_fwd(cur, {l.window[0], l.window[1], l.window[2]}, nullptr);
                break;
            case LayerSpec::Kind::attention:
                cur = kernels::attention_fwd(cur, params[pi].value, params[pi + 1].value);
                pi += 2;
                break;
            case LayerSpec::Kind::flatten: {
                const std::int64_t B = cur.shape[0];
                cur = TensorT<T>({B, cur.size() / B}, std::move(cur.data));
                break;
            }
            case LayerSpec::Kind::linear:
                cur = kernels::linear_fwd(cur, params[pi].value, params[pi + 1].value);
                pi += 2;
                ++linear_seen;
                if (linear_seen < linear_total) {
                    cur = kernels::relu_fwd(cur);
                }
                break;
            }
        }
        return cur;
    }

    // Recorded forward for training; returns the logits node.
    NodeT<T>* forward(TapeT<T>& tape, const TensorT<T>& batch) {
        check_batch(batch);
        NodeT<T>* cur = tape.leaf(batch);
        std::size_t pi = 0;
        std::size_t linear_seen = 0;
        const std::size_t linear_total = count_linears();
        for (const LayerSpec& l : spec.layers) {
            switch (l.kind) {
            case LayerSpec::Kind::conv:
                cur = relu(tape, conv3d(tape, cur, tape.param(params[pi]), tape.param(params[pi + 1])));
                pi += 2;
                break;
            case LayerSpec::Kind::pool:
                cur = maxpool3d(tape, cur, {l.window[0], l.window[1], l.window[2]});
                break;
            case LayerSpec::Kind::attention:
                cur = attention(tape, cur, tape.param(params[pi]), tape.param(params[pi + 1]));
                pi += 2;
                break;
            case LayerSpec::Kind::flatten:
                cur = flatten(tape, cur);
                break;
            case LayerSpec::Kind::linear:
                cur = linear(tape, cur, tape.param(params[pi]), tape.param(params[pi + 1]));
                pi += 2;
                ++linear_seen;
                if (linear_seen < linear_total) {
                    cur = relu(tape, cur);
                }
                break;
            }
        }
        return cur;
    }

private:
    std::size_t count_linears() const {
        std::size_t n = 0;
        for (const auto& l : spec.layers) {
            if (l.kind == LayerSpec::Kind::linear) {
                ++n;
            }
        }
        return n;
    }

    void check_batch(const TensorT<T>& batch) const {
        if (batch.rank() != 5 || batch.shape[1] != spec.input_shape[0] || batch.shape[2] != spec.input_shape[1] ||
            batch.shape[3] != spec.input_shape[2] || batch.shape[4] != spec.input_shape[3]) {
            throw DimensionError("model " + spec.name + ": batch " + shape_str(batch.shape) +
                                 " does not match input (B," + std::to_string(spec.input_shape[0]) + "," +
                                 std::to_string(spec.input_shape[1]) + "," + std::to_string(spec.input_shape[2]) +
                                 "," + std::to_string(spec.input_shape[3]) + ")");
        }
    }
};

using Model = ModelT<float>;
using Model64 = ModelT<double>;

// Seeded scaled-normal init: weights N(0, sqrt(2/fan_in)), biases zero.
template <typename T>
ModelT<T> build_model(const NetworkSpec& spec, std::uint64_t seed) {
    validate_spec(spec);
    ModelT<T> model;
    model.spec = spec;
    model.rng_seed = seed;
    Rng rng(seed);

    const auto normal_tensor = [&rng](const Shape& shape, double stddev) {
        TensorT<T> t(shape);
        for (std::int64_t i = 0; i < t.size(); ++i) {
            t[i] = static_cast<T>(rng.normal() * stddev);
        }
        return t;
    };

    std::int64_t channels = spec.input_shape[0];
    std::int64_t features = -1;
    const std::vector<Shape> shapes = infer_shapes(spec);
    for (std::size_t li = 0; li < spec.layers.size(); ++li) {
        const LayerSpec& l = spec.layers[li];
        switch (l.kind) {
        case LayerSpec::Kind::conv: {
            const double fan_in = static_cast<double>(channels * l.kernel[0] * l.kernel[1] * l.kernel[2]);
            model.params.emplace_back(normal_tensor({l.channels_out, channels, l.kernel[0], l.kernel[1], l.kernel[2]},
                                                    std::sqrt(2.0 / fan_in)));
            model.params.emplace_back(ParamT<T>(TensorT<T>({l.channels_out})));
            channels = l.channels_out;
            break;
        }
        case LayerSpec::Kind::attention:
            model.params.emplace_back(normal_tensor({1, channels, 1, 1, 1}, std::sqrt(2.0 / static_cast<double>(channels))));
            model.params.emplace_back(ParamT<T>(TensorT<T>({1})));
            break;
        case LayerSpec::Kind::flatten:
            features = numel(shapes[li]);
            break;
        case LayerSpec::Kind::linear: {
            model.params.emplace_back(
                normal_tensor({l.channels_out, features}, std::sqrt(2.0 / static_cast<double>(features))));
            model.params.emplace_back(ParamT<T>(TensorT<T>({l.channels_out})));
            features = l.channels_out;
            break;
        }
        case LayerSpec::Kind::pool:
            break;
        }
    }
    return model;
}

inline Model build_v1(const BuildOptions& opt = {}) { return build_model<float>(v1_spec(opt), opt.seed); }
inline Model build_v2(const BuildOptions& opt = {}) { return build_model<float>(v2_spec(opt), opt.seed); }

// float -> double copy for the gradient checker.
template <typename To, typename From>
ModelT<To> cast_model(const ModelT<From>& m) {
    ModelT<To> out;
    out.spec = m.spec;
    out.rng_seed = m.rng_seed;
    out.params.reserve(m.params.size());
    for (const auto& p : m.params) {
        out.params.emplace_back(cast<To>(p.value));
    }
    return out;
}

} // namespace stroke

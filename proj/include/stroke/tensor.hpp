#pragma once

#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "stroke/errors.hpp"

namespace stroke {

using Shape = std::vector<std::int64_t>;

inline std::int64_t numel(const Shape& shape) {
    std::int64_t n = 1;
    for (const auto d : shape) {
        n *= d;
    }
    return n;
}

inline Shape strides_of(const Shape& shape) {
    Shape s(shape.size(), 1);
    for (std::int64_t i = static_cast<std::int64_t>(shape.size()) - 2; i >= 0; --i) {
        s[static_cast<std::size_t>(i)] = s[static_cast<std::size_t>(i + 1)] * shape[static_cast<std::size_t>(i + 1)];
    }
    return s;
}

inline std::string shape_str(const Shape& shape) {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i != 0) {
            os << ',';
        }
        os << shape[i];
    }
    os << ')';
    return os.str();
}

// Dense row-major N-d array (last axis fastest). Value semantics; the dtype
// is the template parameter, so mixed-precision arithmetic is rejected at
// compile time. float runs training and inference, double the gradient
// checker.
template <typename T>
struct TensorT {
    Shape shape;
    std::vector<T> data;

    TensorT() = default;

    explicit TensorT(Shape s) : shape(std::move(s)), data(checked_size(shape), T{0}) {}

    TensorT(Shape s, T fill) : shape(std::move(s)), data(checked_size(shape), fill) {}

    TensorT(Shape s, std::vector<T> d) : shape(std::move(s)), data(std::move(d)) {
        if (static_cast<std::int64_t>(data.size()) != numel(shape)) {
            throw DimensionError("tensor data length " + std::to_string(data.size()) +
                                 " does not match shape " + shape_str(shape));
        }
    }

    std::int64_t size() const { return static_cast<std::int64_t>(data.size()); }
    std::size_t rank() const { return shape.size(); }

    std::int64_t dim(std::size_t axis) const {
        if (axis >= shape.size()) {
            throw DimensionError("axis " + std::to_string(axis) + " out of range for " + shape_str(shape));
        }
        return shape[axis];
    }

    T& operator[](std::int64_t i) { return data[static_cast<std::size_t>(i)]; }
    const T& operator[](std::int64_t i) const { return data[static_cast<std::size_t>(i)]; }

    T* ptr() { return data.data(); }
    const T* ptr() const { return data.data(); }

    void fill(T v) { std::fill(data.begin(), data.end(), v); }

    bool same_shape(const TensorT& other) const { return shape == other.shape; }

private:
    static std::size_t checked_size(const Shape& s) {
        for (const auto d : s) {
            if (d <= 0) {
                throw DimensionError("non-positive dimension in shape " + shape_str(s));
            }
        }
        return static_cast<std::size_t>(numel(s));
    }
};

using Tensor = TensorT<float>;
using Tensor64 = TensorT<double>;

template <typename T>
TensorT<T> zeros_like(const TensorT<T>& t) {
    return TensorT<T>(t.shape);
}

template <typename To, typename From>
TensorT<To> cast(const TensorT<From>& t) {
    TensorT<To> out(t.shape);
    for (std::int64_t i = 0; i < t.size(); ++i) {
        out[i] = static_cast<To>(t[i]);
    }
    return out;
}

template <typename T>
void require_same_shape(const TensorT<T>& a, const TensorT<T>& b, const char* what) {
    if (!a.same_shape(b)) {
        throw DimensionError(std::string(what) + ": shape mismatch " + shape_str(a.shape) + " vs " +
                             shape_str(b.shape));
    }
}

} // namespace stroke

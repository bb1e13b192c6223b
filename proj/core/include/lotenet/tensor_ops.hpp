#pragma once

#include <initializer_list>
#include <span>
#include <vector>

#include "lotenet/rng.hpp"
#include "lotenet/tensor.hpp"

namespace lotenet {

using AxisList = std::vector<std::size_t>;

/// Rank-2 row-major matrix product (m x k) . (k x n). The single optimized
/// kernel every contraction reduces to; adds m*k*n to the global MAC counter.
template <typename T>
TensorT<T> matmul(const TensorT<T>& a, const TensorT<T>& b);

/// General pairwise contraction: sums over the paired axes, implemented as
/// permute -> reshape -> matmul -> reshape. The result carries a's free axes
/// (in a's order) followed by b's free axes (in b's order).
template <typename T>
TensorT<T> contract(const TensorT<T>& a, const TensorT<T>& b,
                    std::span<const std::size_t> axes_a,
                    std::span<const std::size_t> axes_b);

template <typename T>
TensorT<T> contract(const TensorT<T>& a, const TensorT<T>& b,
                    std::initializer_list<std::size_t> axes_a,
                    std::initializer_list<std::size_t> axes_b) {
    return contract(a, b, std::span<const std::size_t>(axes_a.begin(), axes_a.size()),
                    std::span<const std::size_t>(axes_b.begin(), axes_b.size()));
}

/// tr(a . b) for a (n x m) and b (m x n), returned as a rank-0 tensor.
template <typename T>
TensorT<T> trace_product(const TensorT<T>& a, const TensorT<T>& b);

/// Same elements under a new shape (element counts must match).
template <typename T>
TensorT<T> reshape(const TensorT<T>& a, Shape shape);

/// Axis permutation: result axis i is input axis perm[i].
template <typename T>
TensorT<T> permute(const TensorT<T>& a, std::span<const std::size_t> perm);

template <typename T>
TensorT<T> permute(const TensorT<T>& a, std::initializer_list<std::size_t> perm) {
    return permute(a, std::span<const std::size_t>(perm.begin(), perm.size()));
}

template <typename T>
TensorT<T> add(const TensorT<T>& a, const TensorT<T>& b);

template <typename T>
TensorT<T> sub(const TensorT<T>& a, const TensorT<T>& b);

/// Elementwise (Hadamard) product.
template <typename T>
TensorT<T> mul(const TensorT<T>& a, const TensorT<T>& b);

template <typename T>
TensorT<T> scale(const TensorT<T>& a, T factor);

/// Stack equally-shaped tensors along a new axis at position `axis`.
template <typename T>
TensorT<T> stack(std::span<const TensorT<T>> parts, std::size_t axis);

/// Rectangular sub-block copy: start and extent per axis.
template <typename T>
TensorT<T> slice(const TensorT<T>& a, std::span<const std::size_t> start,
                 std::span<const std::size_t> extent);

template <typename T>
TensorT<T> slice(const TensorT<T>& a, std::initializer_list<std::size_t> start,
                 std::initializer_list<std::size_t> extent) {
    return slice(a, std::span<const std::size_t>(start.begin(), start.size()),
                 std::span<const std::size_t>(extent.begin(), extent.size()));
}

/// Adjoint of slice: place `block` into zeros of `full` shape at `start`.
template <typename T>
TensorT<T> unslice(const TensorT<T>& block, const Shape& full,
                   std::span<const std::size_t> start);

/// Sum of all elements as a rank-0 tensor.
template <typename T>
TensorT<T> sum_all(const TensorT<T>& a);

/// Elementwise logistic squash 1 / (1 + exp(-x)), numerically stable.
template <typename T>
TensorT<T> sigmoid(const TensorT<T>& a);

template <typename T>
TensorT<T> random_uniform(Shape shape, Rng& rng, T lo, T hi);

template <typename T>
TensorT<T> random_normal(Shape shape, Rng& rng, T mean, T stddev);

}  // namespace lotenet

#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <vector>

#include "lotenet/tensor.hpp"

namespace lotenet {

inline constexpr std::size_t kNoNode = static_cast<std::size_t>(-1);

template <typename T>
class TapeT;

/// A tensor value optionally attached to a tape node. Vars with a null tape
/// are constants: they flow through ops but receive no gradient.
template <typename T>
struct VarT {
    TensorT<T> value;
    TapeT<T>* tape = nullptr;
    std::size_t id = kNoNode;

    VarT() = default;
    VarT(TensorT<T> v, TapeT<T>* t, std::size_t node_id)
        : value(std::move(v)), tape(t), id(node_id) {}

    static VarT constant(TensorT<T> v) { return VarT(std::move(v), nullptr, kNoNode); }
    bool on_tape() const { return tape != nullptr; }
    const Shape& shape() const { return value.shape(); }
};

/// Reverse-mode tape. Nodes are appended in forward order; each stores its
/// input node ids and a closure producing input gradients from the upstream
/// gradient. Single-writer: one forward pass owns one tape.
template <typename T>
class TapeT {
  public:
    // One gradient per input; kNoNode inputs mark constant operands whose
    // slot is ignored during routing.
    using Vjp = std::function<std::vector<TensorT<T>>(const TensorT<T>& upstream)>;

    TapeT() = default;
    TapeT(const TapeT&) = delete;
    TapeT& operator=(const TapeT&) = delete;

    /// Registers a differentiable parameter. Registration order is the
    /// canonical parameter order used for gradients and optimizer state.
    VarT<T> leaf(TensorT<T> value);

    /// Appends an interior node. Extension point for fused ops.
    VarT<T> record(TensorT<T> value, std::vector<std::size_t> inputs, Vjp vjp);

    std::size_t leaf_count() const { return leaves_.size(); }
    std::size_t node_count() const { return nodes_.size(); }

    /// Accumulates dLoss/dleaf for every registered leaf, in registration
    /// order; unused leaves get zeros of their shape. Consumes the tape:
    /// a second backward call is a usage error.
    std::vector<TensorT<T>> backward(const VarT<T>& loss);

  private:
    struct Node {
        std::vector<std::size_t> inputs;
        Vjp vjp;
        Shape shape;
    };
    std::vector<Node> nodes_;
    std::vector<std::size_t> leaves_;
    bool consumed_ = false;
};

using TapeF = TapeT<float>;
using TapeD = TapeT<double>;
using VarF = VarT<float>;
using VarD = VarT<double>;

template <typename T>
VarT<T> contract(const VarT<T>& a, const VarT<T>& b, std::span<const std::size_t> axes_a,
                 std::span<const std::size_t> axes_b);

template <typename T>
VarT<T> contract(const VarT<T>& a, const VarT<T>& b, std::initializer_list<std::size_t> axes_a,
                 std::initializer_list<std::size_t> axes_b) {
    return contract(a, b, std::span<const std::size_t>(axes_a.begin(), axes_a.size()),
                    std::span<const std::size_t>(axes_b.begin(), axes_b.size()));
}

template <typename T>
VarT<T> add(const VarT<T>& a, const VarT<T>& b);

template <typename T>
VarT<T> sub(const VarT<T>& a, const VarT<T>& b);

template <typename T>
VarT<T> mul(const VarT<T>& a, const VarT<T>& b);

template <typename T>
VarT<T> scale(const VarT<T>& a, T factor);

template <typename T>
VarT<T> reshape(const VarT<T>& a, Shape shape);

template <typename T>
VarT<T> permute(const VarT<T>& a, std::span<const std::size_t> perm);

template <typename T>
VarT<T> permute(const VarT<T>& a, std::initializer_list<std::size_t> perm) {
    return permute(a, std::span<const std::size_t>(perm.begin(), perm.size()));
}

template <typename T>
VarT<T> stack(std::span<const VarT<T>> parts, std::size_t axis);

template <typename T>
VarT<T> slice(const VarT<T>& a, std::span<const std::size_t> start,
              std::span<const std::size_t> extent);

template <typename T>
VarT<T> slice(const VarT<T>& a, std::initializer_list<std::size_t> start,
              std::initializer_list<std::size_t> extent) {
    return slice(a, std::span<const std::size_t>(start.begin(), start.size()),
                 std::span<const std::size_t>(extent.begin(), extent.size()));
}

template <typename T>
VarT<T> sum_all(const VarT<T>& a);

template <typename T>
VarT<T> sigmoid(const VarT<T>& a);

}  // namespace lotenet

#include "lotenet/autodiff.hpp"

#include <algorithm>
#include <optional>
#include <sstream>
#include <utility>

#include "lotenet/errors.hpp"
#include "lotenet/tensor_ops.hpp"

namespace lotenet {

namespace {

template <typename T>
TapeT<T>* common_tape(const VarT<T>& a, const VarT<T>& b) {
    if (a.tape && b.tape && a.tape != b.tape)
        throw UsageError("operands recorded on different tapes");
    return a.tape ? a.tape : b.tape;
}

std::vector<std::size_t> sorted_rank(const std::vector<std::size_t>& axes) {
    // rank_of[i]: position of axes[i] among the sorted axes.
    std::vector<std::size_t> sorted(axes);
    std::sort(sorted.begin(), sorted.end());
    std::vector<std::size_t> out(axes.size());
    for (std::size_t i = 0; i < axes.size(); ++i)
        out[i] = static_cast<std::size_t>(
            std::lower_bound(sorted.begin(), sorted.end(), axes[i]) - sorted.begin());
    return out;
}

std::vector<std::size_t> complement(std::size_t rank, const std::vector<std::size_t>& bound) {
    std::vector<bool> is_bound(rank, false);
    for (std::size_t ax : bound) is_bound[ax] = true;
    std::vector<std::size_t> out;
    for (std::size_t ax = 0; ax < rank; ++ax)
        if (!is_bound[ax]) out.push_back(ax);
    return out;
}

// Gradient of contract(a, b, axes_a, axes_b) with respect to a: contract the
// upstream against b over b's free axes, then permute back into a's layout.
// Symmetric helper; swap roles for the b gradient.
template <typename T>
TensorT<T> contract_grad_lhs(const TensorT<T>& up, const TensorT<T>& other,
                             std::size_t rank_self, const std::vector<std::size_t>& axes_self,
                             const std::vector<std::size_t>& axes_other,
                             const std::vector<std::size_t>& free_self,
                             const std::vector<std::size_t>& free_other,
                             std::size_t up_offset_of_other) {
    std::vector<std::size_t> up_axes(free_other.size());
    for (std::size_t i = 0; i < free_other.size(); ++i) up_axes[i] = up_offset_of_other + i;
    TensorT<T> g = contract(up, other, std::span<const std::size_t>(up_axes),
                            std::span<const std::size_t>(free_other));
    // g axes: self's free dims (free_self order), then bound dims in
    // ascending order of the other operand's axis numbers.
    const std::vector<std::size_t> bound_pos = sorted_rank(axes_other);
    std::vector<std::size_t> perm(rank_self);
    for (std::size_t i = 0; i < free_self.size(); ++i) perm[free_self[i]] = i;
    for (std::size_t j = 0; j < axes_self.size(); ++j)
        perm[axes_self[j]] = free_self.size() + bound_pos[j];
    return permute(g, std::span<const std::size_t>(perm));
}

}  // namespace

template <typename T>
VarT<T> TapeT<T>::leaf(TensorT<T> value) {
    if (consumed_) throw UsageError("tape already consumed by backward");
    const std::size_t id = nodes_.size();
    nodes_.push_back(Node{{}, nullptr, value.shape()});
    leaves_.push_back(id);
    return VarT<T>(std::move(value), this, id);
}

template <typename T>
VarT<T> TapeT<T>::record(TensorT<T> value, std::vector<std::size_t> inputs, Vjp vjp) {
    if (consumed_) throw UsageError("tape already consumed by backward");
    for (std::size_t in : inputs) {
        if (in != kNoNode && in >= nodes_.size())
            throw UsageError("node input does not precede it on the tape");
    }
    const std::size_t id = nodes_.size();
    nodes_.push_back(Node{std::move(inputs), std::move(vjp), value.shape()});
    return VarT<T>(std::move(value), this, id);
}

template <typename T>
std::vector<TensorT<T>> TapeT<T>::backward(const VarT<T>& loss) {
    if (consumed_) throw UsageError("tape already consumed by backward");
    if (loss.tape != this || loss.id == kNoNode)
        throw UsageError("loss was not produced under this tape");
    if (loss.value.rank() != 0) {
        std::ostringstream os;
        os << "backward: loss must be a scalar, got shape " << loss.value.shape().str();
        throw ShapeError(os.str());
    }
    consumed_ = true;

    std::vector<std::optional<TensorT<T>>> grad(nodes_.size());
    grad[loss.id] = TensorT<T>::scalar(T(1));

    for (std::size_t id = loss.id + 1; id-- > 0;) {
        if (!grad[id] || !nodes_[id].vjp) continue;
        const std::vector<TensorT<T>> gs = nodes_[id].vjp(*grad[id]);
        const std::vector<std::size_t>& ins = nodes_[id].inputs;
        for (std::size_t j = 0; j < ins.size(); ++j) {
            if (ins[j] == kNoNode) continue;
            if (!grad[ins[j]])
                grad[ins[j]] = gs[j];
            else
                grad[ins[j]] = add(*grad[ins[j]], gs[j]);
        }
        grad[id].reset();  // frees intermediates as the sweep passes them
    }

    std::vector<TensorT<T>> out;
    out.reserve(leaves_.size());
    for (std::size_t id : leaves_)
        out.push_back(grad[id] ? *grad[id] : TensorT<T>(nodes_[id].shape));
    nodes_.clear();
    return out;
}

template <typename T>
VarT<T> contract(const VarT<T>& a, const VarT<T>& b, std::span<const std::size_t> axes_a,
                 std::span<const std::size_t> axes_b) {
    TensorT<T> value = contract(a.value, b.value, axes_a, axes_b);
    TapeT<T>* tape = common_tape(a, b);
    if (!tape) return VarT<T>::constant(std::move(value));

    const std::vector<std::size_t> va(axes_a.begin(), axes_a.end());
    const std::vector<std::size_t> vb(axes_b.begin(), axes_b.end());
    const std::vector<std::size_t> fa = complement(a.value.rank(), va);
    const std::vector<std::size_t> fb = complement(b.value.rank(), vb);
    const TensorT<T> av = a.value;
    const TensorT<T> bv = b.value;

    return tape->record(
        std::move(value), {a.id, b.id},
        [va, vb, fa, fb, av, bv](const TensorT<T>& up) {
            std::vector<TensorT<T>> gs;
            gs.reserve(2);
            gs.push_back(contract_grad_lhs(up, bv, av.rank(), va, vb, fa, fb, fa.size()));
            gs.push_back(contract_grad_lhs(up, av, bv.rank(), vb, va, fb, fa, 0));
            return gs;
        });
}

template <typename T>
VarT<T> add(const VarT<T>& a, const VarT<T>& b) {
    TensorT<T> value = add(a.value, b.value);
    TapeT<T>* tape = common_tape(a, b);
    if (!tape) return VarT<T>::constant(std::move(value));
    return tape->record(std::move(value), {a.id, b.id}, [](const TensorT<T>& up) {
        return std::vector<TensorT<T>>{up, up};
    });
}

template <typename T>
VarT<T> sub(const VarT<T>& a, const VarT<T>& b) {
    TensorT<T> value = sub(a.value, b.value);
    TapeT<T>* tape = common_tape(a, b);
    if (!tape) return VarT<T>::constant(std::move(value));
    return tape->record(std::move(value), {a.id, b.id}, [](const TensorT<T>& up) {
        return std::vector<TensorT<T>>{up, scale(up, T(-1))};
    });
}

template <typename T>
VarT<T> mul(const VarT<T>& a, const VarT<T>& b) {
    TensorT<T> value = mul(a.value, b.value);
    TapeT<T>* tape = common_tape(a, b);
    if (!tape) return VarT<T>::constant(std::move(value));
    const TensorT<T> av = a.value;
    const TensorT<T> bv = b.value;
    return tape->record(std::move(value), {a.id, b.id}, [av, bv](const TensorT<T>& up) {
        return std::vector<TensorT<T>>{mul(up, bv), mul(up, av)};
    });
}

template <typename T>
VarT<T> scale(const VarT<T>& a, T factor) {
    TensorT<T> value = scale(a.value, factor);
    if (!a.tape) return VarT<T>::constant(std::move(value));
    return a.tape->record(std::move(value), {a.id}, [factor](const TensorT<T>& up) {
        return std::vector<TensorT<T>>{scale(up, factor)};
    });
}

template <typename T>
VarT<T> reshape(const VarT<T>& a, Shape shape) {
    TensorT<T> value = reshape(a.value, shape);
    if (!a.tape) return VarT<T>::constant(std::move(value));
    const Shape original = a.value.shape();
    return a.tape->record(std::move(value), {a.id}, [original](const TensorT<T>& up) {
        return std::vector<TensorT<T>>{reshape(up, original)};
    });
}

template <typename T>
VarT<T> permute(const VarT<T>& a, std::span<const std::size_t> perm) {
    TensorT<T> value = permute(a.value, perm);
    if (!a.tape) return VarT<T>::constant(std::move(value));
    std::vector<std::size_t> inverse(perm.size());
    for (std::size_t i = 0; i < perm.size(); ++i) inverse[perm[i]] = i;
    return a.tape->record(std::move(value), {a.id}, [inverse](const TensorT<T>& up) {
        return std::vector<TensorT<T>>{permute(up, std::span<const std::size_t>(inverse))};
    });
}

template <typename T>
VarT<T> stack(std::span<const VarT<T>> parts, std::size_t axis) {
    if (parts.empty()) throw UsageError("stack: no tensors given");
    std::vector<TensorT<T>> values;
    values.reserve(parts.size());
    TapeT<T>* tape = nullptr;
    std::vector<std::size_t> inputs;
    inputs.reserve(parts.size());
    for (const VarT<T>& p : parts) {
        values.push_back(p.value);
        if (p.tape) {
            if (tape && tape != p.tape) throw UsageError("operands recorded on different tapes");
            tape = p.tape;
        }
        inputs.push_back(p.id);
    }
    TensorT<T> value = stack(std::span<const TensorT<T>>(values), axis);
    if (!tape) return VarT<T>::constant(std::move(value));

    const Shape part_shape = parts[0].value.shape();
    const std::size_t n = parts.size();
    return tape->record(std::move(value), std::move(inputs),
                        [axis, n, part_shape](const TensorT<T>& up) {
                            std::vector<TensorT<T>> gs;
                            gs.reserve(n);
                            const std::size_t rank = up.rank();
                            std::vector<std::size_t> start(rank, 0), extent(rank);
                            for (std::size_t i = 0; i < rank; ++i)
                                extent[i] = up.shape().extent(i);
                            extent[axis] = 1;
                            for (std::size_t i = 0; i < n; ++i) {
                                start[axis] = i;
                                gs.push_back(slice(up, std::span<const std::size_t>(start),
                                                   std::span<const std::size_t>(extent))
                                                 .with_shape(part_shape));
                            }
                            return gs;
                        });
}

template <typename T>
VarT<T> slice(const VarT<T>& a, std::span<const std::size_t> start,
              std::span<const std::size_t> extent) {
    TensorT<T> value = slice(a.value, start, extent);
    if (!a.tape) return VarT<T>::constant(std::move(value));
    const Shape full = a.value.shape();
    const std::vector<std::size_t> s(start.begin(), start.end());
    return a.tape->record(std::move(value), {a.id}, [full, s](const TensorT<T>& up) {
        return std::vector<TensorT<T>>{unslice(up, full, std::span<const std::size_t>(s))};
    });
}

template <typename T>
VarT<T> sum_all(const VarT<T>& a) {
    TensorT<T> value = sum_all(a.value);
    if (!a.tape) return VarT<T>::constant(std::move(value));
    const Shape shape = a.value.shape();
    return a.tape->record(std::move(value), {a.id}, [shape](const TensorT<T>& up) {
        return std::vector<TensorT<T>>{TensorT<T>::full(shape, up[0])};
    });
}

template <typename T>
VarT<T> sigmoid(const VarT<T>& a) {
    TensorT<T> value = sigmoid(a.value);
    if (!a.tape) return VarT<T>::constant(std::move(value));
    const TensorT<T> s = value;
    return a.tape->record(std::move(value), {a.id}, [s](const TensorT<T>& up) {
        TensorT<T> one_minus = sub(TensorT<T>::full(s.shape(), T(1)), s);
        return std::vector<TensorT<T>>{mul(up, mul(s, one_minus))};
    });
}

#define LOTENET_INSTANTIATE_AUTODIFF(T)                                                      \
    template class TapeT<T>;                                                                 \
    template VarT<T> contract<T>(const VarT<T>&, const VarT<T>&,                             \
                                 std::span<const std::size_t>, std::span<const std::size_t>); \
    template VarT<T> add<T>(const VarT<T>&, const VarT<T>&);                                 \
    template VarT<T> sub<T>(const VarT<T>&, const VarT<T>&);                                 \
    template VarT<T> mul<T>(const VarT<T>&, const VarT<T>&);                                 \
    template VarT<T> scale<T>(const VarT<T>&, T);                                            \
    template VarT<T> reshape<T>(const VarT<T>&, Shape);                                      \
    template VarT<T> permute<T>(const VarT<T>&, std::span<const std::size_t>);               \
    template VarT<T> stack<T>(std::span<const VarT<T>>, std::size_t);                        \
    template VarT<T> slice<T>(const VarT<T>&, std::span<const std::size_t>,                  \
                              std::span<const std::size_t>);                                 \
    template VarT<T> sum_all<T>(const VarT<T>&);                                             \
    template VarT<T> sigmoid<T>(const VarT<T>&);

LOTENET_INSTANTIATE_AUTODIFF(float)
LOTENET_INSTANTIATE_AUTODIFF(double)

#undef LOTENET_INSTANTIATE_AUTODIFF

}  // namespace lotenet

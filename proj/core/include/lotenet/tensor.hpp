#pragma once

#include <cmath>
#include <memory>
#include <span>
#include <vector>

#include "lotenet/errors.hpp"
#include "lotenet/shape.hpp"

namespace lotenet {

/// Dense tensor of scalars in contiguous row-major order (last index
/// fastest). Immutable after construction; copies share the buffer, so a
/// copy or reshape is O(1) and tensors can move freely between threads.
///
/// Instantiated for float (narrow) and double (wide).
template <typename T>
class TensorT {
public:
    using Scalar = T;

    /// Rank-0 zero.
    TensorT() : TensorT(Shape{}) {}

    /// Zeros of the given shape.
    explicit TensorT(Shape shape)
        : shape_(std::move(shape)),
          data_(std::make_shared<const std::vector<T>>(shape_.count(), T(0))) {}

    TensorT(Shape shape, std::vector<T> values)
        : shape_(std::move(shape)),
          data_(std::make_shared<const std::vector<T>>(std::move(values))) {
        if (data_->size() != shape_.count()) {
            throw ShapeError("tensor: " + std::to_string(data_->size()) +
                             " values for shape " + shape_.str() + " (needs " +
                             std::to_string(shape_.count()) + ")");
        }
    }

    static TensorT full(Shape shape, T value) {
        std::vector<T> v(shape.count(), value);
        return TensorT(std::move(shape), std::move(v));
    }

    static TensorT scalar(T value) { return TensorT(Shape{}, {value}); }

    static TensorT identity(std::size_t n) {
        std::vector<T> v(n * n, T(0));
        for (std::size_t i = 0; i < n; ++i) v[i * n + i] = T(1);
        return TensorT(Shape{n, n}, std::move(v));
    }

    template <typename Fn>
    static TensorT generate(Shape shape, Fn&& fn) {
        std::vector<T> v(shape.count());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = fn(i);
        return TensorT(std::move(shape), std::move(v));
    }

    const Shape& shape() const { return shape_; }
    std::size_t rank() const { return shape_.rank(); }
    std::size_t count() const { return shape_.count(); }

    std::span<const T> data() const { return {data_->data(), data_->size()}; }

    T operator[](std::size_t flat) const { return (*data_)[flat]; }

    T at(std::initializer_list<std::size_t> idx) const {
        if (idx.size() != rank()) {
            throw IndexError("tensor: " + std::to_string(idx.size()) +
                             " indices for rank " + std::to_string(rank()));
        }
        std::size_t flat = 0;
        std::size_t axis = 0;
        for (std::size_t i : idx) {
            if (i >= shape_.extent(axis)) {
                throw IndexError("tensor: index " + std::to_string(i) +
                                 " out of range on axis " + std::to_string(axis));
            }
            flat = flat * shape_.extent(axis) + i;
            ++axis;
        }
        return (*data_)[flat];
    }

    /// Same buffer under a new shape with equal element count.
    TensorT with_shape(Shape shape) const {
        if (shape.count() != shape_.count()) {
            throw ShapeError("reshape: cannot view " + shape_.str() + " (" +
                             std::to_string(shape_.count()) + " elements) as " +
                             shape.str() + " (" + std::to_string(shape.count()) +
                             ")");
        }
        TensorT out;
        out.shape_ = std::move(shape);
        out.data_ = data_;
        return out;
    }

    bool all_finite() const {
        for (T v : *data_) {
            if (!std::isfinite(static_cast<double>(v))) return false;
        }
        return true;
    }

    /// Bitwise equality of shape and elements.
    bool equals(const TensorT& other) const {
        return shape_ == other.shape_ &&
               (data_ == other.data_ || *data_ == *other.data_);
    }

    /// Cast elementwise to another scalar type.
    template <typename U>
    TensorT<U> cast() const {
        std::vector<U> v(count());
        const auto src = data();
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<U>(src[i]);
        return TensorT<U>(shape_, std::move(v));
    }

private:
    Shape shape_;
    std::shared_ptr<const std::vector<T>> data_;
};

using TensorF = TensorT<float>;
using TensorD = TensorT<double>;

#ifndef NDEBUG
/// Boundary check used by public operations in debug builds only.
template <typename T>
inline void debug_check_finite(const TensorT<T>& t, const char* where) {
    if (!t.all_finite()) {
        throw Error(std::string(where) + ": non-finite element produced");
    }
}
#else
template <typename T>
inline void debug_check_finite(const TensorT<T>&, const char*) {}
#endif

}  // namespace lotenet

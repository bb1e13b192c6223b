#include "lotenet/tensor_ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <string>

#include "lotenet/errors.hpp"
#include "lotenet/mac_counter.hpp"

namespace lotenet {

namespace {

void check_same_shape(const char* op, const Shape& a, const Shape& b) {
    if (!(a == b)) {
        std::ostringstream os;
        os << op << ": shapes " << a.str() << " and " << b.str() << " differ";
        throw ShapeError(os.str());
    }
}

void check_axes(const char* side, const Shape& shape, std::span<const std::size_t> axes) {
    std::vector<bool> seen(shape.rank(), false);
    for (std::size_t ax : axes) {
        if (ax >= shape.rank()) {
            std::ostringstream os;
            os << "contract: axis " << ax << " of " << side << " out of range for shape "
               << shape.str();
            throw IndexError(os.str());
        }
        if (seen[ax]) {
            std::ostringstream os;
            os << "contract: axis " << ax << " of " << side << " listed twice";
            throw IndexError(os.str());
        }
        seen[ax] = true;
    }
}

std::vector<std::size_t> free_axes(std::size_t rank, std::span<const std::size_t> bound) {
    std::vector<bool> is_bound(rank, false);
    for (std::size_t ax : bound) is_bound[ax] = true;
    std::vector<std::size_t> out;
    out.reserve(rank - bound.size());
    for (std::size_t ax = 0; ax < rank; ++ax)
        if (!is_bound[ax]) out.push_back(ax);
    return out;
}

}  // namespace

template <typename T>
TensorT<T> matmul(const TensorT<T>& a, const TensorT<T>& b) {
    if (a.rank() != 2 || b.rank() != 2) {
        std::ostringstream os;
        os << "matmul: expected rank-2 operands, got " << a.shape().str() << " and "
           << b.shape().str();
        throw ShapeError(os.str());
    }
    const std::size_t m = a.shape().extent(0);
    const std::size_t k = a.shape().extent(1);
    const std::size_t n = b.shape().extent(1);
    if (b.shape().extent(0) != k) {
        std::ostringstream os;
        os << "matmul: inner extents differ, " << a.shape().str() << " vs " << b.shape().str();
        throw ShapeError(os.str());
    }
    std::vector<T> out(m * n, T(0));
    const T* pa = a.data().data();
    const T* pb = b.data().data();
    for (std::size_t i = 0; i < m; ++i) {
        T* row = out.data() + i * n;
        const T* arow = pa + i * k;
        for (std::size_t kk = 0; kk < k; ++kk) {
            const T av = arow[kk];
            const T* brow = pb + kk * n;
            for (std::size_t j = 0; j < n; ++j) row[j] += av * brow[j];
        }
    }
    macs::add(static_cast<std::uint64_t>(m) * k * n);
    return TensorT<T>(Shape({m, n}), std::move(out));
}

template <typename T>
TensorT<T> contract(const TensorT<T>& a, const TensorT<T>& b,
                    std::span<const std::size_t> axes_a, std::span<const std::size_t> axes_b) {
    if (axes_a.size() != axes_b.size()) {
        std::ostringstream os;
        os << "contract: " << axes_a.size() << " axes paired with " << axes_b.size();
        throw UsageError(os.str());
    }
    check_axes("lhs", a.shape(), axes_a);
    check_axes("rhs", b.shape(), axes_b);
    for (std::size_t i = 0; i < axes_a.size(); ++i) {
        const std::size_t ea = a.shape().extent(axes_a[i]);
        const std::size_t eb = b.shape().extent(axes_b[i]);
        if (ea != eb) {
            std::ostringstream os;
            os << "contract: axis " << axes_a[i] << " of lhs (extent " << ea
               << ") does not match axis " << axes_b[i] << " of rhs (extent " << eb << ")";
            throw ShapeError(os.str());
        }
    }

    const std::vector<std::size_t> fa = free_axes(a.rank(), axes_a);
    const std::vector<std::size_t> fb = free_axes(b.rank(), axes_b);

    std::vector<std::size_t> perm_a(fa);
    perm_a.insert(perm_a.end(), axes_a.begin(), axes_a.end());
    std::vector<std::size_t> perm_b(axes_b.begin(), axes_b.end());
    perm_b.insert(perm_b.end(), fb.begin(), fb.end());

    std::size_t m = 1, k = 1, n = 1;
    std::vector<std::size_t> out_dims;
    out_dims.reserve(fa.size() + fb.size());
    for (std::size_t ax : fa) {
        m *= a.shape().extent(ax);
        out_dims.push_back(a.shape().extent(ax));
    }
    for (std::size_t ax : axes_a) k *= a.shape().extent(ax);
    for (std::size_t ax : fb) {
        n *= b.shape().extent(ax);
        out_dims.push_back(b.shape().extent(ax));
    }

    const TensorT<T> lhs = permute(a, std::span<const std::size_t>(perm_a)).with_shape(Shape({m, k}));
    const TensorT<T> rhs = permute(b, std::span<const std::size_t>(perm_b)).with_shape(Shape({k, n}));
    return matmul(lhs, rhs).with_shape(Shape(out_dims));
}

template <typename T>
TensorT<T> trace_product(const TensorT<T>& a, const TensorT<T>& b) {
    if (a.rank() != 2 || b.rank() != 2 || a.shape().extent(0) != b.shape().extent(1) ||
        a.shape().extent(1) != b.shape().extent(0)) {
        std::ostringstream os;
        os << "trace_product: shapes " << a.shape().str() << " and " << b.shape().str()
           << " do not form a square product";
        throw ShapeError(os.str());
    }
    const std::size_t nrow = a.shape().extent(0);
    const std::size_t ncol = a.shape().extent(1);
    const T* pa = a.data().data();
    const T* pb = b.data().data();
    T acc = T(0);
    for (std::size_t i = 0; i < nrow; ++i)
        for (std::size_t j = 0; j < ncol; ++j) acc += pa[i * ncol + j] * pb[j * nrow + i];
    macs::add(static_cast<std::uint64_t>(nrow) * ncol);
    return TensorT<T>::scalar(acc);
}

template <typename T>
TensorT<T> reshape(const TensorT<T>& a, Shape shape) {
    return a.with_shape(std::move(shape));
}

template <typename T>
TensorT<T> permute(const TensorT<T>& a, std::span<const std::size_t> perm) {
    const std::size_t rank = a.rank();
    if (perm.size() != rank) {
        std::ostringstream os;
        os << "permute: " << perm.size() << " axes given for rank-" << rank << " tensor";
        throw ShapeError(os.str());
    }
    std::vector<bool> seen(rank, false);
    for (std::size_t ax : perm) {
        if (ax >= rank || seen[ax]) {
            std::ostringstream os;
            os << "permute: invalid permutation for rank-" << rank << " tensor";
            throw ShapeError(os.str());
        }
        seen[ax] = true;
    }
    if (rank == 0) return a;

    const std::vector<std::size_t> in_strides = row_major_strides(a.shape());
    std::vector<std::size_t> out_dims(rank), step(rank);
    for (std::size_t i = 0; i < rank; ++i) {
        out_dims[i] = a.shape().extent(perm[i]);
        step[i] = in_strides[perm[i]];
    }

    std::vector<T> out(a.count());
    const T* src = a.data().data();
    std::vector<std::size_t> idx(rank, 0);
    std::size_t src_off = 0;
    for (std::size_t flat = 0; flat < out.size(); ++flat) {
        out[flat] = src[src_off];
        for (std::size_t axis = rank; axis-- > 0;) {
            src_off += step[axis];
            if (++idx[axis] < out_dims[axis]) break;
            src_off -= step[axis] * out_dims[axis];
            idx[axis] = 0;
        }
    }
    return TensorT<T>(Shape(out_dims), std::move(out));
}

template <typename T>
TensorT<T> add(const TensorT<T>& a, const TensorT<T>& b) {
    check_same_shape("add", a.shape(), b.shape());
    std::vector<T> out(a.count());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] + b[i];
    return TensorT<T>(a.shape(), std::move(out));
}

template <typename T>
TensorT<T> sub(const TensorT<T>& a, const TensorT<T>& b) {
    check_same_shape("sub", a.shape(), b.shape());
    std::vector<T> out(a.count());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] - b[i];
    return TensorT<T>(a.shape(), std::move(out));
}

template <typename T>
TensorT<T> mul(const TensorT<T>& a, const TensorT<T>& b) {
    check_same_shape("mul", a.shape(), b.shape());
    std::vector<T> out(a.count());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * b[i];
    return TensorT<T>(a.shape(), std::move(out));
}

template <typename T>
TensorT<T> scale(const TensorT<T>& a, T factor) {
    std::vector<T> out(a.count());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * factor;
    return TensorT<T>(a.shape(), std::move(out));
}

template <typename T>
TensorT<T> stack(std::span<const TensorT<T>> parts, std::size_t axis) {
    if (parts.empty()) throw UsageError("stack: no tensors given");
    const Shape& base = parts[0].shape();
    for (const TensorT<T>& p : parts) check_same_shape("stack", base, p.shape());
    if (axis > base.rank()) {
        std::ostringstream os;
        os << "stack: axis " << axis << " out of range for result rank " << (base.rank() + 1);
        throw IndexError(os.str());
    }

    std::vector<std::size_t> dims0;
    dims0.reserve(base.rank() + 1);
    dims0.push_back(parts.size());
    for (std::size_t i = 0; i < base.rank(); ++i) dims0.push_back(base.extent(i));

    std::vector<T> out;
    out.reserve(parts.size() * parts[0].count());
    for (const TensorT<T>& p : parts) out.insert(out.end(), p.data().begin(), p.data().end());
    TensorT<T> stacked(Shape(dims0), std::move(out));
    if (axis == 0) return stacked;

    std::vector<std::size_t> perm;
    perm.reserve(dims0.size());
    for (std::size_t i = 1; i <= axis; ++i) perm.push_back(i);
    perm.push_back(0);
    for (std::size_t i = axis + 1; i < dims0.size(); ++i) perm.push_back(i);
    return permute(stacked, std::span<const std::size_t>(perm));
}

template <typename T>
TensorT<T> slice(const TensorT<T>& a, std::span<const std::size_t> start,
                 std::span<const std::size_t> extent) {
    const std::size_t rank = a.rank();
    if (start.size() != rank || extent.size() != rank) {
        std::ostringstream os;
        os << "slice: start/extent rank does not match tensor shape " << a.shape().str();
        throw ShapeError(os.str());
    }
    for (std::size_t i = 0; i < rank; ++i) {
        if (extent[i] == 0 || start[i] + extent[i] > a.shape().extent(i)) {
            std::ostringstream os;
            os << "slice: axis " << i << " window [" << start[i] << ", " << (start[i] + extent[i])
               << ") exceeds extent " << a.shape().extent(i);
            throw IndexError(os.str());
        }
    }
    if (rank == 0) return a;

    const std::vector<std::size_t> strides = row_major_strides(a.shape());
    Shape out_shape{std::vector<std::size_t>(extent.begin(), extent.end())};
    std::vector<T> out(out_shape.count());
    const T* src = a.data().data();
    std::vector<std::size_t> idx(rank, 0);
    std::size_t src_off = 0;
    for (std::size_t i = 0; i < rank; ++i) src_off += start[i] * strides[i];
    for (std::size_t flat = 0; flat < out.size(); ++flat) {
        out[flat] = src[src_off];
        for (std::size_t axis = rank; axis-- > 0;) {
            src_off += strides[axis];
            if (++idx[axis] < extent[axis]) break;
            src_off -= strides[axis] * extent[axis];
            idx[axis] = 0;
        }
    }
    return TensorT<T>(std::move(out_shape), std::move(out));
}

template <typename T>
TensorT<T> unslice(const TensorT<T>& block, const Shape& full,
                   std::span<const std::size_t> start) {
    const std::size_t rank = full.rank();
    if (block.rank() != rank || start.size() != rank) {
        std::ostringstream os;
        os << "unslice: block " << block.shape().str() << " does not fit shape " << full.str();
        throw ShapeError(os.str());
    }
    for (std::size_t i = 0; i < rank; ++i) {
        if (start[i] + block.shape().extent(i) > full.extent(i)) {
            std::ostringstream os;
            os << "unslice: axis " << i << " window exceeds extent " << full.extent(i);
            throw IndexError(os.str());
        }
    }
    std::vector<T> out(full.count(), T(0));
    if (rank == 0) {
        out[0] = block[0];
        return TensorT<T>(full, std::move(out));
    }
    const std::vector<std::size_t> strides = row_major_strides(full);
    std::vector<std::size_t> idx(rank, 0);
    std::size_t dst_off = 0;
    for (std::size_t i = 0; i < rank; ++i) dst_off += start[i] * strides[i];
    for (std::size_t flat = 0; flat < block.count(); ++flat) {
        out[dst_off] = block[flat];
        for (std::size_t axis = rank; axis-- > 0;) {
            dst_off += strides[axis];
            if (++idx[axis] < block.shape().extent(axis)) break;
            dst_off -= strides[axis] * block.shape().extent(axis);
            idx[axis] = 0;
        }
    }
    return TensorT<T>(full, std::move(out));
}

template <typename T>
TensorT<T> sum_all(const TensorT<T>& a) {
    T acc = T(0);
    for (std::size_t i = 0; i < a.count(); ++i) acc += a[i];
    return TensorT<T>::scalar(acc);
}

template <typename T>
TensorT<T> sigmoid(const TensorT<T>& a) {
    std::vector<T> out(a.count());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const T x = a[i];
        if (x >= T(0)) {
            const T e = std::exp(-x);
            out[i] = T(1) / (T(1) + e);
        } else {
            const T e = std::exp(x);
            out[i] = e / (T(1) + e);
        }
    }
    return TensorT<T>(a.shape(), std::move(out));
}

template <typename T>
TensorT<T> random_uniform(Shape shape, Rng& rng, T lo, T hi) {
    std::vector<T> out(shape.count());
    for (T& v : out) v = lo + (hi - lo) * static_cast<T>(rng.next_unit());
    return TensorT<T>(std::move(shape), std::move(out));
}

template <typename T>
TensorT<T> random_normal(Shape shape, Rng& rng, T mean, T stddev) {
    std::vector<T> out(shape.count());
    for (T& v : out) v = mean + stddev * static_cast<T>(rng.next_normal());
    return TensorT<T>(std::move(shape), std::move(out));
}

#define LOTENET_INSTANTIATE_OPS(T)                                                             \
    template TensorT<T> matmul<T>(const TensorT<T>&, const TensorT<T>&);                       \
    template TensorT<T> contract<T>(const TensorT<T>&, const TensorT<T>&,                      \
                                    std::span<const std::size_t>,                              \
                                    std::span<const std::size_t>);                             \
    template TensorT<T> trace_product<T>(const TensorT<T>&, const TensorT<T>&);                \
    template TensorT<T> reshape<T>(const TensorT<T>&, Shape);                                  \
    template TensorT<T> permute<T>(const TensorT<T>&, std::span<const std::size_t>);           \
    template TensorT<T> add<T>(const TensorT<T>&, const TensorT<T>&);                          \
    template TensorT<T> sub<T>(const TensorT<T>&, const TensorT<T>&);                          \
    template TensorT<T> mul<T>(const TensorT<T>&, const TensorT<T>&);                          \
    template TensorT<T> scale<T>(const TensorT<T>&, T);                                        \
    template TensorT<T> stack<T>(std::span<const TensorT<T>>, std::size_t);                    \
    template TensorT<T> slice<T>(const TensorT<T>&, std::span<const std::size_t>,              \
                                 std::span<const std::size_t>);                                \
    template TensorT<T> unslice<T>(const TensorT<T>&, const Shape&,                            \
                                   std::span<const std::size_t>);                              \
    template TensorT<T> sum_all<T>(const TensorT<T>&);                                         \
    template TensorT<T> sigmoid<T>(const TensorT<T>&);                                         \
    template TensorT<T> random_uniform<T>(Shape, Rng&, T, T);                                  \
    template TensorT<T> random_normal<T>(Shape, Rng&, T, T);

LOTENET_INSTANTIATE_OPS(float)
LOTENET_INSTANTIATE_OPS(double)

#undef LOTENET_INSTANTIATE_OPS

}  // namespace lotenet

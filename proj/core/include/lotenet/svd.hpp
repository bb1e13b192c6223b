#pragma once

#include "lotenet/tensor.hpp"

namespace lotenet {

/// Thin singular value decomposition a = u · diag(s) · vᵗ with
/// r = min(rows, cols): u is rows×r, s is r (descending), v is cols×r.
template <typename T>
struct SvdT {
    TensorT<T> u;
    TensorT<T> s;
    TensorT<T> v;
};

/// One-sided Jacobi on the taller orientation; small dense matrices only.
template <typename T>
SvdT<T> svd_thin(const TensorT<T>& a);

}  // namespace lotenet

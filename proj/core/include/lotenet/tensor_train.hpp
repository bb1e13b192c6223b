#pragma once

#include <span>
#include <vector>

#include "lotenet/tensor.hpp"

namespace lotenet {

/// Materializes the full (out_dim, d_1, ..., d_N) tensor from an MPS core
/// chain by direct summation over all bond indices. Exponential cost;
/// test-side oracle, never used in the training path.
///
/// Core shape conventions (site axis first, then the optional output axis):
/// first core d×β or d×ν×β, interior β×d×β or β×d×ν×β, last β×d or β×d×ν,
/// single core d×ν. Exactly one core must carry the output axis.
template <typename T>
TensorT<T> full_from_cores(std::span<const TensorT<T>> cores);

/// Tensor-train decomposition by successive thin SVDs, truncating each bond
/// to max_bond (singular values below 1e-12 of the leading one are dropped
/// regardless). Every axis of w is treated as a site; a unit output axis is
/// attached at core ⌊N/2⌋ so the result is a valid full_from_cores chain.
template <typename T>
std::vector<TensorT<T>> tt_svd(const TensorT<T>& w, std::size_t max_bond);

}  // namespace lotenet

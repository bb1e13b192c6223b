#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "lotenet/rng.hpp"
#include "lotenet/tensor.hpp"

// Test-side oracles, written independently of the engine kernels they check.
// Everything here runs in wide precision and favors obviousness over speed.
namespace oracles {

using lotenet::Shape;
using lotenet::TensorD;

/// Nested-loop contraction: odometer over free and bound indices, no matmul.
TensorD naive_contract(const TensorD& a, const TensorD& b,
                       const std::vector<std::size_t>& axes_a,
                       const std::vector<std::size_t>& axes_b);

/// Double loop over Σ_{ij} a_{ij} b_{ji}.
double naive_trace_product(const TensorD& a, const TensorD& b);

/// Central finite difference of a scalar function at x with step h.
double central_diff(const std::function<double(double)>& f, double x, double h);

/// Central-difference gradient of f with respect to every entry of every
/// input tensor, evaluated by rerunning f with one entry nudged at a time.
std::vector<TensorD> fd_gradients(const std::function<double(const std::vector<TensorD>&)>& f,
                                  const std::vector<TensorD>& at, double h);

/// Largest elementwise |a-b| / max(1, |a|, |b|) over both tensors.
double max_rel_err(const TensorD& a, const TensorD& b);

/// Relative Frobenius distance ||a-b|| / ||b||.
double frob_rel_err(const TensorD& a, const TensorD& b);

/// Best bond-1 tensor-train truncation computed by an independent sweep:
/// dominant singular triples come from power iteration, not the engine's
/// SVD. Returns the relative Frobenius reconstruction error.
double tt_rank1_error(const TensorD& w, lotenet::Rng& rng);

}  // namespace oracles

namespace oracles {

/// AUC by exhaustive pair enumeration: a positive-negative pair scores 1 if
/// the positive ranks higher, 1/2 on a tie. O(n^2), the defining formula.
double pair_count_auc(const std::vector<double>& scores,
                      const std::vector<std::size_t>& labels);

}  // namespace oracles

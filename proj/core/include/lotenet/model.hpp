#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lotenet/autodiff.hpp"
#include "lotenet/mps_block.hpp"
#include "lotenet/tensor.hpp"

namespace lotenet {

/// Model hyperparameters plus the input geometry. out_dim is the per-block
/// output width nu and must equal bond_dim; classes is the logit count of
/// the decision block.
struct LoTeNetConfig {
    std::size_t layers = 1;
    std::size_t kernel = 2;
    std::size_t bond_dim = 5;
    std::size_t out_dim = 5;
    std::size_t classes = 2;
    std::size_t height = 0;
    std::size_t width = 0;
    std::size_t channels = 1;
    bool shared_weights = false;
};

/// Geometry of one layer: the grid it consumes, its patch partition, and the
/// grid it emits. Every patch is k*k squeezed cells = k^2 x k^2 input pixels.
struct LayerShape {
    std::size_t in_h = 0, in_w = 0, in_c = 0;
    std::size_t patch_rows = 0, patch_cols = 0;
    std::size_t n_sites = 0;   // k^2
    std::size_t site_dim = 0;  // 2 * in_c * k^2
    std::size_t out_h = 0, out_w = 0;
};

/// Geometry of the decision block. If the residual grid divides by k it is
/// squeezed once more before flattening; otherwise positions flatten as-is.
struct FinalShape {
    std::size_t in_h = 0, in_w = 0, in_c = 0;
    bool squeeze_applied = false;
    std::size_t n_sites = 0;
    std::size_t site_dim = 0;
};

struct ShapePlan {
    std::vector<LayerShape> layers;
    FinalShape final_block;
    std::size_t kernel = 0;
    std::size_t out_dim = 0;
    std::size_t classes = 0;

    /// Human-readable layer table for logs.
    std::string describe() const;
};

/// Validates the whole spatial chain and returns the per-layer geometry.
/// Any extent that fails divisibility raises ConfigError naming the layer;
/// shapes are never silently padded.
ShapePlan shape_plan(const LoTeNetConfig& config);

/// Rearranges a rank-3 grid H x W x C into (H/k) x (W/k) x (C*k^2). Each
/// output channel vector stacks the k x k block channel-major, then
/// row-major within a channel. Invertible; k=1 is the identity.
template <typename T>
TensorT<T> squeeze(const TensorT<T>& grid, std::size_t k);

template <typename T>
VarT<T> squeeze(const VarT<T>& grid, std::size_t k);

/// Exact inverse of squeeze.
template <typename T>
TensorT<T> unsqueeze(const TensorT<T>& grid, std::size_t k);

/// Index of the largest entry; ties break toward the smaller index.
template <typename T>
std::size_t argmax_tie_low(std::span<const T> values);

/// Per-model parameter Vars, one entry per core, in canonical order
/// (layer-major, patch positions row-major, cores left to right, decision
/// block last). Built by LoTeNetModelT::leaves or ::constants.
template <typename T>
struct ModelVarsT {
    std::vector<std::vector<std::vector<VarT<T>>>> layer_cores;  // [layer][position][core]
    std::vector<VarT<T>> final_cores;
};

/// One layer's pass over a grid: squeeze, partition into patches, embed and
/// contract each patch through its MPS block, reassemble, squash to (0,1).
/// blocks holds one entry per patch position (row-major) or exactly one
/// shared entry.
template <typename T>
TensorT<T> layer_forward(const TensorT<T>& grid, std::span<const MpsBlockT<T>> blocks,
                         std::size_t k);

template <typename T>
class LoTeNetModelT {
  public:
    /// Builds all blocks per the shape plan; block seeds derive from
    /// (seed, layer, position) so the result is reproducible and
    /// position-independent.
    static LoTeNetModelT init(const LoTeNetConfig& config, std::uint64_t seed);

    /// init with every block's noise scale overridden (0 gives the pure
    /// near-identity model, useful for stability probes).
    static LoTeNetModelT init_with_noise(const LoTeNetConfig& config, std::uint64_t seed,
                                         T noise_std);

    const LoTeNetConfig& config() const { return config_; }
    const ShapePlan& plan() const { return plan_; }

    /// All core tensors in canonical order (cheap shared-buffer copies).
    std::vector<TensorT<T>> parameters() const;

    /// Replaces every core; shapes must match the plan exactly.
    void set_parameters(std::span<const TensorT<T>> params);

    /// Total stored scalars.
    std::size_t param_count() const;

    /// Registers every parameter as a tape leaf, canonical order.
    ModelVarsT<T> leaves(TapeT<T>& tape) const;

    /// Same structure with constant Vars (no tape), for inference.
    ModelVarsT<T> constants() const;

    /// Full forward pass to M logits. The image is H x W x C in [0,1].
    VarT<T> forward_vars(const ModelVarsT<T>& vars, const VarT<T>& image) const;

    TensorT<T> forward(const TensorT<T>& image) const;

    /// argmax over forward logits, ties toward the smaller class.
    std::size_t predict(const TensorT<T>& image) const;

    const MpsBlockT<T>& block_at(std::size_t layer, std::size_t position) const;
    const MpsBlockT<T>& final_block() const { return final_block_; }

  private:
    LoTeNetConfig config_;
    ShapePlan plan_;
    std::vector<std::vector<MpsBlockT<T>>> layer_blocks_;  // [layer][position or 0 if shared]
    MpsBlockT<T> final_block_;
};

using LoTeNetModelF = LoTeNetModelT<float>;
using LoTeNetModelD = LoTeNetModelT<double>;

}  // namespace lotenet

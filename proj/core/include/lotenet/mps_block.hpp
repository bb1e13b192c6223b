#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lotenet/autodiff.hpp"
#include "lotenet/feature_map.hpp"
#include "lotenet/tensor.hpp"

namespace lotenet {

/// Order in which the absorbed site chain is multiplied out. Both give the
/// same value (associativity); Pairwise halves the chain each round.
enum class ChainSchedule { Pairwise, Sequential };

/// MPS weight block: a chain of cores, one of which carries the output axis.
/// Core shapes: first site_dim x bond, interior bond x site_dim x bond, last
/// bond x site_dim; the output core at out_position has an extra out_dim
/// axis right after the site axis. A single-site block is one
/// site_dim x out_dim core.
template <typename T>
struct MpsBlockT {
    std::vector<TensorT<T>> cores;
    std::size_t n_sites = 0;
    std::size_t site_dim = 0;
    std::size_t bond_dim = 0;
    std::size_t out_dim = 0;
    std::size_t out_position = 0;

    /// Near-identity start: bond-to-bond identity slices scaled by
    /// 1/sqrt(site_dim) plus Gaussian noise of the given standard deviation,
    /// output core at floor(n_sites/2), fully determined by seed.
    static MpsBlockT init_with_noise(std::size_t n_sites, std::size_t site_dim,
                                     std::size_t bond_dim, std::size_t out_dim,
                                     std::uint64_t seed, T noise_std);

    /// init_with_noise at the default scale 1e-2 / sqrt(site_dim * bond_dim).
    static MpsBlockT init(std::size_t n_sites, std::size_t site_dim, std::size_t bond_dim,
                          std::size_t out_dim, std::uint64_t seed);

    std::size_t param_count() const;
};

using MpsBlockF = MpsBlockT<float>;
using MpsBlockD = MpsBlockT<double>;

/// W·Φ(x) for one patch: each site vector is absorbed into its core, then
/// the chain is reduced to an out_dim vector.
template <typename T>
TensorT<T> contract_block(const MpsBlockT<T>& block, const EmbeddedPatchT<T>& patch,
                          ChainSchedule schedule = ChainSchedule::Pairwise);

/// Tape path: cores are (typically leaf) Vars and sites is an
/// n_sites x site_dim Var, usually from embed_sites_var.
template <typename T>
VarT<T> contract_block_vars(std::span<const VarT<T>> cores, const VarT<T>& sites,
                            ChainSchedule schedule = ChainSchedule::Pairwise);

/// Exact multiply-accumulate count of one contract_block call, measured by
/// running the schedule on a placeholder patch.
template <typename T>
std::uint64_t cost_estimate(const MpsBlockT<T>& block,
                            ChainSchedule schedule = ChainSchedule::Pairwise);

}  // namespace lotenet

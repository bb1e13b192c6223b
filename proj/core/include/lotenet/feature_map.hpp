#pragma once

#include <cstddef>
#include <span>

#include "lotenet/autodiff.hpp"
#include "lotenet/tensor.hpp"

namespace lotenet {

/// Unit 2-vector [cos(pi x / 2), sin(pi x / 2)]; x is clamped to [0,1].
template <typename T>
TensorT<T> local_phi(T x);

/// N sites embedded for MPS consumption: row s is site s's feature vector of
/// dimension d = 2*channels (even by construction), unit norm within 1e-12.
template <typename T>
struct EmbeddedPatchT {
    TensorT<T> sites;  // site_count x site_dim

    std::size_t site_count() const { return sites.shape().extent(0); }
    std::size_t site_dim() const { return sites.shape().extent(1); }
    std::span<const T> site(std::size_t i) const {
        return sites.data().subspan(i * site_dim(), site_dim());
    }
};

using EmbeddedPatchF = EmbeddedPatchT<float>;
using EmbeddedPatchD = EmbeddedPatchT<double>;

/// Embeds raw intensities (site_count x channels, clamped to [0,1]): per
/// site the per-channel [cos, sin] pairs are concatenated channel-major and
/// scaled by 1/sqrt(channels), keeping each site at unit norm.
template <typename T>
EmbeddedPatchT<T> embed_sites(const TensorT<T>& raw);

/// Tape-recorded embedding; the gradient flows back into the intensities,
/// which is what connects one layer's parameters to the next layer's loss.
template <typename T>
VarT<T> embed_sites_var(const VarT<T>& raw);

}  // namespace lotenet

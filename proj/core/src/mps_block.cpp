#include "lotenet/mps_block.hpp"

#include <cmath>
#include <utility>

#include "lotenet/errors.hpp"
#include "lotenet/mac_counter.hpp"
#include "lotenet/rng.hpp"
#include "lotenet/tensor_ops.hpp"

namespace lotenet {
namespace {

Shape core_shape(std::size_t j, std::size_t n, std::size_t d, std::size_t b, std::size_t nu,
                 std::size_t out_pos) {
    const bool out = j == out_pos;
    if (n == 1) return Shape({d, nu});
    if (j == 0) return out ? Shape({d, nu, b}) : Shape({d, b});
    if (j == n - 1) return out ? Shape({b, d, nu}) : Shape({b, d});
    return out ? Shape({b, d, nu, b}) : Shape({b, d, b});
}

// Identity-start value of one core entry: 1/sqrt(d) wherever the bond axes
// agree (border cores pin the open bond to index 0), same slice for every
// output index. A single-site core has no bonds; it gets an identity-padded
// site-to-output map instead.
template <typename T>
T base_entry(const Shape& shape, std::size_t flat, std::size_t j, std::size_t n,
             std::size_t d) {
    const T inv = T(1) / std::sqrt(T(d));
    std::vector<std::size_t> idx(shape.rank());
    std::size_t rem = flat;
    for (std::size_t a = shape.rank(); a-- > 0;) {
        idx[a] = rem % shape.extent(a);
        rem /= shape.extent(a);
    }
    if (n == 1) return idx[0] == idx[1] ? inv : T(0);             // (d, nu)
    if (j == 0) return idx.back() == 0 ? inv : T(0);              // (d, [nu,] b)
    if (j == n - 1) return idx[0] == 0 ? inv : T(0);              // (b, d[, nu])
    return idx[0] == idx.back() ? inv : T(0);                     // (b, d, [nu,] b)
}

// Absorbs one site vector into its core. The result is a bond-to-bond matrix
// (rank 2), or rank 3 with the output axis in the middle; border results get
// a unit bond so every piece has the same interface.
template <typename V>
V absorb_site(const V& core, const V& site, std::size_t j, std::size_t n) {
    if (n == 1) return contract(site, core, {0}, {0});
    if (j == 0) {
        V hit = contract(site, core, {0}, {0});
        std::vector<std::size_t> ext{1};
        for (std::size_t a = 0; a < hit.shape().rank(); ++a) ext.push_back(hit.shape().extent(a));
        return reshape(hit, Shape(ext));
    }
    V hit = contract(core, site, {1}, {0});
    if (j == n - 1) {
        std::vector<std::size_t> ext;
        for (std::size_t a = 0; a < hit.shape().rank(); ++a) ext.push_back(hit.shape().extent(a));
        ext.push_back(1);
        return reshape(hit, Shape(ext));
    }
    return hit;
}

template <typename V>
V chain_product(const V& x, const V& y) {
    if (x.shape().rank() == 3) return contract(x, y, {2}, {0});
    return contract(x, y, {1}, {0});
}

template <typename V>
V reduce_pieces(std::vector<V> pieces, ChainSchedule schedule) {
    if (schedule == ChainSchedule::Sequential) {
        V acc = std::move(pieces.front());
        for (std::size_t j = 1; j < pieces.size(); ++j) acc = chain_product(acc, pieces[j]);
        return acc;
    }
    while (pieces.size() > 1) {
        std::vector<V> next;
        next.reserve((pieces.size() + 1) / 2);
        for (std::size_t i = 0; i + 1 < pieces.size(); i += 2)
            next.push_back(chain_product(pieces[i], pieces[i + 1]));
        if (pieces.size() % 2 == 1) next.push_back(std::move(pieces.back()));
        pieces = std::move(next);
    }
    return std::move(pieces.front());
}

}  // namespace

template <typename T>
MpsBlockT<T> MpsBlockT<T>::init_with_noise(std::size_t n_sites, std::size_t site_dim,
                                           std::size_t bond_dim, std::size_t out_dim,
                                           std::uint64_t seed, T noise_std) {
    if (n_sites < 1 || site_dim < 1 || bond_dim < 1 || out_dim < 1)
        throw UsageError("mps_block: all dimensions must be >= 1");
    MpsBlockT<T> block;
    block.n_sites = n_sites;
    block.site_dim = site_dim;
    block.bond_dim = bond_dim;
    block.out_dim = out_dim;
    block.out_position = n_sites / 2;
    block.cores.reserve(n_sites);
    Rng rng(seed);
    for (std::size_t j = 0; j < n_sites; ++j) {
        const Shape shape = core_shape(j, n_sites, site_dim, bond_dim, out_dim,
                                       block.out_position);
        std::vector<T> v(shape.count());
        for (std::size_t f = 0; f < v.size(); ++f) {
            v[f] = base_entry<T>(shape, f, j, n_sites, site_dim) +
                   noise_std * static_cast<T>(rng.next_normal());
        }
        block.cores.emplace_back(shape, std::move(v));
    }
    return block;
}

template <typename T>
MpsBlockT<T> MpsBlockT<T>::init(std::size_t n_sites, std::size_t site_dim, std::size_t bond_dim,
                                std::size_t out_dim, std::uint64_t seed) {
    const T std = T(1e-2) / std::sqrt(T(site_dim) * T(bond_dim));
    return init_with_noise(n_sites, site_dim, bond_dim, out_dim, seed, std);
}

template <typename T>
std::size_t MpsBlockT<T>::param_count() const {
    std::size_t total = 0;
    for (const auto& c : cores) total += c.count();
    return total;
}

template <typename T>
TensorT<T> contract_block(const MpsBlockT<T>& block, const EmbeddedPatchT<T>& patch,
                          ChainSchedule schedule) {
    if (patch.site_count() != block.n_sites || patch.site_dim() != block.site_dim) {
        throw ShapeError("contract_block: block expects " + std::to_string(block.n_sites) +
                         " sites of dim " + std::to_string(block.site_dim) + ", patch has " +
                         std::to_string(patch.site_count()) + " of dim " +
                         std::to_string(patch.site_dim()));
    }
    const std::size_t n = block.n_sites;
    std::vector<TensorT<T>> pieces;
    pieces.reserve(n);
    for (std::size_t j = 0; j < n; ++j) {
        auto row = patch.site(j);
        TensorT<T> site(Shape({block.site_dim}), std::vector<T>(row.begin(), row.end()));
        pieces.push_back(absorb_site(block.cores[j], site, j, n));
    }
    if (n == 1) return pieces.front();
    TensorT<T> whole = reduce_pieces(std::move(pieces), schedule);
    return reshape(whole, Shape({block.out_dim}));
}

template <typename T>
VarT<T> contract_block_vars(std::span<const VarT<T>> cores, const VarT<T>& sites,
                            ChainSchedule schedule) {
    const std::size_t n = cores.size();
    if (n == 0) throw UsageError("contract_block: no cores");
    if (sites.shape().rank() != 2)
        throw ShapeError("contract_block: sites must be rank 2, got rank " +
                         std::to_string(sites.shape().rank()));
    if (sites.shape().extent(0) != n)
        throw ShapeError("contract_block: " + std::to_string(n) + " cores but " +
                         std::to_string(sites.shape().extent(0)) + " site rows");
    const std::size_t d = sites.shape().extent(1);
    std::vector<VarT<T>> pieces;
    pieces.reserve(n);
    std::size_t out_dim = 0;
    for (std::size_t j = 0; j < n; ++j) {
        const Shape& cs = cores[j].shape();
        if (n == 1) {
            if (cs.rank() != 2)
                throw ShapeError("contract_block: single core must be rank 2, got rank " +
                                 std::to_string(cs.rank()));
            out_dim = cs.extent(1);
        } else {
            const std::size_t plain = (j == 0 || j == n - 1) ? 2 : 3;
            if (cs.rank() == plain + 1) {
                const std::size_t axis = j == 0 ? 1 : 2;
                if (out_dim != 0) throw UsageError("contract_block: more than one output core");
                out_dim = cs.extent(axis);
            } else if (cs.rank() != plain) {
                throw ShapeError("contract_block: core " + std::to_string(j) +
                                 " has unexpected rank " + std::to_string(cs.rank()));
            }
        }
        VarT<T> site = reshape(slice(sites, {j, std::size_t(0)}, {std::size_t(1), d}),
                               Shape({d}));
        pieces.push_back(absorb_site(cores[j], site, j, n));
    }
    if (out_dim == 0) throw UsageError("contract_block: no output core");
    if (n == 1) return pieces.front();
    VarT<T> whole = reduce_pieces(std::move(pieces), schedule);
    return reshape(whole, Shape({out_dim}));
}

template <typename T>
std::uint64_t cost_estimate(const MpsBlockT<T>& block, ChainSchedule schedule) {
    EmbeddedPatchT<T> dummy{
        TensorT<T>::full(Shape({block.n_sites, block.site_dim}),
                         T(1) / std::sqrt(T(block.site_dim)))};
    macs::Scope scope;
    contract_block(block, dummy, schedule);
    return scope.elapsed();
}

#define LOTENET_INSTANTIATE_MPS(T)                                                           \
    template struct MpsBlockT<T>;                                                            \
    template TensorT<T> contract_block<T>(const MpsBlockT<T>&, const EmbeddedPatchT<T>&,     \
                                          ChainSchedule);                                    \
    template VarT<T> contract_block_vars<T>(std::span<const VarT<T>>, const VarT<T>&,        \
                                            ChainSchedule);                                  \
    template std::uint64_t cost_estimate<T>(const MpsBlockT<T>&, ChainSchedule);

LOTENET_INSTANTIATE_MPS(float)
LOTENET_INSTANTIATE_MPS(double)

#undef LOTENET_INSTANTIATE_MPS

}  // namespace lotenet

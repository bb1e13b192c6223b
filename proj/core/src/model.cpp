#include "lotenet/model.hpp"

#include <sstream>
#include <utility>

#include "lotenet/errors.hpp"
#include "lotenet/feature_map.hpp"
#include "lotenet/rng.hpp"
#include "lotenet/tensor_ops.hpp"

namespace lotenet {
namespace {

template <typename V>
V squeeze_any(const V& grid, std::size_t k) {
    const Shape& s = grid.shape();
    if (s.rank() != 3)
        throw ShapeError("squeeze: grid must be rank 3 (HxWxC), got " + s.str());
    if (k < 1) throw UsageError("squeeze: kernel must be >= 1");
    const std::size_t h = s.extent(0), w = s.extent(1), c = s.extent(2);
    if (h % k != 0)
        throw ShapeError("squeeze: height " + std::to_string(h) + " not divisible by kernel " +
                         std::to_string(k));
    if (w % k != 0)
        throw ShapeError("squeeze: width " + std::to_string(w) + " not divisible by kernel " +
                         std::to_string(k));
    V cells = reshape(grid, Shape({h / k, k, w / k, k, c}));
    V grouped = permute(cells, {0, 2, 4, 1, 3});
    return reshape(grouped, Shape({h / k, w / k, c * k * k}));
}

// One layer over a grid of core Vars. Shared weighting passes a single
// position that every patch reuses; gradient fan-in is handled by the tape.
template <typename T>
VarT<T> layer_forward_vars(const VarT<T>& grid,
                           const std::vector<std::vector<VarT<T>>>& positions, bool shared,
                           std::size_t k) {
    const Shape& s = grid.shape();
    if (s.rank() != 3)
        throw ShapeError("layer_forward: grid must be rank 3, got " + s.str());
    const std::size_t kk = k * k;
    const std::size_t h = s.extent(0), w = s.extent(1), c = s.extent(2);
    if (h % kk != 0 || w % kk != 0)
        throw ShapeError("layer_forward: grid " + s.str() + " not divisible into " +
                         std::to_string(kk) + "x" + std::to_string(kk) + " patches");
    const std::size_t rows = h / kk, cols = w / kk;
    const std::size_t expected = shared ? 1 : rows * cols;
    if (positions.size() != expected)
        throw UsageError("layer_forward: " + std::to_string(rows * cols) + " patches but " +
                         std::to_string(positions.size()) + " blocks" +
                         (shared ? " (shared weights expect 1)" : ""));

    const VarT<T> squeezed = squeeze(grid, k);
    const std::size_t cd = c * kk;
    std::vector<VarT<T>> outs;
    outs.reserve(rows * cols);
    for (std::size_t p = 0; p < rows * cols; ++p) {
        const std::size_t r = p / cols, q = p % cols;
        VarT<T> window = slice(squeezed, {r * k, q * k, std::size_t(0)}, {k, k, cd});
        VarT<T> raw = reshape(window, Shape({kk, cd}));
        VarT<T> sites = embed_sites_var(raw);
        const auto& cores = positions[shared ? 0 : p];
        outs.push_back(contract_block_vars<T>(cores, sites));
    }
    const std::size_t nu = outs.front().shape().extent(0);
    VarT<T> flat = stack(std::span<const VarT<T>>(outs), 0);
    return sigmoid(reshape(flat, Shape({rows, cols, nu})));
}

template <typename T>
std::vector<VarT<T>> wrap_cores(const MpsBlockT<T>& block, TapeT<T>* tape) {
    std::vector<VarT<T>> vars;
    vars.reserve(block.cores.size());
    for (const auto& core : block.cores)
        vars.push_back(tape ? tape->leaf(core) : VarT<T>::constant(core));
    return vars;
}

}  // namespace

ShapePlan shape_plan(const LoTeNetConfig& config) {
    if (config.layers < 1) throw ConfigError("config: layers must be >= 1");
    if (config.kernel < 1) throw ConfigError("config: kernel must be >= 1");
    if (config.bond_dim < 1) throw ConfigError("config: bond_dim must be >= 1");
    if (config.classes < 2) throw ConfigError("config: classes must be >= 2");
    if (config.height < 1 || config.width < 1 || config.channels < 1)
        throw ConfigError("config: input extents must be >= 1");
    if (config.out_dim != config.bond_dim)
        throw ConfigError("config: out_dim (" + std::to_string(config.out_dim) +
                          ") must equal bond_dim (" + std::to_string(config.bond_dim) + ")");

    const std::size_t k = config.kernel, kk = k * k;
    ShapePlan plan;
    plan.kernel = k;
    plan.out_dim = config.out_dim;
    plan.classes = config.classes;
    std::size_t h = config.height, w = config.width, c = config.channels;
    for (std::size_t layer = 1; layer <= config.layers; ++layer) {
        if (h % kk != 0)
            throw ConfigError("layer " + std::to_string(layer) + ": height " +
                              std::to_string(h) + " not divisible by " + std::to_string(kk));
        if (w % kk != 0)
            throw ConfigError("layer " + std::to_string(layer) + ": width " +
                              std::to_string(w) + " not divisible by " + std::to_string(kk));
        LayerShape ls;
        ls.in_h = h;
        ls.in_w = w;
        ls.in_c = c;
        ls.patch_rows = h / kk;
        ls.patch_cols = w / kk;
        ls.n_sites = kk;
        ls.site_dim = 2 * c * kk;
        ls.out_h = h / kk;
        ls.out_w = w / kk;
        plan.layers.push_back(ls);
        h /= kk;
        w /= kk;
        c = config.out_dim;
    }

    FinalShape fs;
    fs.in_h = h;
    fs.in_w = w;
    fs.in_c = c;
    fs.squeeze_applied = h % k == 0 && w % k == 0;
    if (fs.squeeze_applied) {
        fs.n_sites = (h / k) * (w / k);
        fs.site_dim = 2 * c * kk;
    } else {
        fs.n_sites = h * w;
        fs.site_dim = 2 * c;
    }
    plan.final_block = fs;
    return plan;
}

std::string ShapePlan::describe() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const LayerShape& ls = layers[i];
        os << "layer " << (i + 1) << ": " << ls.in_h << "x" << ls.in_w << "x" << ls.in_c
           << " -> " << ls.patch_rows << "x" << ls.patch_cols << " patches of " << ls.n_sites
           << " sites (dim " << ls.site_dim << ") -> " << ls.out_h << "x" << ls.out_w << "x"
           << out_dim << "\n";
    }
    const FinalShape& fs = final_block;
    os << "final: " << fs.in_h << "x" << fs.in_w << "x" << fs.in_c
       << (fs.squeeze_applied ? " squeezed" : " flattened") << " -> " << fs.n_sites
       << " sites (dim " << fs.site_dim << ") -> " << classes << " logits\n";
    return os.str();
}

template <typename T>
TensorT<T> squeeze(const TensorT<T>& grid, std::size_t k) {
    return squeeze_any(grid, k);
}

template <typename T>
VarT<T> squeeze(const VarT<T>& grid, std::size_t k) {
    return squeeze_any(grid, k);
}

template <typename T>
TensorT<T> unsqueeze(const TensorT<T>& grid, std::size_t k) {
    const Shape& s = grid.shape();
    if (s.rank() != 3)
        throw ShapeError("unsqueeze: grid must be rank 3 (HxWxC), got " + s.str());
    if (k < 1) throw UsageError("unsqueeze: kernel must be >= 1");
    const std::size_t h = s.extent(0), w = s.extent(1), cd = s.extent(2);
    if (cd % (k * k) != 0)
        throw ShapeError("unsqueeze: channel extent " + std::to_string(cd) +
                         " not divisible by kernel^2 " + std::to_string(k * k));
    const std::size_t c = cd / (k * k);
    TensorT<T> cells = reshape(grid, Shape({h, w, c, k, k}));
    TensorT<T> spread = permute(cells, {0, 3, 1, 4, 2});
    return reshape(spread, Shape({h * k, w * k, c}));
}

template <typename T>
std::size_t argmax_tie_low(std::span<const T> values) {
    if (values.empty()) throw UsageError("argmax: empty input");
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i)
        if (values[i] > values[best]) best = i;
    return best;
}

template <typename T>
TensorT<T> layer_forward(const TensorT<T>& grid, std::span<const MpsBlockT<T>> blocks,
                         std::size_t k) {
    std::vector<std::vector<VarT<T>>> positions;
    positions.reserve(blocks.size());
    for (const auto& block : blocks) positions.push_back(wrap_cores<T>(block, nullptr));
    const bool shared = blocks.size() == 1;
    return layer_forward_vars(VarT<T>::constant(grid), positions, shared, k).value;
}

template <typename T>
LoTeNetModelT<T> LoTeNetModelT<T>::init(const LoTeNetConfig& config, std::uint64_t seed) {
    return init_with_noise(config, seed, T(-1));
}

template <typename T>
LoTeNetModelT<T> LoTeNetModelT<T>::init_with_noise(const LoTeNetConfig& config,
                                                   std::uint64_t seed, T noise_std) {
    // noise_std < 0 means each block's default scale.
    const auto make_block = [&](std::size_t n, std::size_t d, std::size_t nu,
                                std::uint64_t block_seed) {
        if (noise_std < T(0))
            return MpsBlockT<T>::init(n, d, config.bond_dim, nu, block_seed);
        return MpsBlockT<T>::init_with_noise(n, d, config.bond_dim, nu, block_seed, noise_std);
    };
    LoTeNetModelT<T> model;
    model.config_ = config;
    model.plan_ = shape_plan(config);
    model.layer_blocks_.reserve(config.layers);
    for (std::size_t layer = 0; layer < config.layers; ++layer) {
        const LayerShape& ls = model.plan_.layers[layer];
        const std::size_t count =
            config.shared_weights ? 1 : ls.patch_rows * ls.patch_cols;
        std::vector<MpsBlockT<T>> blocks;
        blocks.reserve(count);
        for (std::size_t p = 0; p < count; ++p) {
            const std::uint64_t block_seed = Rng::derive(seed, {layer, p}).next_u64();
            blocks.push_back(make_block(ls.n_sites, ls.site_dim, config.out_dim, block_seed));
        }
        model.layer_blocks_.push_back(std::move(blocks));
    }
    const FinalShape& fs = model.plan_.final_block;
    const std::uint64_t final_seed = Rng::derive(seed, {config.layers, 0}).next_u64();
    model.final_block_ = make_block(fs.n_sites, fs.site_dim, config.classes, final_seed);
    return model;
}

template <typename T>
std::vector<TensorT<T>> LoTeNetModelT<T>::parameters() const {
    std::vector<TensorT<T>> out;
    for (const auto& layer : layer_blocks_)
        for (const auto& block : layer)
            for (const auto& core : block.cores) out.push_back(core);
    for (const auto& core : final_block_.cores) out.push_back(core);
    return out;
}

template <typename T>
void LoTeNetModelT<T>::set_parameters(std::span<const TensorT<T>> params) {
    std::size_t next = 0;
    const auto take = [&](TensorT<T>& core) {
        if (next >= params.size())
            throw UsageError("set_parameters: expected more than " +
                             std::to_string(params.size()) + " tensors");
        if (!(params[next].shape() == core.shape()))
            throw ShapeError("set_parameters: tensor " + std::to_string(next) + " has shape " +
                             params[next].shape().str() + ", expected " + core.shape().str());
        core = params[next++];
    };
    for (auto& layer : layer_blocks_)
        for (auto& block : layer)
            for (auto& core : block.cores) take(core);
    for (auto& core : final_block_.cores) take(core);
    if (next != params.size())
        throw UsageError("set_parameters: " + std::to_string(params.size()) +
                         " tensors for " + std::to_string(next) + " cores");
}

template <typename T>
std::size_t LoTeNetModelT<T>::param_count() const {
    std::size_t total = 0;
    for (const auto& layer : layer_blocks_)
        for (const auto& block : layer) total += block.param_count();
    return total + final_block_.param_count();
}

template <typename T>
ModelVarsT<T> LoTeNetModelT<T>::leaves(TapeT<T>& tape) const {
    ModelVarsT<T> vars;
    vars.layer_cores.reserve(layer_blocks_.size());
    for (const auto& layer : layer_blocks_) {
        std::vector<std::vector<VarT<T>>> positions;
        positions.reserve(layer.size());
        for (const auto& block : layer) positions.push_back(wrap_cores(block, &tape));
        vars.layer_cores.push_back(std::move(positions));
    }
    vars.final_cores = wrap_cores(final_block_, &tape);
    return vars;
}

template <typename T>
ModelVarsT<T> LoTeNetModelT<T>::constants() const {
    ModelVarsT<T> vars;
    vars.layer_cores.reserve(layer_blocks_.size());
    for (const auto& layer : layer_blocks_) {
        std::vector<std::vector<VarT<T>>> positions;
        positions.reserve(layer.size());
        for (const auto& block : layer)
            positions.push_back(wrap_cores<T>(block, nullptr));
        vars.layer_cores.push_back(std::move(positions));
    }
    vars.final_cores = wrap_cores<T>(final_block_, nullptr);
    return vars;
}

template <typename T>
VarT<T> LoTeNetModelT<T>::forward_vars(const ModelVarsT<T>& vars, const VarT<T>& image) const {
    const Shape expected({config_.height, config_.width, config_.channels});
    if (!(image.shape() == expected))
        throw ShapeError("forward: image shape " + image.shape().str() + ", expected " +
                         expected.str());
    if (vars.layer_cores.size() != layer_blocks_.size())
        throw UsageError("forward: vars do not match this model");

    VarT<T> grid = image;
    for (std::size_t layer = 0; layer < layer_blocks_.size(); ++layer) {
        grid = layer_forward_vars(grid, vars.layer_cores[layer], config_.shared_weights,
                                  config_.kernel);
    }

    const FinalShape& fs = plan_.final_block;
    if (fs.squeeze_applied) grid = squeeze(grid, config_.kernel);
    VarT<T> raw = reshape(grid, Shape({fs.n_sites, fs.site_dim / 2}));
    VarT<T> sites = embed_sites_var(raw);
    return contract_block_vars<T>(vars.final_cores, sites);
}

template <typename T>
TensorT<T> LoTeNetModelT<T>::forward(const TensorT<T>& image) const {
    return forward_vars(constants(), VarT<T>::constant(image)).value;
}

template <typename T>
std::size_t LoTeNetModelT<T>::predict(const TensorT<T>& image) const {
    return argmax_tie_low(forward(image).data());
}

template <typename T>
const MpsBlockT<T>& LoTeNetModelT<T>::block_at(std::size_t layer, std::size_t position) const {
    if (layer >= layer_blocks_.size())
        throw IndexError("block_at: layer " + std::to_string(layer) + " of " +
                         std::to_string(layer_blocks_.size()));
    const auto& blocks = layer_blocks_[layer];
    if (config_.shared_weights) return blocks.front();
    if (position >= blocks.size())
        throw IndexError("block_at: position " + std::to_string(position) + " of " +
                         std::to_string(blocks.size()));
    return blocks[position];
}

#define LOTENET_INSTANTIATE_MODEL(T)                                                        \
    template TensorT<T> squeeze<T>(const TensorT<T>&, std::size_t);                         \
    template VarT<T> squeeze<T>(const VarT<T>&, std::size_t);                               \
    template TensorT<T> unsqueeze<T>(const TensorT<T>&, std::size_t);                       \
    template std::size_t argmax_tie_low<T>(std::span<const T>);                             \
    template TensorT<T> layer_forward<T>(const TensorT<T>&, std::span<const MpsBlockT<T>>,  \
                                         std::size_t);                                      \
    template class LoTeNetModelT<T>;

LOTENET_INSTANTIATE_MODEL(float)
LOTENET_INSTANTIATE_MODEL(double)

#undef LOTENET_INSTANTIATE_MODEL

}  // namespace lotenet

#include "lotenet/feature_map.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "lotenet/errors.hpp"

namespace lotenet {

namespace {

template <typename T>
T clamp01(T x) {
    return x < T(0) ? T(0) : (x > T(1) ? T(1) : x);
}

template <typename T>
TensorT<T> embed_values(const TensorT<T>& raw) {
    if (raw.rank() != 2)
        throw ShapeError("embed_sites: sites x channels tensor required, got " +
                         raw.shape().str());
    const std::size_t n = raw.shape().extent(0);
    const std::size_t c = raw.shape().extent(1);
    if (n == 0) throw UsageError("embed_sites: empty patch");

    const T half_pi = static_cast<T>(std::numbers::pi / 2.0);
    const T inv_sqrt_c = T(1) / std::sqrt(static_cast<T>(c));
    std::vector<T> out(n * 2 * c);
    for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t ch = 0; ch < c; ++ch) {
            const T x = clamp01(raw[s * c + ch]);
            out[s * 2 * c + 2 * ch] = std::cos(half_pi * x) * inv_sqrt_c;
            out[s * 2 * c + 2 * ch + 1] = std::sin(half_pi * x) * inv_sqrt_c;
        }
    }
    return TensorT<T>(Shape({n, 2 * c}), std::move(out));
}

}  // namespace

template <typename T>
TensorT<T> local_phi(T x) {
    const T half_pi = static_cast<T>(std::numbers::pi / 2.0);
    const T v = clamp01(x);
    return TensorT<T>(Shape({2}), {std::cos(half_pi * v), std::sin(half_pi * v)});
}

template <typename T>
EmbeddedPatchT<T> embed_sites(const TensorT<T>& raw) {
    return EmbeddedPatchT<T>{embed_values(raw)};
}

template <typename T>
VarT<T> embed_sites_var(const VarT<T>& raw) {
    TensorT<T> value = embed_values(raw.value);
    if (!raw.tape) return VarT<T>::constant(std::move(value));

    const TensorT<T> rv = raw.value;
    return raw.tape->record(
        std::move(value), {raw.id}, [rv](const TensorT<T>& up) {
            const std::size_t n = rv.shape().extent(0);
            const std::size_t c = rv.shape().extent(1);
            const T half_pi = static_cast<T>(std::numbers::pi / 2.0);
            const T inv_sqrt_c = T(1) / std::sqrt(static_cast<T>(c));
            std::vector<T> g(n * c, T(0));
            for (std::size_t s = 0; s < n; ++s) {
                for (std::size_t ch = 0; ch < c; ++ch) {
                    const T x = rv[s * c + ch];
                    if (x < T(0) || x > T(1)) continue;  // clamp zeroes the slope
                    const T a = half_pi * x;
                    const T dcos = -half_pi * std::sin(a) * inv_sqrt_c;
                    const T dsin = half_pi * std::cos(a) * inv_sqrt_c;
                    g[s * c + ch] = dcos * up[s * 2 * c + 2 * ch] +
                                    dsin * up[s * 2 * c + 2 * ch + 1];
                }
            }
            return std::vector<TensorT<T>>{TensorT<T>(rv.shape(), std::move(g))};
        });
}

#define LOTENET_INSTANTIATE_FEATURE_MAP(T)                      \
    template TensorT<T> local_phi<T>(T);                        \
    template EmbeddedPatchT<T> embed_sites<T>(const TensorT<T>&); \
    template VarT<T> embed_sites_var<T>(const VarT<T>&);

LOTENET_INSTANTIATE_FEATURE_MAP(float)
LOTENET_INSTANTIATE_FEATURE_MAP(double)

#undef LOTENET_INSTANTIATE_FEATURE_MAP

}  // namespace lotenet

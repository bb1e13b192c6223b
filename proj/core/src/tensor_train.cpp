#include "lotenet/tensor_train.hpp"

#include <cstddef>
#include <sstream>
#include <vector>

#include "lotenet/errors.hpp"
#include "lotenet/svd.hpp"

namespace lotenet {

namespace {

struct CoreView {
    std::size_t bl, d, nu, br;
    bool has_out;
};

template <typename T>
CoreView view_of(const TensorT<T>& core, std::size_t idx, std::size_t n) {
    const Shape& s = core.shape();
    const bool first = idx == 0;
    const bool last = idx + 1 == n;
    if (n == 1) {
        if (s.rank() == 1)
            throw UsageError("full_from_cores: zero output cores (single core lacks the output axis)");
        if (s.rank() != 2)
            throw ShapeError("full_from_cores: single core must be site x output, got " + s.str());
        return {1, s.extent(0), s.extent(1), 1, true};
    }
    if (first) {
        if (s.rank() == 2) return {1, s.extent(0), 1, s.extent(1), false};
        if (s.rank() == 3) return {1, s.extent(0), s.extent(1), s.extent(2), true};
        throw ShapeError("full_from_cores: first core has invalid shape " + s.str());
    }
    if (last) {
        if (s.rank() == 2) return {s.extent(0), s.extent(1), 1, 1, false};
        if (s.rank() == 3) return {s.extent(0), s.extent(1), s.extent(2), 1, true};
        throw ShapeError("full_from_cores: last core has invalid shape " + s.str());
    }
    if (s.rank() == 3) return {s.extent(0), s.extent(1), 1, s.extent(2), false};
    if (s.rank() == 4) return {s.extent(0), s.extent(1), s.extent(2), s.extent(3), true};
    throw ShapeError("full_from_cores: interior core has invalid shape " + s.str());
}

template <typename T>
std::size_t kept_rank(const TensorT<T>& s, std::size_t max_bond) {
    const T leading = s[0];
    const T floor = leading * T(1e-12);
    std::size_t r = 0;
    for (std::size_t i = 0; i < s.count() && i < max_bond; ++i) {
        if (s[i] > floor) ++r;
    }
    return r == 0 ? 1 : r;
}

}  // namespace

template <typename T>
TensorT<T> full_from_cores(std::span<const TensorT<T>> cores) {
    if (cores.empty()) throw UsageError("full_from_cores: no cores given");
    const std::size_t n = cores.size();

    std::vector<CoreView> views;
    views.reserve(n);
    std::size_t out_count = 0, out_pos = 0;
    for (std::size_t i = 0; i < n; ++i) {
        views.push_back(view_of(cores[i], i, n));
        if (views[i].has_out) {
            ++out_count;
            out_pos = i;
        }
    }
    if (out_count != 1) {
        std::ostringstream os;
        os << "full_from_cores: expected exactly one output core, found " << out_count;
        throw UsageError(os.str());
    }
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (views[i].br != views[i + 1].bl) {
            std::ostringstream os;
            os << "full_from_cores: bond mismatch between core " << i << " (right extent "
               << views[i].br << ") and core " << i + 1 << " (left extent " << views[i + 1].bl
               << ")";
            throw ShapeError(os.str());
        }
    }

    const std::size_t nu = views[out_pos].nu;
    std::vector<std::size_t> out_dims{nu};
    for (const CoreView& v : views) out_dims.push_back(v.d);
    const Shape out_shape(out_dims);

    std::vector<T> out(out_shape.count(), T(0));
    std::vector<std::size_t> idx(n + 1, 0);  // [m, i_1..i_N]
    std::vector<std::size_t> alpha(n > 1 ? n - 1 : 0, 0);

    for (std::size_t flat = 0; flat < out.size(); ++flat) {
        // Decompose flat into the output multi-index (row-major).
        {
            std::size_t rem = flat;
            for (std::size_t a = n + 1; a-- > 0;) {
                idx[a] = rem % out_shape.extent(a);
                rem /= out_shape.extent(a);
            }
        }
        T acc = T(0);
        std::fill(alpha.begin(), alpha.end(), 0);
        while (true) {
            T prod = T(1);
            for (std::size_t j = 0; j < n; ++j) {
                const CoreView& v = views[j];
                const std::size_t al = j == 0 ? 0 : alpha[j - 1];
                const std::size_t ar = j + 1 == n ? 0 : alpha[j];
                const std::size_t mm = j == out_pos ? idx[0] : 0;
                prod *= cores[j][((al * v.d + idx[j + 1]) * v.nu + mm) * v.br + ar];
            }
            acc += prod;
            // Odometer over the bond multi-index.
            std::size_t a = alpha.size();
            while (a-- > 0) {
                if (++alpha[a] < views[a].br) break;
                alpha[a] = 0;
            }
            if (a == static_cast<std::size_t>(-1)) break;
        }
        out[flat] = acc;
    }
    return TensorT<T>(out_shape, std::move(out));
}

template <typename T>
std::vector<TensorT<T>> tt_svd(const TensorT<T>& w, std::size_t max_bond) {
    if (w.rank() < 1) throw ShapeError("tt_svd: tensor of rank >= 1 required");
    if (max_bond < 1) throw UsageError("tt_svd: max_bond must be >= 1");
    const std::size_t n = w.rank();

    if (n == 1) {
        std::vector<TensorT<T>> single;
        single.push_back(w.with_shape(Shape({w.shape().extent(0), 1})));
        return single;
    }

    std::vector<TensorT<T>> raw;  // (r_prev, d_j, r_j) chains, borders carry r=1
    raw.reserve(n);
    TensorT<T> cur = w;
    std::size_t r_prev = 1;
    std::size_t tail = w.count();

    for (std::size_t j = 0; j + 1 < n; ++j) {
        const std::size_t dj = w.shape().extent(j);
        const std::size_t rows = r_prev * dj;
        tail /= dj;
        const SvdT<T> f = svd_thin(cur.with_shape(Shape({rows, tail})));
        const std::size_t r = kept_rank(f.s, max_bond);

        std::vector<T> core(rows * r);
        const std::size_t rmin = f.s.count();
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t c = 0; c < r; ++c) core[i * r + c] = f.u[i * rmin + c];
        raw.emplace_back(Shape({r_prev, dj, r}), std::move(core));

        std::vector<T> next(r * tail);
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t t = 0; t < tail; ++t) next[i * tail + t] = f.s[i] * f.v[t * rmin + i];
        cur = TensorT<T>(Shape({r, tail}), std::move(next));
        r_prev = r;
    }
    raw.push_back(cur.with_shape(Shape({r_prev, w.shape().extent(n - 1)})));

    // Normalize border shapes and attach the unit output axis at ⌊N/2⌋.
    const std::size_t pos = n / 2;
    std::vector<TensorT<T>> cores;
    cores.reserve(n);
    for (std::size_t j = 0; j < n; ++j) {
        const Shape& s = raw[j].shape();
        if (j == 0) {
            cores.push_back(raw[j].with_shape(Shape({s.extent(1), s.extent(2)})));
        } else if (j + 1 == n) {
            if (j == pos)
                cores.push_back(raw[j].with_shape(Shape({s.extent(0), s.extent(1), 1})));
            else
                cores.push_back(raw[j]);
        } else {
            if (j == pos)
                cores.push_back(
                    raw[j].with_shape(Shape({s.extent(0), s.extent(1), 1, s.extent(2)})));
            else
                cores.push_back(raw[j]);
        }
    }
    return cores;
}

#define LOTENET_INSTANTIATE_TT(T)                                            \
    template TensorT<T> full_from_cores<T>(std::span<const TensorT<T>>);     \
    template std::vector<TensorT<T>> tt_svd<T>(const TensorT<T>&, std::size_t);

LOTENET_INSTANTIATE_TT(float)
LOTENET_INSTANTIATE_TT(double)

#undef LOTENET_INSTANTIATE_TT

}  // namespace lotenet

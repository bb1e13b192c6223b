#include "lotenet/svd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "lotenet/errors.hpp"

namespace lotenet {

namespace {

// Column-major work matrix: col(j) spans [j*rows, (j+1)*rows).
template <typename T>
struct ColMat {
    std::size_t rows, cols;
    std::vector<T> a;
    ColMat(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, T(0)) {}
    T* col(std::size_t j) { return a.data() + j * rows; }
    const T* col(std::size_t j) const { return a.data() + j * rows; }
};

template <typename T>
T dot(const T* x, const T* y, std::size_t n) {
    T acc = T(0);
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

}  // namespace

template <typename T>
SvdT<T> svd_thin(const TensorT<T>& a) {
    if (a.rank() != 2) throw ShapeError("svd: rank-2 tensor required, got " + a.shape().str());
    const std::size_t m = a.shape().extent(0);
    const std::size_t n = a.shape().extent(1);
    const bool transposed = m < n;
    const std::size_t wr = transposed ? n : m;  // work rows ≥ work cols
    const std::size_t wc = transposed ? m : n;

    ColMat<T> b(wr, wc);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const T x = a[i * n + j];
            if (transposed)
                b.col(i)[j] = x;
            else
                b.col(j)[i] = x;
        }

    ColMat<T> v(wc, wc);
    for (std::size_t j = 0; j < wc; ++j) v.col(j)[j] = T(1);

    const T tol = T(32) * std::numeric_limits<T>::epsilon();
    for (int sweep = 0; sweep < 60; ++sweep) {
        bool rotated = false;
        for (std::size_t p = 0; p + 1 < wc; ++p) {
            for (std::size_t q = p + 1; q < wc; ++q) {
                T* bp = b.col(p);
                T* bq = b.col(q);
                const T app = dot(bp, bp, wr);
                const T aqq = dot(bq, bq, wr);
                const T apq = dot(bp, bq, wr);
                if (std::abs(apq) <= tol * std::sqrt(app * aqq)) continue;
                rotated = true;

                const T zeta = (aqq - app) / (T(2) * apq);
                const T t = (zeta >= T(0) ? T(1) : T(-1)) /
                            (std::abs(zeta) + std::sqrt(T(1) + zeta * zeta));
                const T c = T(1) / std::sqrt(T(1) + t * t);
                const T s = c * t;

                for (std::size_t i = 0; i < wr; ++i) {
                    const T xp = bp[i], xq = bq[i];
                    bp[i] = c * xp - s * xq;
                    bq[i] = s * xp + c * xq;
                }
                T* vp = v.col(p);
                T* vq = v.col(q);
                for (std::size_t i = 0; i < wc; ++i) {
                    const T xp = vp[i], xq = vq[i];
                    vp[i] = c * xp - s * xq;
                    vq[i] = s * xp + c * xq;
                }
            }
        }
        if (!rotated) break;
    }

    std::vector<T> sigma(wc);
    for (std::size_t j = 0; j < wc; ++j) sigma[j] = std::sqrt(dot(b.col(j), b.col(j), wr));

    std::vector<std::size_t> order(wc);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return sigma[x] > sigma[y]; });

    // Work-side factors: W = U diag(s) Vᵗ with U wr×wc, V wc×wc.
    std::vector<T> s_sorted(wc);
    std::vector<T> u_raw(wr * wc, T(0));
    std::vector<T> v_raw(wc * wc, T(0));
    for (std::size_t j = 0; j < wc; ++j) {
        const std::size_t src = order[j];
        s_sorted[j] = sigma[src];
        const T* bc = b.col(src);
        if (sigma[src] > T(0))
            for (std::size_t i = 0; i < wr; ++i) u_raw[i * wc + j] = bc[i] / sigma[src];
        const T* vc = v.col(src);
        for (std::size_t i = 0; i < wc; ++i) v_raw[i * wc + j] = vc[i];
    }

    TensorT<T> u_work(Shape({wr, wc}), std::move(u_raw));
    TensorT<T> v_work(Shape({wc, wc}), std::move(v_raw));
    TensorT<T> s_out(Shape({wc}), std::move(s_sorted));
    if (!transposed) return SvdT<T>{std::move(u_work), std::move(s_out), std::move(v_work)};
    // A = Wᵗ = V diag(s) Uᵗ: roles swap.
    return SvdT<T>{std::move(v_work), std::move(s_out), std::move(u_work)};
}

template SvdT<float> svd_thin<float>(const TensorT<float>&);
template SvdT<double> svd_thin<double>(const TensorT<double>&);

}  // namespace lotenet

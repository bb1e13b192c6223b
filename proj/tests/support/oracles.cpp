#include "support/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace oracles {

namespace {

std::vector<std::size_t> strides_of(const Shape& s) {
    std::vector<std::size_t> st(s.rank(), 1);
    for (std::size_t i = s.rank(); i-- > 1;) st[i - 1] = st[i] * s.extent(i);
    return st;
}

std::size_t flat_of(const std::vector<std::size_t>& idx, const std::vector<std::size_t>& st) {
    std::size_t f = 0;
    for (std::size_t i = 0; i < idx.size(); ++i) f += idx[i] * st[i];
    return f;
}

bool advance(std::vector<std::size_t>& idx, const std::vector<std::size_t>& dims) {
    for (std::size_t i = idx.size(); i-- > 0;) {
        if (++idx[i] < dims[i]) return true;
        idx[i] = 0;
    }
    return false;
}

}  // namespace

TensorD naive_contract(const TensorD& a, const TensorD& b,
                       const std::vector<std::size_t>& axes_a,
                       const std::vector<std::size_t>& axes_b) {
    if (axes_a.size() != axes_b.size()) throw std::invalid_argument("oracle: axis list mismatch");

    std::vector<bool> bound_a(a.rank(), false), bound_b(b.rank(), false);
    for (std::size_t ax : axes_a) bound_a[ax] = true;
    for (std::size_t ax : axes_b) bound_b[ax] = true;

    std::vector<std::size_t> free_a, free_b;
    for (std::size_t i = 0; i < a.rank(); ++i)
        if (!bound_a[i]) free_a.push_back(i);
    for (std::size_t i = 0; i < b.rank(); ++i)
        if (!bound_b[i]) free_b.push_back(i);

    std::vector<std::size_t> out_dims, bound_dims;
    for (std::size_t ax : free_a) out_dims.push_back(a.shape().extent(ax));
    for (std::size_t ax : free_b) out_dims.push_back(b.shape().extent(ax));
    for (std::size_t ax : axes_a) bound_dims.push_back(a.shape().extent(ax));

    const Shape out_shape = out_dims.empty() ? Shape{} : Shape(out_dims);
    std::vector<double> out(out_shape.count(), 0.0);

    const std::vector<std::size_t> sa = strides_of(a.shape());
    const std::vector<std::size_t> sb = strides_of(b.shape());

    std::vector<std::size_t> oidx(out_dims.size(), 0);
    std::size_t out_flat = 0;
    do {
        std::vector<std::size_t> ia(a.rank(), 0), ib(b.rank(), 0);
        for (std::size_t i = 0; i < free_a.size(); ++i) ia[free_a[i]] = oidx[i];
        for (std::size_t i = 0; i < free_b.size(); ++i) ib[free_b[i]] = oidx[free_a.size() + i];

        double acc = 0.0;
        std::vector<std::size_t> kidx(bound_dims.size(), 0);
        do {
            for (std::size_t i = 0; i < axes_a.size(); ++i) {
                ia[axes_a[i]] = kidx[i];
                ib[axes_b[i]] = kidx[i];
            }
            acc += a[flat_of(ia, sa)] * b[flat_of(ib, sb)];
        } while (!bound_dims.empty() && advance(kidx, bound_dims));
        out[out_flat++] = acc;
    } while (!out_dims.empty() && advance(oidx, out_dims));

    return TensorD(out_shape, std::move(out));
}

double naive_trace_product(const TensorD& a, const TensorD& b) {
    const std::size_t n = a.shape().extent(0);
    const std::size_t m = a.shape().extent(1);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j)
            acc += a.at({i, j}) * b.at({j, i});
    return acc;
}

double central_diff(const std::function<double(double)>& f, double x, double h) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

std::vector<TensorD> fd_gradients(const std::function<double(const std::vector<TensorD>&)>& f,
                                  const std::vector<TensorD>& at, double h) {
    std::vector<TensorD> grads;
    grads.reserve(at.size());
    for (std::size_t p = 0; p < at.size(); ++p) {
        std::vector<double> g(at[p].count());
        for (std::size_t i = 0; i < g.size(); ++i) {
            auto nudged = [&](double delta) {
                std::vector<TensorD> args = at;
                std::vector<double> vals(at[p].data().begin(), at[p].data().end());
                vals[i] += delta;
                args[p] = TensorD(at[p].shape(), std::move(vals));
                return f(args);
            };
            g[i] = (nudged(h) - nudged(-h)) / (2.0 * h);
        }
        grads.emplace_back(at[p].shape(), std::move(g));
    }
    return grads;
}

double max_rel_err(const TensorD& a, const TensorD& b) {
    if (!(a.shape() == b.shape())) return std::numeric_limits<double>::infinity();
    double worst = 0.0;
    for (std::size_t i = 0; i < a.count(); ++i) {
        const double denom = std::max({1.0, std::abs(a[i]), std::abs(b[i])});
        worst = std::max(worst, std::abs(a[i] - b[i]) / denom);
    }
    return worst;
}

double frob_rel_err(const TensorD& a, const TensorD& b) {
    if (a.count() != b.count()) return std::numeric_limits<double>::infinity();
    double diff = 0.0, ref = 0.0;
    for (std::size_t i = 0; i < a.count(); ++i) {
        diff += (a[i] - b[i]) * (a[i] - b[i]);
        ref += b[i] * b[i];
    }
    return ref == 0.0 ? std::sqrt(diff) : std::sqrt(diff / ref);
}

namespace {

// Dominant singular triple of the rows x cols matrix m via power iteration
// on the smaller Gram matrix. Returns sigma; fills u (rows) and v (cols).
double power_triple(const std::vector<double>& m, std::size_t rows, std::size_t cols,
                    std::vector<double>& u, std::vector<double>& v, lotenet::Rng& rng) {
    const bool row_side = rows <= cols;
    const std::size_t k = row_side ? rows : cols;
    std::vector<double> x(k), y(k);
    for (double& e : x) e = rng.next_normal();

    auto normalize = [](std::vector<double>& z) {
        double nn = 0.0;
        for (double e : z) nn += e * e;
        nn = std::sqrt(nn);
        if (nn > 0.0)
            for (double& e : z) e /= nn;
        return nn;
    };
    normalize(x);

    for (int it = 0; it < 2000; ++it) {
        // y = G x with G the k x k Gram matrix, applied as two passes.
        std::vector<double> mid(row_side ? cols : rows, 0.0);
        if (row_side) {
            for (std::size_t i = 0; i < rows; ++i)
                for (std::size_t j = 0; j < cols; ++j) mid[j] += m[i * cols + j] * x[i];
            std::fill(y.begin(), y.end(), 0.0);
            for (std::size_t i = 0; i < rows; ++i)
                for (std::size_t j = 0; j < cols; ++j) y[i] += m[i * cols + j] * mid[j];
        } else {
            for (std::size_t i = 0; i < rows; ++i)
                for (std::size_t j = 0; j < cols; ++j) mid[i] += m[i * cols + j] * x[j];
            std::fill(y.begin(), y.end(), 0.0);
            for (std::size_t i = 0; i < rows; ++i)
                for (std::size_t j = 0; j < cols; ++j) y[j] += m[i * cols + j] * mid[i];
        }
        x = y;
        if (normalize(x) == 0.0) break;
    }

    u.assign(rows, 0.0);
    v.assign(cols, 0.0);
    if (row_side) {
        u = x;
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < cols; ++j) v[j] += m[i * cols + j] * u[i];
        double sigma = 0.0;
        for (double e : v) sigma += e * e;
        sigma = std::sqrt(sigma);
        if (sigma > 0.0)
            for (double& e : v) e /= sigma;
        return sigma;
    }
    v = x;
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) u[i] += m[i * cols + j] * v[j];
    double sigma = 0.0;
    for (double e : u) sigma += e * e;
    sigma = std::sqrt(sigma);
    if (sigma > 0.0)
        for (double& e : u) e /= sigma;
    return sigma;
}

}  // namespace

double tt_rank1_error(const TensorD& w, lotenet::Rng& rng) {
    const std::size_t n = w.rank();
    std::vector<std::vector<double>> factors;  // unit vectors per site
    std::vector<double> cur(w.data().begin(), w.data().end());
    std::size_t tail = w.count();

    for (std::size_t j = 0; j + 1 < n; ++j) {
        const std::size_t dj = w.shape().extent(j);
        tail /= dj;
        std::vector<double> u, v;
        const double sigma = power_triple(cur, dj, tail, u, v, rng);
        factors.push_back(u);
        cur.assign(tail, 0.0);
        for (std::size_t t = 0; t < tail; ++t) cur[t] = sigma * v[t];
    }

    // Reconstruction is the outer product of the unit factors and the final
    // sigma-carrying vector.
    std::vector<double> recon{1.0};
    for (const std::vector<double>& f : factors) {
        std::vector<double> next(recon.size() * f.size());
        for (std::size_t a = 0; a < recon.size(); ++a)
            for (std::size_t b = 0; b < f.size(); ++b) next[a * f.size() + b] = recon[a] * f[b];
        recon = std::move(next);
    }
    std::vector<double> full(recon.size() * cur.size());
    for (std::size_t a = 0; a < recon.size(); ++a)
        for (std::size_t b = 0; b < cur.size(); ++b) full[a * cur.size() + b] = recon[a] * cur[b];

    const std::size_t total = full.size();
    return frob_rel_err(TensorD(Shape({total}), std::move(full)),
                        TensorD(Shape({w.count()}),
                                std::vector<double>(w.data().begin(), w.data().end())));
}

}  // namespace oracles

namespace oracles {

double pair_count_auc(const std::vector<double>& scores,
                      const std::vector<std::size_t>& labels) {
    double wins = 0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] != 1) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (labels[j] != 0) continue;
            ++pairs;
            if (scores[i] > scores[j])
                wins += 1.0;
            else if (scores[i] == scores[j])
                wins += 0.5;
        }
    }
    return wins / static_cast<double>(pairs);
}

}  // namespace oracles

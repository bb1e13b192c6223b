#include <gtest/gtest.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <vector>

#include "lotenet/errors.hpp"
#include "lotenet/ltt_io.hpp"
#include "lotenet/mac_counter.hpp"
#include "lotenet/parallel.hpp"
#include "lotenet/rng.hpp"
#include "lotenet/shape.hpp"
#include "lotenet/tensor.hpp"
#include "lotenet/tensor_ops.hpp"
#include "support/oracles.hpp"

using namespace lotenet;
using oracles::max_rel_err;

namespace {

TensorD random_t(Shape shape, Rng& rng) { return random_uniform<double>(std::move(shape), rng, -1.0, 1.0); }

}  // namespace

TEST(Shape, BasicsAndErrors) {
    Shape s({3, 4, 5});
    EXPECT_EQ(s.rank(), 3u);
    EXPECT_EQ(s.count(), 60u);
    EXPECT_EQ(s.extent(1), 4u);
    EXPECT_EQ(s.str(), "3x4x5");
    EXPECT_THROW(s.extent(3), IndexError);
    EXPECT_THROW(Shape({2, 0, 3}), ShapeError);

    Shape scalar{};
    EXPECT_EQ(scalar.rank(), 0u);
    EXPECT_EQ(scalar.count(), 1u);
    EXPECT_EQ(scalar.str(), "scalar");
    EXPECT_TRUE(Shape({3, 4, 5}) == s);
    EXPECT_FALSE(Shape({3, 4}) == s);
}

TEST(Tensor, ConstructionAndIndexing) {
    TensorD z(Shape({2, 3}));
    EXPECT_EQ(z.count(), 6u);
    for (std::size_t i = 0; i < z.count(); ++i) EXPECT_EQ(z[i], 0.0);

    TensorD g = TensorD::generate(Shape({2, 3}), [](std::size_t i) { return double(i); });
    EXPECT_EQ(g.at({0, 2}), 2.0);
    EXPECT_EQ(g.at({1, 0}), 3.0);
    EXPECT_THROW(g.at({2, 0}), IndexError);
    EXPECT_THROW(g.at({0}), IndexError);
    EXPECT_THROW(TensorD(Shape({2, 2}), std::vector<double>{1.0, 2.0}), ShapeError);

    TensorD id = TensorD::identity(3);
    EXPECT_EQ(id.at({1, 1}), 1.0);
    EXPECT_EQ(id.at({1, 2}), 0.0);

    TensorD flat = g.with_shape(Shape({6}));
    EXPECT_EQ(flat.data().data(), g.data().data());
    EXPECT_THROW(g.with_shape(Shape({5})), ShapeError);
}

TEST(Contract, IdentityPassesVectorThrough) {
    TensorD m = TensorD::identity(3);
    TensorD v(Shape({3}), {2.0, 5.0, 7.0});
    TensorD r = contract(m, v, {1}, {0});
    ASSERT_TRUE(r.shape() == Shape({3}));
    EXPECT_EQ(r[0], 2.0);
    EXPECT_EQ(r[1], 5.0);
    EXPECT_EQ(r[2], 7.0);
}

TEST(Contract, OnesCountSummedAxis) {
    TensorD x = TensorD::full(Shape({2, 3}), 1.0);
    TensorD y = TensorD::full(Shape({3, 4}), 1.0);
    TensorD r = contract(x, y, {1}, {0});
    ASSERT_TRUE(r.shape() == Shape({2, 4}));
    for (std::size_t i = 0; i < r.count(); ++i) EXPECT_EQ(r[i], 3.0);
}

TEST(Contract, TwoAxisPairingMatchesFiveNestedLoops) {
    Rng rng(11);
    TensorD a = random_t(Shape({2, 3, 4}), rng);
    TensorD b = random_t(Shape({4, 3}), rng);
    TensorD r = contract(a, b, {2, 1}, {0, 1});
    ASSERT_TRUE(r.shape() == Shape({2}));

    for (std::size_t i = 0; i < 2; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < 3; ++j)
            for (std::size_t k = 0; k < 4; ++k) acc += a.at({i, j, k}) * b.at({k, j});
        EXPECT_NEAR(r[i], acc, 1e-12);
    }
}

TEST(Contract, AgreesWithNaiveOracleOnRandomPairings) {
    Rng rng(29);
    int cases = 0;
    while (cases < 200) {
        const std::size_t ra = 1 + rng.next_below(3);
        std::vector<std::size_t> da(ra);
        for (auto& e : da) e = 1 + rng.next_below(4);
        const std::size_t npair = 1 + rng.next_below(std::min<std::size_t>(ra, 2));

        std::vector<std::size_t> order(ra);
        for (std::size_t i = 0; i < ra; ++i) order[i] = i;
        rng.shuffle(order);
        std::vector<std::size_t> axes_a(order.begin(), order.begin() + npair);

        const std::size_t extra_b = rng.next_below(2);
        const std::size_t rb = npair + extra_b;
        std::vector<std::size_t> db(rb);
        std::vector<std::size_t> axes_b(npair);
        std::vector<std::size_t> border(rb);
        for (std::size_t i = 0; i < rb; ++i) border[i] = i;
        rng.shuffle(border);
        for (std::size_t i = 0; i < npair; ++i) axes_b[i] = border[i];
        for (std::size_t i = 0; i < rb; ++i) db[i] = 1 + rng.next_below(4);
        for (std::size_t i = 0; i < npair; ++i) db[axes_b[i]] = da[axes_a[i]];

        Shape sa(da), sb(db);
        if (sa.count() > 256 || sb.count() > 256) continue;
        ++cases;

        TensorD a = random_t(sa, rng);
        TensorD b = random_t(sb, rng);
        TensorD got = contract(a, b, std::span<const std::size_t>(axes_a),
                               std::span<const std::size_t>(axes_b));
        TensorD want = oracles::naive_contract(a, b, axes_a, axes_b);
        ASSERT_TRUE(got.shape() == want.shape());
        EXPECT_LE(max_rel_err(got, want), 1e-12);
    }
}

TEST(Contract, Bilinearity) {
    Rng rng(3);
    for (int rep = 0; rep < 20; ++rep) {
        TensorD a = random_t(Shape({3, 4}), rng);
        TensorD b = random_t(Shape({3, 4}), rng);
        TensorD c = random_t(Shape({4, 2}), rng);
        const double alpha = 2.0 * rng.next_unit() - 1.0;

        TensorD lhs = contract(add(scale(a, alpha), b), c, {1}, {0});
        TensorD rhs = add(scale(contract(a, c, {1}, {0}), alpha), contract(b, c, {1}, {0}));
        EXPECT_LE(max_rel_err(lhs, rhs), 1e-12);
    }
}

TEST(Contract, ErrorsNameOffendingAxes) {
    TensorD a(Shape({2, 4}));
    TensorD b(Shape({3, 5}));
    try {
        contract(a, b, {1}, {0});
        FAIL() << "extent mismatch not detected";
    } catch (const ShapeError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("axis 1"), std::string::npos) << msg;
        EXPECT_NE(msg.find("extent 4"), std::string::npos) << msg;
        EXPECT_NE(msg.find("axis 0"), std::string::npos) << msg;
        EXPECT_NE(msg.find("extent 3"), std::string::npos) << msg;
    }
    EXPECT_THROW(contract(a, b, {2}, {0}), IndexError);
    EXPECT_THROW(contract(a, b, {0, 0}, {0, 1}), IndexError);
    EXPECT_THROW(contract(a, b, {0, 1}, {0}), UsageError);
}

TEST(TraceProduct, KnownValuesAndOracle) {
    TensorD id2 = TensorD::identity(2);
    EXPECT_EQ(trace_product(id2, id2)[0], 2.0);

    TensorD a(Shape({2, 2}), {1.0, 2.0, 3.0, 4.0});
    EXPECT_EQ(trace_product(a, id2)[0], 5.0);

    Rng rng(7);
    TensorD x = random_t(Shape({3, 3}), rng);
    TensorD y = random_t(Shape({3, 3}), rng);
    EXPECT_NEAR(trace_product(x, y)[0], oracles::naive_trace_product(x, y), 1e-12);

    EXPECT_THROW(trace_product(TensorD(Shape({2, 3})), TensorD(Shape({2, 3}))), ShapeError);
}

TEST(ReshapePermute, RoundTripsAndMultisetPreservation) {
    Rng rng(5);
    TensorD t = random_t(Shape({4, 4}), rng);
    TensorD back = reshape(reshape(t, Shape({16})), Shape({4, 4}));
    EXPECT_TRUE(back.equals(t));

    TensorD p = random_t(Shape({2, 3}), rng);
    TensorD twice = permute(permute(p, {1, 0}), {1, 0});
    EXPECT_TRUE(twice.equals(p));

    TensorD q = random_t(Shape({2, 3, 4}), rng);
    TensorD perm = permute(q, {2, 0, 1});
    ASSERT_TRUE(perm.shape() == Shape({4, 2, 3}));
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            for (std::size_t k = 0; k < 4; ++k) EXPECT_EQ(perm.at({k, i, j}), q.at({i, j, k}));

    std::vector<double> sv(q.data().begin(), q.data().end());
    std::vector<double> pv(perm.data().begin(), perm.data().end());
    std::sort(sv.begin(), sv.end());
    std::sort(pv.begin(), pv.end());
    EXPECT_EQ(sv, pv);

    EXPECT_THROW(permute(q, {0, 1}), ShapeError);
    EXPECT_THROW(permute(q, {0, 1, 1}), ShapeError);
    EXPECT_THROW(reshape(q, Shape({5})), ShapeError);
}

TEST(Stack, NewAxisPlacement) {
    TensorD v1(Shape({2}), {1.0, 2.0});
    TensorD v2(Shape({2}), {3.0, 4.0});
    TensorD v3(Shape({2}), {5.0, 6.0});
    std::vector<TensorD> parts{v1, v2, v3};

    TensorD rows = stack<double>(parts, 0);
    ASSERT_TRUE(rows.shape() == Shape({3, 2}));
    EXPECT_EQ(rows.at({0, 1}), 2.0);
    EXPECT_EQ(rows.at({2, 0}), 5.0);

    TensorD cols = stack<double>(parts, 1);
    ASSERT_TRUE(cols.shape() == Shape({2, 3}));
    EXPECT_EQ(cols.at({0, 2}), 5.0);
    EXPECT_EQ(cols.at({1, 0}), 2.0);

    std::vector<TensorD> bad{v1, TensorD(Shape({3}))};
    EXPECT_THROW(stack<double>(bad, 0), ShapeError);
    EXPECT_THROW(stack<double>(parts, 2), IndexError);
}

TEST(SliceUnslice, WindowCopyAndAdjoint) {
    TensorD t = TensorD::generate(Shape({3, 4}), [](std::size_t i) { return double(i); });
    TensorD win = slice(t, {1, 1}, {2, 2});
    ASSERT_TRUE(win.shape() == Shape({2, 2}));
    EXPECT_EQ(win.at({0, 0}), 5.0);
    EXPECT_EQ(win.at({1, 1}), 10.0);

    TensorD placed = unslice(win, t.shape(), std::vector<std::size_t>{1, 1});
    EXPECT_EQ(placed.at({1, 1}), 5.0);
    EXPECT_EQ(placed.at({0, 0}), 0.0);
    EXPECT_EQ(placed.at({2, 3}), 0.0);

    EXPECT_THROW(slice(t, {2, 0}, {2, 2}), IndexError);
    EXPECT_THROW(slice(t, {0}, {1}), ShapeError);
}

TEST(Elementwise, OpsAndSigmoid) {
    TensorD a(Shape({2}), {1.0, -2.0});
    TensorD b(Shape({2}), {0.5, 4.0});
    EXPECT_EQ(add(a, b)[1], 2.0);
    EXPECT_EQ(sub(a, b)[0], 0.5);
    EXPECT_EQ(mul(a, b)[1], -8.0);
    EXPECT_EQ(scale(a, -3.0)[0], -3.0);
    EXPECT_EQ(sum_all(a)[0], -1.0);
    EXPECT_THROW(add(a, TensorD(Shape({3}))), ShapeError);

    TensorD x(Shape({3}), {0.0, 800.0, -800.0});
    TensorD s = sigmoid(x);
    EXPECT_DOUBLE_EQ(s[0], 0.5);
    EXPECT_TRUE(s.all_finite());
    EXPECT_NEAR(s[1], 1.0, 1e-12);
    EXPECT_NEAR(s[2], 0.0, 1e-12);
}

TEST(MacCounter, CountsMatmulWork) {
    macs::Scope scope;
    TensorD a = TensorD::full(Shape({2, 3}), 1.0);
    TensorD b = TensorD::full(Shape({3, 4}), 1.0);
    (void)contract(a, b, {1}, {0});
    EXPECT_EQ(scope.elapsed(), 24u);
}

TEST(LttRecord, FileRoundTripIsBitIdentical) {
    const auto dir = std::filesystem::temp_directory_path() / "lotenet_ltt_test";
    std::filesystem::create_directories(dir);
    const auto path = dir / "t.ltt";

    Rng rng(13);
    TensorF t = random_uniform<float>(Shape({2, 3, 4}), rng, -5.0f, 5.0f);
    write_ltt_file(path, t);
    TensorF back = read_ltt_file(path);
    EXPECT_TRUE(back.equals(t));

    TensorF s = TensorF::scalar(2.5f);
    write_ltt_file(path, s);
    TensorF sback = read_ltt_file(path);
    EXPECT_EQ(sback.rank(), 0u);
    EXPECT_EQ(sback[0], 2.5f);

    std::filesystem::remove_all(dir);
}

TEST(LttRecord, RejectsDamagedFiles) {
    const auto dir = std::filesystem::temp_directory_path() / "lotenet_ltt_bad";
    std::filesystem::create_directories(dir);
    const auto path = dir / "bad.ltt";

    TensorF t = TensorF::full(Shape({2, 2}), 1.0f);
    write_ltt_file(path, t);

    {
        std::ofstream app(path, std::ios::binary | std::ios::app);
        app.put('x');
    }
    EXPECT_THROW(read_ltt_file(path), FormatError);

    {
        std::ofstream out(path, std::ios::binary);
        out.write("LTTX", 4);
    }
    EXPECT_THROW(read_ltt_file(path), FormatError);

    {
        std::ofstream out(path, std::ios::binary);
        write_ltt(out, t);
    }
    std::filesystem::resize_file(path, std::filesystem::file_size(path) - 3);
    EXPECT_THROW(read_ltt_file(path), FormatError);

    std::filesystem::remove_all(dir);
}

TEST(Rng, DeterministicStreamsAndBounds) {
    Rng a(42), b(42), c(43);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
    bool differs = false;
    for (int i = 0; i < 10; ++i) differs |= (b.next_u64() != c.next_u64());
    EXPECT_TRUE(differs);

    Rng d1 = Rng::derive(42, {1, 7});
    Rng d2 = Rng::derive(42, {1, 8});
    EXPECT_NE(d1.next_u64(), d2.next_u64());

    Rng r(9);
    for (int i = 0; i < 1000; ++i) {
        EXPECT_LT(r.next_below(17), 17u);
        const double u = r.next_unit();
        EXPECT_GE(u, 0.0);
        EXPECT_LT(u, 1.0);
    }
}

TEST(Rng, NormalMomentsAndShuffle) {
    Rng r(123);
    const int n = 100000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = r.next_normal();
        sum += x;
        sq += x * x;
    }
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    EXPECT_NEAR(mean, 0.0, 0.02);
    EXPECT_NEAR(var, 1.0, 0.03);

    std::vector<std::size_t> v(50);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = i;
    r.shuffle(v);
    std::vector<std::size_t> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) EXPECT_EQ(sorted[i], i);
    EXPECT_NE(v, sorted);
}

TEST(ParallelChunks, VisitsEveryIndexOnce) {
    const std::size_t n = 103;
    std::vector<std::atomic<int>> hits(n);
    for (auto& h : hits) h.store(0);
    parallel_chunks(n, 8, [&](std::size_t b, std::size_t e) {
        EXPECT_EQ(b % 8, 0u);
        for (std::size_t i = b; i < e; ++i) hits[i].fetch_add(1);
    });
    for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(hits[i].load(), 1);
}

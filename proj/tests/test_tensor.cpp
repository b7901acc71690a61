/* Copyright 2026 The bseg Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License. */
#include <cmath>
#include <cstring>
#include <numeric>

#include <gtest/gtest.h>

#include "bseg/gradcheck.hpp"
#include "bseg/rng.hpp"
#include "bseg/tensor.hpp"

namespace bseg {
namespace {

using T64 = Tensor<double>;

TEST(Tensor, ShapeAndSizeAgree)
{
    T64 t({2, 3, 4}, 1.5);
    EXPECT_EQ(t.size(), 24u);
    EXPECT_EQ(t.rank(), 3u);
    EXPECT_EQ(t.at(1, 2, 3), 1.5);
    EXPECT_EQ(t.offset({1, 2, 3}), 23u);
    EXPECT_THROW(T64({2, 0}), Error);
    EXPECT_THROW(T64({2, 2}, std::vector<double>{1, 2, 3}), Error);
}

TEST(Tensor, ReshapeKeepsData)
{
    T64 t({2, 3}, std::vector<double>{1, 2, 3, 4, 5, 6});
    const T64 r = t.reshaped({3, 2});
    EXPECT_EQ(r.at(2, 1), 6.0);
    EXPECT_THROW(t.reshaped({4, 2}), Error);
}

TEST(SeededUniform, SameSeedSameValues)
{
    RngStream a(7), b(7);
    const auto x = seeded_uniform<double>(a, {4});
    const auto y = seeded_uniform<double>(b, {4});
    ASSERT_EQ(x.size(), 4u);
    EXPECT_EQ(std::memcmp(x.raw(), y.raw(), 4 * sizeof(double)), 0);
}

TEST(SeededUniform, ValuesInsideClampedInterval)
{
    RngStream rng(123);
    const auto x = seeded_uniform<double>(rng, {10000});
    for (double v : x.data()) {
        EXPECT_GE(v, 1e-7);
        EXPECT_LE(v, 1.0 - 1e-7);
        EXPECT_TRUE(std::isfinite(std::log(v)) && std::isfinite(std::log1p(-v)));
    }
}

TEST(SeededUniform, DifferentSeedsMeanNearHalf)
{
    RngStream a(7), b(8);
    const auto x = seeded_uniform<double>(a, {1000});
    const auto y = seeded_uniform<double>(b, {1000});
    const double mx = std::accumulate(x.data().begin(), x.data().end(), 0.0) / 1000.0;
    const double my = std::accumulate(y.data().begin(), y.data().end(), 0.0) / 1000.0;
    EXPECT_NEAR(mx, 0.5, 0.05);
    EXPECT_NEAR(my, 0.5, 0.05);
    EXPECT_FALSE(x == y);
}

TEST(SeededUniform, EmptyShapeRejected)
{
    RngStream rng(1);
    try {
        seeded_uniform<double>(rng, {});
        FAIL() << "expected an error";
    } catch (const Error& e) {
        EXPECT_STREQ(e.what(), "empty shape");
    }
    EXPECT_THROW(seeded_uniform<double>(rng, {3, 0}), Error);
}

TEST(RngStream, PinnedSequence)
{
    // SplitMix64 over a counter: the first outputs are part of the format.
    RngStream rng(0);
    const std::uint64_t first = rng.next_u64();
    RngStream again(0);
    EXPECT_EQ(first, again.next_u64());
    EXPECT_EQ(first, RngStream::mix(RngStream::mix(0) + 0x9E3779B97F4A7C15ULL));
}

TEST(RngStream, DerivedStreamsDiffer)
{
    const RngStream root(42);
    RngStream a = root.derive(0), b = root.derive(1), c = root.derive(0);
    const auto x = a.next_u64(), y = b.next_u64();
    EXPECT_NE(x, y);
    EXPECT_EQ(x, c.next_u64());
    EXPECT_NE(RngStream(42).derive(0).seed(), RngStream(43).derive(0).seed());
}

TEST(FiniteDiff, SumGivesOnes)
{
    RngStream rng(3);
    T64 x({2, 3});
    for (auto& v : x.data())
        v = rng.normal();
    const auto g = finite_diff_gradient([](const T64& v) { return std::accumulate(v.data().begin(), v.data().end(), 0.0); },
                                        x);
    for (double v : g.data())
        EXPECT_NEAR(v, 1.0, 1e-9);
}

TEST(FiniteDiff, SumOfSquares)
{
    const T64 x({2}, std::vector<double>{1, 2});
    const auto g = finite_diff_gradient(
        [](const T64& v) {
            double s = 0;
            for (double e : v.data())
                s += e * e;
            return s;
        },
        x);
    EXPECT_NEAR(g[0], 2.0, 1e-6);
    EXPECT_NEAR(g[1], 4.0, 1e-6);
}

TEST(FiniteDiff, NonFiniteRejected)
{
    const T64 x({1}, 0.0);
    try {
        finite_diff_gradient([](const T64& v) { return std::log(v[0]); }, x);
        FAIL() << "expected an error";
    } catch (const Error& e) {
        EXPECT_STREQ(e.what(), "oracle evaluation failed");
    }
}

TEST(FiniteDiff, RelativeErrorMetric)
{
    EXPECT_DOUBLE_EQ(relative_error(0.5, 0.25), 0.25);
    EXPECT_DOUBLE_EQ(relative_error(100.0, 101.0), 1.0 / 101.0);
}

TEST(Broadcast, AddScalarLike)
{
    const T64 a({3}, std::vector<double>{1, 2, 3});
    const T64 b({3}, std::vector<double>{1, 1, 1});
    const auto c = broadcast_zip(a, b, std::plus<>());
    EXPECT_EQ(c, T64({3}, std::vector<double>{2, 3, 4}));
}

TEST(Broadcast, OuterProductLayout)
{
    const T64 a({2, 1}, std::vector<double>{2, 3});
    const T64 b({1, 3}, std::vector<double>{1, 10, 100});
    const auto c = broadcast_zip(a, b, std::multiplies<>());
    EXPECT_EQ(c.shape(), (Shape{2, 3}));
    EXPECT_EQ(c, T64({2, 3}, std::vector<double>{2, 20, 200, 3, 30, 300}));
}

TEST(Broadcast, MismatchRejected)
{
    const T64 a({5}, 1.0), b({1, 2}, 1.0);
    try {
        broadcast_zip(a, b, std::plus<>());
        FAIL() << "expected an error";
    } catch (const Error& e) {
        EXPECT_EQ(std::string(e.what()).rfind("broadcast mismatch", 0), 0u) << e.what();
    }
}

TEST(Broadcast, AddCommutesAndAssociates)
{
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        RngStream rng(seed);
        T64 a({3, 4}), b({3, 4}), c({3, 4});
        for (auto* t : {&a, &b, &c})
            for (auto& v : t->data())
                v = rng.normal();
        const auto ab = broadcast_zip(a, b, std::plus<>());
        const auto ba = broadcast_zip(b, a, std::plus<>());
        const auto l = broadcast_zip(ab, c, std::plus<>());
        const auto r = broadcast_zip(a, broadcast_zip(b, c, std::plus<>()), std::plus<>());
        for (std::size_t i = 0; i < a.size(); ++i) {
            EXPECT_NEAR(ab[i], ba[i], 1e-12);
            EXPECT_NEAR(l[i], r[i], 1e-12);
        }
    }
}

TEST(Reduce, SumAll)
{
    const T64 x({2, 2}, std::vector<double>{1, 2, 3, 4});
    EXPECT_EQ(reduce(x, all_axes(x), ReduceOp::sum)[0], 10.0);
}

TEST(Reduce, MaxWithArgmax)
{
    const T64 x({2, 2}, std::vector<double>{1, 5, 7, 2});
    const auto r = reduce_max(x, {1});
    EXPECT_EQ(r.values, T64({2}, std::vector<double>{5, 7}));
    EXPECT_EQ(r.argmax[0], 1u);
    EXPECT_EQ(r.argmax[1], 0u);
    EXPECT_EQ(reduce(x, {1}, ReduceOp::max), r.values);
}

TEST(Reduce, MeanOfUniformsNearHalf)
{
    RngStream rng(11);
    const auto x = seeded_uniform<double>(rng, {1000});
    EXPECT_NEAR(reduce(x, {0}, ReduceOp::mean)[0], 0.5, 0.05);
}

TEST(Reduce, BadAxisRejected)
{
    const T64 x({2, 2}, 0.0);
    EXPECT_THROW(reduce(x, {2}, ReduceOp::sum), Error);
}

} // namespace
} // namespace bseg

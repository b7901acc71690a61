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

#include <gtest/gtest.h>

#include "bseg/diag/gradient_suite.hpp"
#include "bseg/nn/activation.hpp"
#include "bseg/nn/batchnorm.hpp"
#include "bseg/nn/conv.hpp"
#include "bseg/nn/pooling.hpp"

namespace bseg {
namespace {

using T64 = Tensor<double>;
using diag::detail::normal_tensor;

T64 random_tensor(std::uint64_t seed, const Shape& shape)
{
    RngStream rng(seed);
    return normal_tensor(rng, shape);
}

double dot(const T64& a, const T64& b)
{
    return diag::detail::dot(a, b);
}

// ---- conv2d ---------------------------------------------------------------

TEST(Conv2d, IdentityKernelCopiesInput)
{
    const T64 x = random_tensor(1, {2, 3, 5, 4});
    auto p = nn::ConvParams<double>::zeros(3, 3);
    for (std::size_t c = 0; c < 3; ++c)
        p.weight.at(c, c, 1, 1) = 1.0;
    EXPECT_EQ(nn::conv2d(x, p), x);
}

TEST(Conv2d, OnesKernelOnConstantInput)
{
    const T64 x({1, 1, 5, 5}, 2.5);
    auto p = nn::ConvParams<double>::zeros(1, 1);
    p.weight.fill(1.0);
    const auto y = nn::conv2d(x, p);
    EXPECT_DOUBLE_EQ(y.at(0, 0, 2, 2), 9 * 2.5);
    EXPECT_DOUBLE_EQ(y.at(0, 0, 0, 0), 4 * 2.5); // zero padding at the corner
    EXPECT_DOUBLE_EQ(y.at(0, 0, 0, 2), 6 * 2.5);
}

TEST(Conv2d, MatchesDirectLoop)
{
    const T64 x = random_tensor(2, {2, 2, 4, 3});
    nn::ConvParams<double> p{random_tensor(3, {3, 2, 3, 3}), random_tensor(4, {3})};
    const auto y = nn::conv2d(x, p);
    for (std::size_t n = 0; n < 2; ++n)
        for (std::size_t o = 0; o < 3; ++o)
            for (std::size_t r = 0; r < 4; ++r)
                for (std::size_t c = 0; c < 3; ++c) {
                    double s = p.bias[o];
                    for (std::size_t i = 0; i < 2; ++i)
                        for (int dr = -1; dr <= 1; ++dr)
                            for (int dc = -1; dc <= 1; ++dc) {
                                const long rr = static_cast<long>(r) + dr, cc = static_cast<long>(c) + dc;
                                if (rr < 0 || rr >= 4 || cc < 0 || cc >= 3)
                                    continue;
                                s += p.weight.at(o, i, dr + 1, dc + 1) * x.at(n, i, rr, cc);
                            }
                    EXPECT_NEAR(y.at(n, o, r, c), s, 1e-12);
                }
}

TEST(Conv2d, ChannelMismatchRejected)
{
    const T64 x({1, 2, 4, 4}, 0.0);
    EXPECT_THROW(nn::conv2d(x, nn::ConvParams<double>::zeros(1, 3)), Error);
}

TEST(Conv2d, GradientOnOneByTwoByFiveByFive)
{
    const T64 x = random_tensor(5, {1, 2, 5, 5});
    nn::ConvParams<double> p{random_tensor(6, {2, 2, 3, 3}), random_tensor(7, {2})};
    const T64 r = random_tensor(8, {1, 2, 5, 5});
    auto g = nn::ConvParams<double>::zeros(2, 2);
    const T64 dx = nn::conv2d_backward(x, p, r, g);
    const auto ndx = finite_diff_gradient([&](const T64& v) { return dot(r, nn::conv2d(v, p)); }, x);
    const auto ndw = finite_diff_gradient(
        [&](const T64& v) { return dot(r, nn::conv2d(x, nn::ConvParams<double>{v, p.bias})); }, p.weight);
    const auto ndb = finite_diff_gradient(
        [&](const T64& v) { return dot(r, nn::conv2d(x, nn::ConvParams<double>{p.weight, v})); }, p.bias);
    EXPECT_LT(max_relative_error(dx.data(), ndx.data()), 1e-4);
    EXPECT_LT(max_relative_error(g.weight.data(), ndw.data()), 1e-4);
    EXPECT_LT(max_relative_error(g.bias.data(), ndb.data()), 1e-4);
}

TEST(Conv2d, RandomizedGradientCheck)
{
    for (std::uint64_t s = 0; s < 20; ++s) {
        RngStream rng(1000 + s);
        std::size_t coords = 0;
        EXPECT_LT(diag::detail::check_conv(rng, coords), 1e-4) << "seed " << s;
    }
}

// ---- batchnorm2d ----------------------------------------------------------

TEST(BatchNorm, ConstantInputGivesZeros)
{
    const T64 x({2, 3, 2, 2}, 4.0);
    const auto y = nn::batchnorm2d(x, nn::BatchNormParams<double>::identity(3), true);
    for (double v : y.data())
        EXPECT_EQ(v, 0.0);
}

TEST(BatchNorm, StandardizedInputPassesThrough)
{
    // one channel, values with mean 0 and (biased) variance 1
    const T64 x({1, 1, 2, 2}, std::vector<double>{-1, 1, -1, 1});
    const auto y = nn::batchnorm2d(x, nn::BatchNormParams<double>::identity(1), true);
    for (std::size_t i = 0; i < 4; ++i)
        EXPECT_NEAR(y[i], x[i], 1e-3);
}

TEST(BatchNorm, DegenerateBatchRejected)
{
    const T64 x({1, 2, 1, 1}, 1.0);
    try {
        nn::batchnorm2d(x, nn::BatchNormParams<double>::identity(2), true);
        FAIL();
    } catch (const Error& e) {
        EXPECT_STREQ(e.what(), "degenerate batch");
    }
    EXPECT_NO_THROW(nn::batchnorm2d(x, nn::BatchNormParams<double>::identity(2), false));
}

TEST(BatchNorm, TrainOutputIsStandardized)
{
    for (std::uint64_t s = 0; s < 10; ++s) {
        const T64 x = random_tensor(20 + s, {3, 4, 5, 5});
        T64 shifted = x;
        for (auto& v : shifted.data())
            v = 3.0 * v + 7.0;
        const auto y = nn::batchnorm2d(shifted, nn::BatchNormParams<double>::identity(4), true);
        for (std::size_t c = 0; c < 4; ++c) {
            double sum = 0, sq = 0;
            for (std::size_t n = 0; n < 3; ++n)
                for (std::size_t i = 0; i < 25; ++i)
                    sum += y[(n * 4 + c) * 25 + i];
            const double mean = sum / 75;
            for (std::size_t n = 0; n < 3; ++n)
                for (std::size_t i = 0; i < 25; ++i)
                    sq += (y[(n * 4 + c) * 25 + i] - mean) * (y[(n * 4 + c) * 25 + i] - mean);
            EXPECT_LT(std::abs(mean), 1e-10);
            EXPECT_NEAR(sq / 75, 1.0, 1e-3);
        }
    }
}

TEST(BatchNorm, EvalUsesRunningStatistics)
{
    auto p = nn::BatchNormParams<double>::identity(1);
    p.running_mean[0] = 2.0;
    p.running_var[0] = 4.0;
    const T64 x({1, 1, 1, 2}, std::vector<double>{2.0, 4.0});
    const auto y = nn::batchnorm2d(x, p, false);
    EXPECT_NEAR(y[0], 0.0, 1e-12);
    EXPECT_NEAR(y[1], 2.0 / std::sqrt(4.0 + 1e-5), 1e-12);
}

TEST(BatchNorm, RunningStatisticsUpdate)
{
    auto p = nn::BatchNormParams<double>::identity(1);
    const T64 x({1, 1, 1, 4}, std::vector<double>{1, 2, 3, 4});
    nn::BatchMoments<double> m;
    nn::batchnorm2d(x, p, true, static_cast<nn::BatchNormCache<double>*>(nullptr), &m);
    EXPECT_EQ(p.running_mean[0], 0.0); // the forward itself never mutates
    nn::update_running_stats(p, m);
    EXPECT_NEAR(p.running_mean[0], 0.1 * 2.5, 1e-15);
    // unbiased batch variance of {1,2,3,4} is 5/3
    EXPECT_NEAR(p.running_var[0], 0.9 * 1.0 + 0.1 * 5.0 / 3.0, 1e-15);
}

TEST(BatchNorm, GradientOnTwoByThreeByFourByFour)
{
    const T64 x = random_tensor(30, {2, 3, 4, 4});
    auto p = nn::BatchNormParams<double>::identity(3);
    p.gamma = random_tensor(31, {3});
    p.beta = random_tensor(32, {3});
    const auto frozen = p;
    const T64 r = random_tensor(33, {2, 3, 4, 4});
    nn::BatchNormCache<double> cache;
    nn::batchnorm2d(x, p, true, &cache);
    auto g = nn::BatchNormGrads<double>::zeros(3);
    const T64 dx = nn::batchnorm2d_backward(r, p, cache, g);
    const auto ndx = finite_diff_gradient([&](const T64& v) { return dot(r, nn::batchnorm2d(v, p, true)); }, x);
    EXPECT_LT(max_relative_error(dx.data(), ndx.data()), 1e-4);
    EXPECT_EQ(p.running_mean, frozen.running_mean);
    EXPECT_EQ(p.running_var, frozen.running_var);
}

TEST(BatchNorm, RandomizedGradientCheck)
{
    for (std::uint64_t s = 0; s < 20; ++s) {
        RngStream rng(2000 + s);
        std::size_t coords = 0;
        EXPECT_LT(diag::detail::check_batchnorm(rng, coords), 1e-4) << "seed " << s;
    }
}

// ---- relu -------------------------------------------------------------------

TEST(Relu, ClampsNegatives)
{
    const T64 x({3}, std::vector<double>{-1, 0, 2});
    EXPECT_EQ(nn::relu(x), T64({3}, std::vector<double>{0, 0, 2}));
}

TEST(Relu, AllNegativeHasZeroGradient)
{
    const T64 x({4}, -0.5);
    EXPECT_EQ(nn::relu(x), T64({4}, 0.0));
    EXPECT_EQ(nn::relu_backward(x, T64({4}, 1.0)), T64({4}, 0.0));
}

TEST(Relu, SubgradientAtZeroIsZero)
{
    const T64 x({1}, 0.0);
    EXPECT_EQ(nn::relu_backward(x, T64({1}, 1.0))[0], 0.0);
}

TEST(Relu, GradientIsIndicatorAwayFromZero)
{
    for (std::uint64_t s = 0; s < 20; ++s) {
        RngStream rng(3000 + s);
        std::size_t coords = 0;
        EXPECT_LT(diag::detail::check_relu(rng, coords), 1e-4);
    }
    const T64 x = random_tensor(40, {50});
    const T64 g = nn::relu_backward(x, T64({50}, 1.0));
    for (std::size_t i = 0; i < 50; ++i)
        EXPECT_EQ(g[i], x[i] > 0 ? 1.0 : 0.0);
}

// ---- pooling ----------------------------------------------------------------

TEST(MaxPool, PicksWindowMaximum)
{
    const T64 x({1, 1, 2, 2}, std::vector<double>{1, 3, 2, 0});
    const auto r = nn::maxpool2x2(x);
    EXPECT_EQ(r.values, T64({1, 1, 1, 1}, 3.0));
    EXPECT_EQ(r.indices.argmax[0], 1u);
}

TEST(MaxPool, TieGoesToSmallestOffset)
{
    const T64 x({1, 1, 2, 2}, 5.0);
    const auto r = nn::maxpool2x2(x);
    EXPECT_EQ(r.values[0], 5.0);
    EXPECT_EQ(r.indices.argmax[0], 0u);
}

TEST(MaxPool, OddDimsRejected)
{
    try {
        nn::maxpool2x2(T64({1, 1, 3, 4}, 0.0));
        FAIL();
    } catch (const Error& e) {
        EXPECT_STREQ(e.what(), "spatial dims must be even");
    }
}

TEST(MaxPool, MatchesBruteForceWindows)
{
    for (std::uint64_t s = 0; s < 30; ++s) {
        RngStream rng(4000 + s);
        const std::size_t n = 1 + rng.below(2), c = 1 + rng.below(3), h = 2 * (1 + rng.below(3)),
                          w = 2 * (1 + rng.below(3));
        T64 x({n, c, h, w});
        for (auto& v : x.data())
            v = static_cast<double>(rng.below(4)); // plenty of ties
        const auto r = nn::maxpool2x2(x);
        for (std::size_t b = 0; b < n; ++b)
            for (std::size_t ch = 0; ch < c; ++ch)
                for (std::size_t i = 0; i < h / 2; ++i)
                    for (std::size_t j = 0; j < w / 2; ++j) {
                        double best = -1;
                        std::size_t where = 0;
                        for (std::size_t di = 0; di < 2; ++di)
                            for (std::size_t dj = 0; dj < 2; ++dj) {
                                const double v = x.at(b, ch, 2 * i + di, 2 * j + dj);
                                if (v > best) {
                                    best = v;
                                    where = (2 * i + di) * w + 2 * j + dj;
                                }
                            }
                        EXPECT_EQ(r.values.at(b, ch, i, j), best);
                        EXPECT_EQ(r.indices.argmax.at(b, ch, i, j), where);
                    }
    }
}

TEST(MaxPool, GradientOnFourByFour)
{
    RngStream rng(41);
    const T64 x = diag::detail::distinct_tensor(rng, {1, 1, 4, 4});
    const auto r = nn::maxpool2x2(x);
    const T64 up = random_tensor(42, r.values.shape());
    const T64 dx = nn::maxpool2x2_backward(up, r.indices);
    const auto ndx = finite_diff_gradient([&](const T64& v) { return dot(up, nn::maxpool2x2(v).values); }, x);
    EXPECT_LT(max_relative_error(dx.data(), ndx.data()), 1e-4);
}

TEST(MaxPool, RandomizedGradientCheck)
{
    for (std::uint64_t s = 0; s < 20; ++s) {
        RngStream rng(5000 + s);
        std::size_t coords = 0;
        EXPECT_LT(diag::detail::check_maxpool(rng, coords), 1e-4);
    }
}

TEST(MaxUnpool, ScattersToRecordedOffset)
{
    nn::PoolIndices idx{Tensor<std::uint32_t>({1, 1, 1, 1}, 1u), {1, 1, 2, 2}};
    const auto y = nn::maxunpool2x2(T64({1, 1, 1, 1}, 3.0), idx, {1, 1, 2, 2});
    EXPECT_EQ(y, T64({1, 1, 2, 2}, std::vector<double>{0, 3, 0, 0}));
}

TEST(MaxUnpool, CorruptIndicesRejected)
{
    // offset 4 is (row 1, col 0): outside the window of output (0,1) in a 2x4 plane
    nn::PoolIndices idx{Tensor<std::uint32_t>({1, 1, 1, 2}, std::vector<std::uint32_t>{0, 4}), {1, 1, 2, 4}};
    try {
        nn::maxunpool2x2(T64({1, 1, 1, 2}, 1.0), idx, {1, 1, 2, 4});
        FAIL();
    } catch (const Error& e) {
        EXPECT_STREQ(e.what(), "corrupt indices");
    }
}

TEST(MaxUnpool, PoolUnpoolPoolIsIdempotent)
{
    for (std::uint64_t s = 0; s < 50; ++s) {
        T64 x = random_tensor(6000 + s, {2, 3, 8, 6});
        for (auto& v : x.data())
            v = std::abs(v); // pooling inputs follow a ReLU
        const auto p = nn::maxpool2x2(x);
        const auto u = nn::maxunpool2x2(p.values, p.indices, x.shape());
        const auto again = nn::maxpool2x2(u);
        EXPECT_EQ(again.values, p.values);
    }
}

TEST(MaxUnpool, NonZeroOnlyAtArgmax)
{
    for (std::uint64_t s = 0; s < 20; ++s) {
        const T64 x = random_tensor(7000 + s, {1, 2, 6, 4});
        const auto p = nn::maxpool2x2(x);
        const auto u = nn::maxunpool2x2(p.values, p.indices, x.shape());
        std::vector<bool> is_max(x.size(), false);
        const std::size_t plane = 6 * 4;
        for (std::size_t i = 0; i < p.indices.argmax.size(); ++i)
            is_max[(i / (plane / 4)) * plane + p.indices.argmax[i]] = true;
        for (std::size_t i = 0; i < x.size(); ++i)
            EXPECT_EQ(u[i], is_max[i] ? x[i] : 0.0);
    }
}

TEST(MaxUnpool, RandomizedGradientCheck)
{
    for (std::uint64_t s = 0; s < 20; ++s) {
        RngStream rng(8000 + s);
        std::size_t coords = 0;
        EXPECT_LT(diag::detail::check_unpool(rng, coords), 1e-4);
    }
}

} // namespace
} // namespace bseg

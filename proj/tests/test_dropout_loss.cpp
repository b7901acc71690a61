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
#include "bseg/nn/concrete_dropout.hpp"
#include "bseg/nn/loss.hpp"

namespace bseg {
namespace {

using T64 = Tensor<double>;
using State = nn::ConcreteDropoutState<double>;

T64 random_tensor(std::uint64_t seed, const Shape& shape)
{
    RngStream rng(seed);
    return diag::detail::normal_tensor(rng, shape);
}

// ---- concrete dropout -----------------------------------------------------

TEST(ConcreteDropout, SymmetricPointIsIdentity)
{
    const T64 x = random_tensor(1, {2, 3, 4});
    const auto s = State::with_probability(0.5);
    T64 z;
    const auto y = nn::concrete_dropout_with_noise(x, s, T64(x.shape(), 0.5), &z);
    for (std::size_t i = 0; i < x.size(); ++i) {
        EXPECT_NEAR(z[i], 0.5, 1e-15);
        EXPECT_NEAR(y[i], x[i], 1e-15);
    }
}

TEST(ConcreteDropout, LowTemperatureDropFraction)
{
    const auto s = State::with_probability(0.3, 1e-6);
    RngStream rng(17);
    T64 z;
    nn::concrete_dropout(T64({10000}, 1.0), s, rng, nn::Mode::train, &z);
    std::size_t dropped = 0, unsaturated = 0;
    for (double v : z.data()) {
        unsaturated += !(v < 1e-6 || v > 1 - 1e-6);
        dropped += v > 0.5;
    }
    EXPECT_LE(unsaturated, 2u);
    EXPECT_NEAR(dropped / 1e4, 0.30, 0.02);
}

TEST(ConcreteDropout, EvalModeIsBitIdentical)
{
    const T64 x = random_tensor(2, {1, 4, 3, 3});
    RngStream rng(3);
    const auto y = nn::concrete_dropout(x, State::with_probability(0.4), rng, nn::Mode::eval);
    EXPECT_EQ(y, x);
}

TEST(ConcreteDropout, PreservesExpectation)
{
    for (double p : {0.1, 0.3, 0.5}) {
        const auto s = State::with_probability(p);
        RngStream rng(static_cast<std::uint64_t>(p * 100));
        const auto y = nn::concrete_dropout(T64({200000}, 2.0), s, rng, nn::Mode::mc);
        double mean = 0;
        for (double v : y.data())
            mean += v;
        mean /= 200000;
        // the relaxed mask at t = 0.1 keeps E[1-z] close to 1-p
        EXPECT_NEAR(mean, 2.0, 0.05) << "p=" << p;
    }
}

TEST(ConcreteDropout, SameStreamSameMask)
{
    const T64 x = random_tensor(4, {5, 5});
    RngStream a(9), b(9), c(10);
    const State s;
    const auto ya = nn::concrete_dropout(x, s, a, nn::Mode::train);
    const auto yb = nn::concrete_dropout(x, s, b, nn::Mode::train);
    const auto yc = nn::concrete_dropout(x, s, c, nn::Mode::train);
    EXPECT_EQ(ya, yb);
    EXPECT_FALSE(ya == yc);
}

TEST(ConcreteDropout, NonPositiveTemperatureRejected)
{
    const T64 x({2}, 1.0);
    auto s = State::with_probability(0.2, 0.0);
    EXPECT_THROW(nn::concrete_dropout_with_noise(x, s, T64({2}, 0.5)), Error);
}

TEST(ConcreteDropout, RandomizedGradientCheckIncludingLogit)
{
    for (std::uint64_t s = 0; s < 20; ++s) {
        RngStream rng(100 + s);
        std::size_t coords = 0;
        EXPECT_LT(diag::detail::check_dropout(rng, coords), 1e-4) << "seed " << s;
    }
}

// ---- regularizer ------------------------------------------------------------

TEST(DropoutRegularizer, EntropyAtHalf)
{
    const auto s = State::with_probability(0.5);
    const T64 w({1, 1, 3, 3}, 0.0);
    const double per_k = nn::concrete_dropout_regularizer(s, w, 1, 1, {0.0, 1.0});
    EXPECT_NEAR(per_k, -std::log(2.0), 1e-12);
    EXPECT_NEAR(nn::concrete_dropout_regularizer(s, w, 5, 1, {0.0, 1.0}) / 5, -0.6931, 1e-4);
}

TEST(DropoutRegularizer, ZeroWeightsUnitFactors)
{
    const auto s = State::with_probability(0.5);
    EXPECT_NEAR(nn::concrete_dropout_regularizer(s, T64({2, 1, 3, 3}, 0.0), 1, 1, {1.0, 1.0}), -0.6931,
                1e-4);
}

TEST(DropoutRegularizer, MatchesDirectFormula)
{
    const auto s = State::with_probability(0.2);
    const T64 w = random_tensor(5, {3, 4, 3, 3});
    const nn::RegularizerFactors f{0.3, 0.7};
    double sq = 0;
    for (double v : w.data())
        sq += v * v;
    const double p = 0.2, n = 10, k = 4;
    const double direct = f.weight / n * sq / (1 - p) + f.dropout / n * k * (p * std::log(p) + (1 - p) * std::log(1 - p));
    EXPECT_NEAR(nn::concrete_dropout_regularizer(s, w, 4, 10, f), direct, 1e-12);
}

TEST(DropoutRegularizer, LogitGradientMatchesFiniteDifferences)
{
    const T64 w = random_tensor(6, {2, 3, 3, 3});
    const nn::RegularizerFactors f{0.5, 0.9};
    auto s = State::with_probability(0.2);
    const auto term = nn::concrete_dropout_regularizer_grad(s, w, 3, 2, f);
    const auto num = finite_diff_gradient(
        [&](const T64& v) {
            State t = s;
            t.p_logit = v;
            return nn::concrete_dropout_regularizer(t, w, 3, 2, f);
        },
        s.p_logit);
    EXPECT_LT(relative_error(term.grad_p_logit, num[0]), 1e-6);
    for (std::uint64_t k = 0; k < 20; ++k) {
        RngStream rng(200 + k);
        std::size_t coords = 0;
        EXPECT_LT(diag::detail::check_regularizer(rng, coords), 1e-4);
    }
}

TEST(DropoutRegularizer, InvalidCountsRejected)
{
    const State s;
    EXPECT_THROW(nn::concrete_dropout_regularizer(s, T64({1}, 0.0), 0, 1), Error);
    EXPECT_THROW(nn::concrete_dropout_regularizer(s, T64({1}, 0.0), 1, 0), Error);
}

// ---- cross-entropy ------------------------------------------------------------

TEST(CrossEntropy, UniformLogits)
{
    const T64 logits({1, 12, 2, 3}, 0.0);
    const Mask target({1, 2, 3}, 4);
    EXPECT_NEAR(nn::softmax_cross_entropy(logits, target), std::log(12.0), 1e-12);
    EXPECT_NEAR(nn::softmax_cross_entropy(logits, target), 2.4849, 1e-4);
}

TEST(CrossEntropy, SaturatedCorrectClass)
{
    T64 logits({1, 12, 1, 2}, 0.0);
    logits.at(0, 3, 0, 0) = 50;
    logits.at(0, 7, 0, 1) = 50;
    const Mask target({1, 1, 2}, std::vector<std::uint8_t>{3, 7});
    EXPECT_LT(nn::softmax_cross_entropy(logits, target), 1e-9);
}

TEST(CrossEntropy, VoidPixelExcluded)
{
    const T64 logits = random_tensor(7, {1, 12, 2, 2});
    const Mask target({1, 2, 2}, std::vector<std::uint8_t>{2, kVoidLabel, 0, 11});
    T64 grad;
    const double loss = nn::softmax_cross_entropy(logits, target, &grad);
    double direct = 0;
    for (std::size_t i : {0u, 2u, 3u}) {
        double sum = 0;
        for (std::size_t c = 0; c < 12; ++c)
            sum += std::exp(logits[c * 4 + i]);
        direct += std::log(sum) - logits[target[i] * 4 + i];
    }
    EXPECT_NEAR(loss, direct / 3, 1e-12);
    for (std::size_t c = 0; c < 12; ++c)
        EXPECT_EQ(grad[c * 4 + 1], 0.0);
    const auto num = finite_diff_gradient([&](const T64& v) { return nn::softmax_cross_entropy(v, target); }, logits);
    EXPECT_LT(max_relative_error(grad.data(), num.data()), 1e-4);
}

TEST(CrossEntropy, AllVoidRejected)
{
    try {
        nn::softmax_cross_entropy(T64({1, 12, 1, 2}, 0.0), Mask({1, 1, 2}, kVoidLabel));
        FAIL();
    } catch (const Error& e) {
        EXPECT_STREQ(e.what(), "no supervised pixels");
    }
}

TEST(CrossEntropy, OutOfRangeTargetRejected)
{
    EXPECT_THROW(nn::softmax_cross_entropy(T64({1, 12, 1, 1}, 0.0), Mask({1, 1, 1}, 12)), Error);
}

TEST(CrossEntropy, InvariantToPerPixelShift)
{
    for (std::uint64_t s = 0; s < 20; ++s) {
        T64 logits = random_tensor(300 + s, {2, 12, 3, 3});
        RngStream rng(400 + s);
        Mask target({2, 3, 3});
        for (auto& t : target.data())
            t = static_cast<std::uint8_t>(rng.below(12));
        const double base = nn::softmax_cross_entropy(logits, target);
        const double shift = 10 * rng.normal();
        for (auto& v : logits.data())
            v += shift;
        EXPECT_NEAR(nn::softmax_cross_entropy(logits, target), base, 1e-10);
    }
}

TEST(CrossEntropy, SoftmaxSumsToOne)
{
    const auto prob = nn::softmax_channels(random_tensor(8, {2, 12, 3, 4}));
    for (std::size_t n = 0; n < 2; ++n)
        for (std::size_t i = 0; i < 12; ++i) {
            double sum = 0;
            for (std::size_t c = 0; c < 12; ++c)
                sum += prob[(n * 12 + c) * 12 + i];
            EXPECT_NEAR(sum, 1.0, 1e-12);
        }
}

TEST(CrossEntropy, RandomizedGradientCheck)
{
    for (std::uint64_t s = 0; s < 20; ++s) {
        RngStream rng(500 + s);
        std::size_t coords = 0;
        EXPECT_LT(diag::detail::check_cross_entropy(rng, coords), 1e-4);
    }
}

} // namespace
} // namespace bseg

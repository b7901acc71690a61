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
#ifndef BSEG_DIAG_GRADIENT_SUITE_HPP
#define BSEG_DIAG_GRADIENT_SUITE_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "bseg/gradcheck.hpp"
#include "bseg/model/segnet.hpp"
#include "bseg/nn/activation.hpp"
#include "bseg/nn/batchnorm.hpp"
#include "bseg/nn/concrete_dropout.hpp"
#include "bseg/nn/conv.hpp"
#include "bseg/nn/loss.hpp"
#include "bseg/nn/pooling.hpp"
#include "bseg/rng.hpp"
#include "bseg/train/objective.hpp"

namespace bseg::diag {

struct OpCheck {
    std::string op;
    double worst_error = 0;  ///< max relative error over all seeds and checked coordinates
    std::size_t seeds = 0;
    std::size_t coordinates = 0;
    double step = kDefaultFiniteDiffStep;
};

inline constexpr double kGradientTolerance = 1e-4;
inline constexpr std::size_t kDefaultSeedsPerOp = 20;

namespace detail {

using Tensor64 = Tensor<double>;

inline Tensor64 normal_tensor(RngStream& rng, const Shape& shape, double scale = 1.0)
{
    Tensor64 t(shape);
    for (auto& v : t.data())
        v = scale * rng.normal();
    return t;
}

/// Distinct values in random order, at least `gap` apart, so max selections are stable under ±h.
inline Tensor64 distinct_tensor(RngStream& rng, const Shape& shape, double gap = 1e-2)
{
    Tensor64 t(shape);
    std::vector<std::size_t> order(t.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(std::span<std::size_t>(order));
    const double mid = 0.5 * static_cast<double>(t.size());
    for (std::size_t i = 0; i < t.size(); ++i)
        t[i] = gap * (static_cast<double>(order[i]) - mid);
    return t;
}

inline double dot(const Tensor64& a, const Tensor64& b)
{
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += a[i] * b[i];
    return s;
}

/// Worst error of `analytic` against the central difference of `f` around `x`.
template <typename F>
double compare(F&& f, const Tensor64& x, const Tensor64& analytic, std::size_t& coords)
{
    const Tensor64 numeric = finite_diff_gradient(f, x);
    coords += x.size();
    return max_relative_error(analytic.data(), numeric.data());
}

inline std::size_t small(RngStream& rng, std::size_t lo, std::size_t hi)
{
    return lo + rng.below(hi - lo + 1);
}

/**
 * Each op check reduces the op output to a scalar through a fixed random
 * projection r, L = <r, op(...)>, and compares dL/d(every input) against
 * finite differences.
 */
inline double check_conv(RngStream& rng, std::size_t& coords)
{
    const std::size_t n = small(rng, 1, 2), c = small(rng, 1, 3), o = small(rng, 1, 3);
    const std::size_t h = small(rng, 3, 5), w = small(rng, 3, 5);
    const Tensor64 x = normal_tensor(rng, {n, c, h, w});
    nn::ConvParams<double> p{normal_tensor(rng, {o, c, 3, 3}), normal_tensor(rng, {o})};
    const Tensor64 r = normal_tensor(rng, {n, o, h, w});
    auto g = nn::ConvParams<double>::zeros(o, c);
    const Tensor64 dx = nn::conv2d_backward(x, p, r, g);
    double worst = compare([&](const Tensor64& v) { return dot(r, nn::conv2d(v, p)); }, x, dx, coords);
    worst = std::max(worst, compare([&](const Tensor64& v) {
        return dot(r, nn::conv2d(x, nn::ConvParams<double>{v, p.bias}));
    }, p.weight, g.weight, coords));
    worst = std::max(worst, compare([&](const Tensor64& v) {
        return dot(r, nn::conv2d(x, nn::ConvParams<double>{p.weight, v}));
    }, p.bias, g.bias, coords));
    return worst;
}

inline double check_batchnorm(RngStream& rng, std::size_t& coords)
{
    const std::size_t n = small(rng, 1, 2), c = small(rng, 1, 3), h = small(rng, 2, 4), w = small(rng, 2, 4);
    const Tensor64 x = normal_tensor(rng, {n, c, h, w}, 2.0);
    auto p = nn::BatchNormParams<double>::identity(c);
    p.gamma = normal_tensor(rng, {c});
    p.beta = normal_tensor(rng, {c});
    const Tensor64 r = normal_tensor(rng, {n, c, h, w});
    nn::BatchNormCache<double> cache;
    nn::batchnorm2d(x, p, true, &cache);
    auto g = nn::BatchNormGrads<double>::zeros(c);
    const Tensor64 dx = nn::batchnorm2d_backward(r, p, cache, g);
    // running statistics stay frozen: batchnorm2d itself never updates them
    double worst = compare([&](const Tensor64& v) { return dot(r, nn::batchnorm2d(v, p, true)); }, x, dx, coords);
    worst = std::max(worst, compare([&](const Tensor64& v) {
        auto q = p;
        q.gamma = v;
        return dot(r, nn::batchnorm2d(x, q, true));
    }, p.gamma, g.gamma, coords));
    worst = std::max(worst, compare([&](const Tensor64& v) {
        auto q = p;
        q.beta = v;
        return dot(r, nn::batchnorm2d(x, q, true));
    }, p.beta, g.beta, coords));
    return worst;
}

inline double check_relu(RngStream& rng, std::size_t& coords)
{
    Tensor64 x = normal_tensor(rng, {small(rng, 1, 2), small(rng, 1, 3), small(rng, 2, 4), small(rng, 2, 4)});
    for (auto& v : x.data())
        while (std::abs(v) < 1e-3)
            v = rng.normal();
    const Tensor64 r = normal_tensor(rng, x.shape());
    const Tensor64 dx = nn::relu_backward(x, r);
    return compare([&](const Tensor64& v) { return dot(r, nn::relu(v)); }, x, dx, coords);
}

inline double check_maxpool(RngStream& rng, std::size_t& coords)
{
    const Shape s{small(rng, 1, 2), small(rng, 1, 3), 2 * small(rng, 1, 3), 2 * small(rng, 1, 3)};
    const Tensor64 x = distinct_tensor(rng, s);
    const auto pooled = nn::maxpool2x2(x);
    const Tensor64 r = normal_tensor(rng, pooled.values.shape());
    const Tensor64 dx = nn::maxpool2x2_backward(r, pooled.indices);
    return compare([&](const Tensor64& v) { return dot(r, nn::maxpool2x2(v).values); }, x, dx, coords);
}

inline double check_unpool(RngStream& rng, std::size_t& coords)
{
    const Shape s{small(rng, 1, 2), small(rng, 1, 3), 2 * small(rng, 1, 3), 2 * small(rng, 1, 3)};
    const auto pooled = nn::maxpool2x2(distinct_tensor(rng, s));
    const Tensor64 y = normal_tensor(rng, pooled.values.shape());
    const Tensor64 r = normal_tensor(rng, s);
    const Tensor64 dy = nn::maxunpool2x2_backward(r, pooled.indices);
    return compare([&](const Tensor64& v) { return dot(r, nn::maxunpool2x2(v, pooled.indices, s)); }, y, dy,
                   coords);
}

inline double check_dropout(RngStream& rng, std::size_t& coords)
{
    const Shape s{small(rng, 1, 2), small(rng, 1, 3), small(rng, 2, 4), small(rng, 2, 4)};
    const Tensor64 x = normal_tensor(rng, s);
    const Tensor64 u = seeded_uniform<double>(rng, s);
    const auto state = nn::ConcreteDropoutState<double>::with_probability(rng.uniform(0.05, 0.6));
    const Tensor64 r = normal_tensor(rng, s);
    Tensor64 z;
    nn::concrete_dropout_with_noise(x, state, u, &z);
    double dlogit = 0;
    const Tensor64 dx = nn::concrete_dropout_backward(x, state, z, r, dlogit);
    double worst =
        compare([&](const Tensor64& v) { return dot(r, nn::concrete_dropout_with_noise(v, state, u)); }, x, dx,
                coords);
    worst = std::max(worst, compare([&](const Tensor64& v) {
        auto q = state;
        q.p_logit = v;
        return dot(r, nn::concrete_dropout_with_noise(x, q, u));
    }, state.p_logit, Tensor64({1}, dlogit), coords));
    return worst;
}

inline double check_regularizer(RngStream& rng, std::size_t& coords)
{
    const std::size_t o = small(rng, 1, 3), c = small(rng, 1, 4), n = small(rng, 1, 10);
    const Tensor64 w = normal_tensor(rng, {o, c, 3, 3});
    const auto state = nn::ConcreteDropoutState<double>::with_probability(rng.uniform(0.05, 0.9));
    // factors large enough that the term is not buried under the unit floor of the error metric
    const nn::RegularizerFactors f{rng.uniform(0.1, 1.0), rng.uniform(0.1, 1.0)};
    const auto term = nn::concrete_dropout_regularizer_grad(state, w, c, n, f);
    double worst = compare([&](const Tensor64& v) { return nn::concrete_dropout_regularizer(state, v, c, n, f); },
                           w, term.grad_weights, coords);
    worst = std::max(worst, compare([&](const Tensor64& v) {
        auto q = state;
        q.p_logit = v;
        return nn::concrete_dropout_regularizer(q, w, c, n, f);
    }, state.p_logit, Tensor64({1}, term.grad_p_logit), coords));
    return worst;
}

inline double check_cross_entropy(RngStream& rng, std::size_t& coords)
{
    const std::size_t n = small(rng, 1, 2), h = small(rng, 1, 3), w = small(rng, 2, 3), k = 12;
    const Tensor64 logits = normal_tensor(rng, {n, k, h, w}, 3.0);
    Mask target({n, h, w});
    for (auto& t : target.data())
        t = static_cast<std::uint8_t>(rng.below(k));
    target[rng.below(target.size())] = kVoidLabel;
    Tensor64 grad;
    nn::softmax_cross_entropy(logits, target, &grad);
    return compare([&](const Tensor64& v) { return nn::softmax_cross_entropy(v, target); }, logits, grad, coords);
}

using CheckFn = double (*)(RngStream&, std::size_t&);

struct OpEntry {
    const char* name;
    CheckFn fn;
};

inline constexpr OpEntry kOps[] = {
    {"conv2d", check_conv},
    {"batchnorm2d", check_batchnorm},
    {"relu", check_relu},
    {"maxpool2x2", check_maxpool},
    {"maxunpool2x2", check_unpool},
    {"concrete_dropout", check_dropout},
    {"dropout_regularizer", check_regularizer},
    {"softmax_cross_entropy", check_cross_entropy},
};

} // namespace detail

/// Randomized per-op checks; op k with seed s uses RngStream(seed).derive(k).derive(s).
inline std::vector<OpCheck> check_ops(std::uint64_t seed, std::size_t seeds_per_op = kDefaultSeedsPerOp)
{
    std::vector<OpCheck> out;
    const RngStream root(seed);
    for (std::size_t k = 0; k < std::size(detail::kOps); ++k) {
        OpCheck check{detail::kOps[k].name};
        for (std::size_t s = 0; s < seeds_per_op; ++s) {
            RngStream rng = root.derive(k).derive(s);
            check.worst_error = std::max(check.worst_error, detail::kOps[k].fn(rng, check.coordinates));
            ++check.seeds;
        }
        out.push_back(std::move(check));
    }
    return out;
}

/**
 * End-to-end check of the full network on one 1x3x32x32 input against the
 * regularized training loss, with fixed dropout noise and no running-stat
 * updates. Compares the input gradient at `input_coords` random positions
 * and a sample of parameter gradients: first and last convolution, one
 * batch-norm affine pair, both dropout logits and both regularized
 * consumer convolutions.
 *
 * With Mode::mc normalization uses the (frozen) running statistics; with
 * Mode::train it uses batch statistics, whose tiny 2x2 bottleneck batches
 * make the loss strongly curved, so that variant wants a smaller step.
 */
inline OpCheck check_model(std::uint64_t seed, model::Mode mode = model::Mode::mc,
                           double step = kDefaultFiniteDiffStep, std::size_t input_coords = 48)
{
    const RngStream root = RngStream(seed).derive(0x6d6f64656c);
    auto net = model::SegNet<double>::build(root.derive(0).seed());
    RngStream data_rng = root.derive(1);
    train::Batch<double> batch{detail::normal_tensor(data_rng, {1, 3, 32, 32}), Mask({1, 32, 32})};
    for (auto& t : batch.targets.data())
        t = static_cast<std::uint8_t>(data_rng.below(model::kClassCount));
    const RngStream noise = root.derive(2);
    const std::size_t dataset_size = 4;
    const nn::RegularizerFactors factors{};

    auto grads = net.zero_grads();
    model::ForwardTape<double> tape;
    train::total_loss(net, batch, noise, dataset_size, factors, &grads, &tape, mode);
    // the regularizers do not depend on the input, so dL/dx comes from the data term alone
    Tensor<double> dlogits;
    nn::softmax_cross_entropy(net.forward(batch.images, mode, noise), batch.targets, &dlogits);
    auto scratch = net.zero_grads();
    const Tensor<double> dx = net.backward(tape, dlogits, scratch, true);

    OpCheck check{mode == model::Mode::train ? "segnet_end_to_end_batch_stats" : "segnet_end_to_end"};
    check.seeds = 1;
    check.step = step;
    auto loss_at = [&](const Tensor<double>& images) {
        return train::total_loss<double>(net, train::Batch<double>{images, batch.targets}, noise, dataset_size, factors,
                                 nullptr, nullptr, mode)
            .total;
    };

    std::vector<std::size_t> coords(input_coords);
    for (auto& c : coords)
        c = data_rng.below(batch.images.size());
    const auto numeric_x = finite_diff_gradient_at(loss_at, batch.images, std::span<const std::size_t>(coords), step);
    for (std::size_t i = 0; i < coords.size(); ++i)
        check.worst_error = std::max(check.worst_error, relative_error(dx[coords[i]], numeric_x[i]));
    check.coordinates += coords.size();

    auto probe = [&](Tensor<double>& param, const Tensor<double>& analytic, std::size_t count) {
        std::vector<std::size_t> where(std::min(count, param.size()));
        for (auto& c : where)
            c = data_rng.below(param.size());
        const Tensor<double> base = param;
        const auto numeric = finite_diff_gradient_at(
            [&](const Tensor<double>& v) {
                param = v;
                const double l = loss_at(batch.images);
                param = base;
                return l;
            },
            base, std::span<const std::size_t>(where), step);
        for (std::size_t i = 0; i < where.size(); ++i)
            check.worst_error = std::max(check.worst_error, relative_error(analytic[where[i]], numeric[i]));
        check.coordinates += where.size();
    };
    auto& blocks = net.blocks();
    const std::size_t last = blocks.size() - 1;
    probe(blocks[0].conv.weight, grads[0].conv.weight, 8);
    probe(blocks[last].conv.weight, grads[last].conv.weight, 8);
    probe(blocks[last].conv.bias, grads[last].conv.bias, 4);
    probe(blocks[5].norm->gamma, grads[5].norm->gamma, 4);
    probe(blocks[5].norm->beta, grads[5].norm->beta, 4);
    for (std::size_t site : net.dropout_sites()) {
        probe(blocks[site].dropout->p_logit, grads[site].p_logit, 1);
        const std::size_t consumer = net.regularized_block(site);
        probe(blocks[consumer].conv.weight, grads[consumer].conv.weight, 4);
    }
    return check;
}

inline constexpr double kBatchStatsStep = 1e-7;

/// Every op check followed by both end-to-end model checks.
inline std::vector<OpCheck> run_gradient_suite(std::uint64_t seed, std::size_t seeds_per_op = kDefaultSeedsPerOp,
                                               bool include_model = true)
{
    auto out = check_ops(seed, seeds_per_op);
    if (include_model) {
        out.push_back(check_model(seed, model::Mode::mc));
        out.push_back(check_model(seed, model::Mode::train, kBatchStatsStep));
    }
    return out;
}

} // namespace bseg::diag

#endif

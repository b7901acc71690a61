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
#ifndef BSEG_MODEL_INFERENCE_HPP
#define BSEG_MODEL_INFERENCE_HPP

#include <algorithm>
#include <span>
#include <thread>
#include <vector>

#include "bseg/model/segnet.hpp"
#include "bseg/nn/loss.hpp"

namespace bseg::model {

template <typename T>
struct McPrediction {
    Tensor<T> mean_prob; ///< [classes, H, W]
    Tensor<T> variance;  ///< [classes, H, W], population variance over passes
};

struct McOptions {
    bool dropout = true;      ///< false runs every pass deterministically
    std::size_t threads = 1;
};

/// Run `fn(i)` for i in [0, n) on up to `threads` workers.
template <typename F>
void parallel_for(std::size_t n, std::size_t threads, F&& fn)
{
    threads = std::max<std::size_t>(1, std::min(threads, n));
    if (threads == 1) {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t)
        pool.emplace_back([&, t] {
            for (std::size_t i = t; i < n; i += threads)
                fn(i);
        });
    for (auto& th : pool)
        th.join();
}

/// Class probabilities [classes, H, W] of one deterministic (eval) pass.
template <typename T>
Tensor<T> predict_probabilities(const SegNet<T>& net, const Tensor<T>& image)
{
    const Tensor<T> prob = nn::softmax_channels(net.forward(image, Mode::eval, RngStream(0)));
    return prob.reshaped({prob.dim(1), prob.dim(2), prob.dim(3)});
}

/**
 * One stochastic pass per seed, averaged in the order given. Each pass uses
 * running batch-norm statistics. Variance is accumulated with Welford's
 * update so it is never negative.
 */
template <typename T>
McPrediction<T> mc_predict_with_seeds(const SegNet<T>& net, const Tensor<T>& image,
                                      std::span<const std::uint64_t> seeds, McOptions opts = {})
{
    if (seeds.empty())
        throw Error("mc_predict needs at least one sample");
    if (image.rank() != 4 || image.dim(0) != 1)
        throw Error("mc_predict expects a single [1,3,H,W] image");
    const Mode mode = opts.dropout ? Mode::mc : Mode::eval;
    std::vector<Tensor<T>> passes(seeds.size());
    parallel_for(seeds.size(), opts.threads, [&](std::size_t i) {
        passes[i] = nn::softmax_channels(net.forward(image, mode, RngStream(seeds[i])));
    });

    const Shape out_shape{passes[0].dim(1), passes[0].dim(2), passes[0].dim(3)};
    McPrediction<T> out{Tensor<T>(out_shape, T{0}), Tensor<T>(out_shape, T{0})};
    for (std::size_t k = 0; k < passes.size(); ++k) {
        const T count = static_cast<T>(k + 1);
        for (std::size_t i = 0; i < out.mean_prob.size(); ++i) {
            const T v = passes[k][i];
            const T delta = v - out.mean_prob[i];
            out.mean_prob[i] += delta / count;
            out.variance[i] += delta * (v - out.mean_prob[i]);
        }
    }
    const T n = static_cast<T>(passes.size());
    for (auto& v : out.variance.data())
        v /= n;
    return out;
}

/// T stochastic passes; pass i draws its dropout noise from rng.derive(i).
template <typename T>
McPrediction<T> mc_predict(const SegNet<T>& net, const Tensor<T>& image, std::size_t samples,
                           const RngStream& rng, McOptions opts = {})
{
    if (samples < 1)
        throw Error("mc_predict needs at least one sample");
    std::vector<std::uint64_t> seeds(samples);
    for (std::size_t i = 0; i < samples; ++i)
        seeds[i] = rng.derive(i).seed();
    return mc_predict_with_seeds(net, image, std::span<const std::uint64_t>(seeds), opts);
}

/// Per-pixel argmax over classes of a [classes, H, W] tensor; ties go to the lower class.
template <typename T>
Mask argmax_classes(const Tensor<T>& prob)
{
    if (prob.rank() != 3)
        throw Error("argmax_classes expects [classes, H, W]");
    const std::size_t k = prob.dim(0), plane = prob.dim(1) * prob.dim(2);
    Mask out({prob.dim(1), prob.dim(2)});
    for (std::size_t i = 0; i < plane; ++i) {
        std::size_t best = 0;
        for (std::size_t c = 1; c < k; ++c)
            if (prob[c * plane + i] > prob[best * plane + i])
                best = c;
        out[i] = static_cast<std::uint8_t>(best);
    }
    return out;
}

} // namespace bseg::model

#endif

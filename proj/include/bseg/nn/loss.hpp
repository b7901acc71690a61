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
#ifndef BSEG_NN_LOSS_HPP
#define BSEG_NN_LOSS_HPP

#include <algorithm>
#include <cmath>
#include <vector>

#include "bseg/nn/conv.hpp"
#include "bseg/tensor.hpp"

namespace bseg::nn {

/// Softmax over the channel axis of [N,K,H,W] logits.
template <typename T>
Tensor<T> softmax_channels(const Tensor<T>& logits)
{
    detail::check_nchw(logits.shape(), "softmax_channels");
    const std::size_t n = logits.dim(0), k = logits.dim(1);
    const std::size_t plane = logits.dim(2) * logits.dim(3);
    Tensor<T> prob(logits.shape());
    for (std::size_t s = 0; s < n; ++s) {
        const T* in = logits.raw() + s * k * plane;
        T* out = prob.raw() + s * k * plane;
        for (std::size_t i = 0; i < plane; ++i) {
            T m = in[i];
            for (std::size_t c = 1; c < k; ++c)
                m = std::max(m, in[c * plane + i]);
            T sum = 0;
            for (std::size_t c = 0; c < k; ++c) {
                const T e = std::exp(in[c * plane + i] - m);
                out[c * plane + i] = e;
                sum += e;
            }
            for (std::size_t c = 0; c < k; ++c)
                out[c * plane + i] /= sum;
        }
    }
    return prob;
}

/**
 * Mean over non-void pixels of -log softmax(logits)[target]. Void pixels
 * (label 255) are skipped and get zero gradient. When `grad` is non-null it
 * receives dL/dlogits.
 */
template <typename T>
T softmax_cross_entropy(const Tensor<T>& logits, const Mask& target, Tensor<T>* grad = nullptr,
                        std::uint8_t void_label = kVoidLabel)
{
    detail::check_nchw(logits.shape(), "softmax_cross_entropy");
    const std::size_t n = logits.dim(0), k = logits.dim(1);
    const std::size_t h = logits.dim(2), w = logits.dim(3), plane = h * w;
    if (target.shape() != Shape{n, h, w})
        throw Error("target shape " + shape_string(target.shape()) + " does not match logits " +
                    shape_string(logits.shape()));
    std::size_t supervised = 0;
    for (std::uint8_t t : target.data()) {
        if (t == void_label)
            continue;
        if (t >= k)
            throw Error("target label " + std::to_string(t) + " outside 0.." + std::to_string(k - 1));
        ++supervised;
    }
    if (supervised == 0)
        throw Error("no supervised pixels");

    if (grad)
        *grad = Tensor<T>(logits.shape(), T{0});
    const T inv = T{1} / static_cast<T>(supervised);
    T total = 0;
    std::vector<T> e(k);
    for (std::size_t s = 0; s < n; ++s) {
        const T* in = logits.raw() + s * k * plane;
        for (std::size_t i = 0; i < plane; ++i) {
            const std::uint8_t t = target[s * plane + i];
            if (t == void_label)
                continue;
            T m = in[i];
            for (std::size_t c = 1; c < k; ++c)
                m = std::max(m, in[c * plane + i]);
            T sum = 0;
            for (std::size_t c = 0; c < k; ++c) {
                e[c] = std::exp(in[c * plane + i] - m);
                sum += e[c];
            }
            total += std::log(sum) - (in[t * plane + i] - m);
            if (grad) {
                T* g = grad->raw() + s * k * plane;
                for (std::size_t c = 0; c < k; ++c)
                    g[c * plane + i] = (e[c] / sum - (c == t ? T{1} : T{0})) * inv;
            }
        }
    }
    return total * inv;
}

} // namespace bseg::nn

#endif

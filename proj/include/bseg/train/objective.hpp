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
#ifndef BSEG_TRAIN_OBJECTIVE_HPP
#define BSEG_TRAIN_OBJECTIVE_HPP

#include <span>
#include <vector>

#include "bseg/data/sample.hpp"
#include "bseg/model/segnet.hpp"
#include "bseg/nn/loss.hpp"

namespace bseg::train {

template <typename T>
struct Batch {
    Tensor<T> images; ///< [N,3,H,W]
    Mask targets;     ///< [N,H,W]
};

template <typename T>
Batch<T> make_batch(std::span<const data::SampleRecord<T>> records)
{
    if (records.empty())
        throw Error("empty batch");
    const std::size_t n = records.size(), h = records[0].height(), w = records[0].width();
    Batch<T> batch{Tensor<T>({n, 3, h, w}), Mask({n, h, w})};
    for (std::size_t i = 0; i < n; ++i) {
        const auto& r = records[i];
        if (r.height() != h || r.width() != w)
            throw Error("batch records must share spatial dims");
        std::copy(r.image.data().begin(), r.image.data().end(), batch.images.raw() + i * 3 * h * w);
        std::copy(r.mask.data().begin(), r.mask.data().end(), batch.targets.raw() + i * h * w);
    }
    return batch;
}

template <typename T>
struct LossBreakdown {
    T data = 0;                   ///< softmax cross-entropy
    std::vector<T> regularizers;  ///< one per dropout site, network order
    T total = 0;
};

/**
 * Cross-entropy of a forward pass plus the concrete-dropout regularizer of
 * every dropout site. When `grads` is given the full gradient is
 * accumulated into it; when `tape_out` is given the pass is recorded there.
 * Training uses Mode::train; Mode::mc keeps dropout stochastic but
 * normalizes with the running statistics.
 */
template <typename T>
LossBreakdown<T> total_loss(const model::SegNet<T>& net, const Batch<T>& batch, const RngStream& rng,
                            std::size_t dataset_size, nn::RegularizerFactors factors = {},
                            model::ModelGrads<T>* grads = nullptr, model::ForwardTape<T>* tape_out = nullptr,
                            model::Mode mode = model::Mode::train)
{
    model::ForwardTape<T> local;
    model::ForwardTape<T>* tape = (grads || tape_out) ? (tape_out ? tape_out : &local) : nullptr;
    const Tensor<T> logits = net.forward(batch.images, mode, rng, tape);
    Tensor<T> dlogits;
    LossBreakdown<T> out;
    out.data = nn::softmax_cross_entropy(logits, batch.targets, grads ? &dlogits : nullptr);
    out.total = out.data;
    for (std::size_t site : net.dropout_sites()) {
        const auto& state = *net.blocks()[site].dropout;
        const std::size_t consumer = net.regularized_block(site);
        const auto& weights = net.blocks()[consumer].conv.weight;
        const auto term = nn::concrete_dropout_regularizer_grad(state, weights, weights.dim(1), dataset_size, factors);
        out.regularizers.push_back(term.value);
        out.total += term.value;
        if (grads) {
            auto& gw = (*grads)[consumer].conv.weight;
            for (std::size_t i = 0; i < gw.size(); ++i)
                gw[i] += term.grad_weights[i];
            (*grads)[site].p_logit[0] += term.grad_p_logit;
        }
    }
    if (grads)
        net.backward(*tape, dlogits, *grads);
    return out;
}

} // namespace bseg::train

#endif

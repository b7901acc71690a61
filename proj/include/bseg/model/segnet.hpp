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
#ifndef BSEG_MODEL_SEGNET_HPP
#define BSEG_MODEL_SEGNET_HPP

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bseg/nn/activation.hpp"
#include "bseg/nn/batchnorm.hpp"
#include "bseg/nn/concrete_dropout.hpp"
#include "bseg/nn/conv.hpp"
#include "bseg/nn/pooling.hpp"
#include "bseg/rng.hpp"

namespace bseg::model {

using nn::Mode;

/// 11 body parts plus background.
inline constexpr std::size_t kClassCount = 12;
inline constexpr std::size_t kInputChannels = 3;
inline constexpr std::size_t kDownsampling = 32;

enum class LayerKind { conv, pool, unpool };

struct LayerRow {
    LayerKind kind;
    std::string_view name;
    std::size_t features = 0;
    bool batch_norm = false;
    bool relu = false;
    bool dropout = false;
};

namespace detail {
constexpr LayerRow conv(std::string_view name, std::size_t features, bool dropout = false)
{
    return {LayerKind::conv, name, features, true, true, dropout};
}
constexpr LayerRow pool(std::string_view name) { return {LayerKind::pool, name}; }
constexpr LayerRow unpool(std::string_view name) { return {LayerKind::unpool, name}; }
} // namespace detail

/**
 * The encoder/decoder layer sequence. Every convolution is 3x3 with ReLU and
 * batch normalization except the last, which is linear and emits one channel
 * per class. Concrete dropout follows conv13 (network center) and conv25.
 *
 * `features` is the output width. In the decoder the published feature
 * column equals each convolution's input width; the last convolution of
 * every decoder stage narrows to the width of the encoder stage whose pool
 * indices the next unpool reuses.
 */
inline constexpr std::array<LayerRow, 36> kLayerTable = {
    detail::conv("conv1", 64),   detail::conv("conv2", 64),   detail::pool("pool1"),
    detail::conv("conv3", 128),  detail::conv("conv4", 128),  detail::pool("pool2"),
    detail::conv("conv5", 256),  detail::conv("conv6", 256),  detail::conv("conv7", 256),
    detail::pool("pool3"),
    detail::conv("conv8", 512),  detail::conv("conv9", 512),  detail::conv("conv10", 512),
    detail::pool("pool4"),
    detail::conv("conv11", 512), detail::conv("conv12", 512), detail::conv("conv13", 512, true),
    detail::pool("pool5"),
    detail::unpool("unpool1"),
    detail::conv("conv14", 512), detail::conv("conv15", 512), detail::conv("conv16", 512),
    detail::unpool("unpool2"),
    detail::conv("conv17", 512), detail::conv("conv18", 512), detail::conv("conv19", 256),
    detail::unpool("unpool3"),
    detail::conv("conv20", 256), detail::conv("conv21", 256), detail::conv("conv22", 128),
    detail::unpool("unpool4"),
    detail::conv("conv23", 128), detail::conv("conv24", 64),
    detail::unpool("unpool5"),
    detail::conv("conv25", 64, true),
    LayerRow{LayerKind::conv, "conv26", kClassCount, false, false, false},
};

template <typename T>
struct ConvBlock {
    std::string name;
    nn::ConvParams<T> conv;
    std::optional<nn::BatchNormParams<T>> norm;
    bool relu = true;
    std::optional<nn::ConcreteDropoutState<T>> dropout;
};

template <typename T>
struct BlockGrads {
    nn::ConvGrads<T> conv;
    std::optional<nn::BatchNormGrads<T>> norm;
    Tensor<T> p_logit{Shape{1}, T{0}};
};

template <typename T>
using ModelGrads = std::vector<BlockGrads<T>>;

/// Intermediate values of one forward pass, consumed by SegNet::backward.
template <typename T>
struct ForwardTape {
    struct Block {
        Tensor<T> input;
        nn::BatchNormCache<T> norm;
        nn::BatchMoments<T> moments;
        Tensor<T> activated;   ///< after ReLU, before dropout
        Tensor<T> drop_weight; ///< soft drop mask, when dropout was sampled
        bool dropout_sampled = false;
    };
    std::vector<Block> blocks;
    std::vector<nn::PoolIndices> pools;
    Mode mode = Mode::eval;
};

template <typename T>
class SegNet {
public:
    /// Zero weights with identity normalization; the target of checkpoint loading.
    static SegNet skeleton()
    {
        SegNet net;
        std::size_t in = kInputChannels;
        for (const auto& row : kLayerTable) {
            if (row.kind != LayerKind::conv)
                continue;
            ConvBlock<T> block;
            block.name = std::string(row.name);
            block.conv = nn::ConvParams<T>::zeros(row.features, in);
            if (row.batch_norm)
                block.norm = nn::BatchNormParams<T>::identity(row.features);
            block.relu = row.relu;
            if (row.dropout)
                block.dropout = nn::ConcreteDropoutState<T>{};
            net.blocks_.push_back(std::move(block));
            in = row.features;
        }
        return net;
    }

    /// He-normal weights drawn from `seed`, zero biases, p = 0.1 at both dropout sites.
    static SegNet build(std::uint64_t seed)
    {
        SegNet net = skeleton();
        RngStream root(seed);
        for (std::size_t b = 0; b < net.blocks_.size(); ++b) {
            RngStream rng = root.derive(b);
            auto& w = net.blocks_[b].conv.weight;
            const double std_dev = std::sqrt(2.0 / static_cast<double>(w.dim(1) * nn::kTaps));
            for (auto& v : w.data())
                v = static_cast<T>(std_dev * rng.normal());
        }
        return net;
    }

    std::size_t class_count() const { return blocks_.back().conv.out_channels(); }
    std::vector<ConvBlock<T>>& blocks() { return blocks_; }
    const std::vector<ConvBlock<T>>& blocks() const { return blocks_; }

    /// Block indices carrying concrete dropout, in network order.
    std::vector<std::size_t> dropout_sites() const
    {
        std::vector<std::size_t> sites;
        for (std::size_t b = 0; b < blocks_.size(); ++b)
            if (blocks_[b].dropout)
                sites.push_back(b);
        return sites;
    }

    /// The convolution that consumes the features dropped at `site`.
    std::size_t regularized_block(std::size_t site) const { return site + 1; }

    ModelGrads<T> zero_grads() const
    {
        ModelGrads<T> grads;
        for (const auto& block : blocks_) {
            BlockGrads<T> g;
            g.conv = nn::ConvParams<T>::zeros(block.conv.out_channels(), block.conv.in_channels());
            if (block.norm)
                g.norm = nn::BatchNormGrads<T>::zeros(block.norm->channels());
            grads.push_back(std::move(g));
        }
        return grads;
    }

    /**
     * Logits [N, classes, H, W] for input [N, 3, H, W]. Pure: train mode uses
     * batch statistics but does not fold them into the running statistics
     * (see commit_running_stats). Dropout noise for block b comes from
     * rng.derive(b), so equal streams give equal passes.
     */
    Tensor<T> forward(const Tensor<T>& x, Mode mode, const RngStream& rng,
                      ForwardTape<T>* tape = nullptr) const
    {
        if (x.rank() != 4 || x.dim(1) != kInputChannels)
            throw Error("input must be [N,3,H,W], got " + shape_string(x.shape()));
        if (x.dim(2) % kDownsampling != 0 || x.dim(3) % kDownsampling != 0)
            throw Error("input must be divisible by 32");
        if (tape) {
            tape->blocks.assign(blocks_.size(), {});
            tape->pools.clear();
            tape->mode = mode;
        }
        std::vector<nn::PoolIndices> local_pools;
        auto& pools = tape ? tape->pools : local_pools;
        std::vector<std::size_t> unpool_stack;

        Tensor<T> h = x;
        std::size_t b = 0;
        for (const auto& row : kLayerTable) {
            switch (row.kind) {
            case LayerKind::conv:
                h = run_block(b, std::move(h), mode, rng, tape ? &tape->blocks[b] : nullptr);
                ++b;
                break;
            case LayerKind::pool: {
                auto pooled = nn::maxpool2x2(h);
                h = std::move(pooled.values);
                unpool_stack.push_back(pools.size());
                pools.push_back(std::move(pooled.indices));
                break;
            }
            case LayerKind::unpool: {
                // deepest pool pairs with the first unpool
                const auto& idx = pools[unpool_stack.back()];
                unpool_stack.pop_back();
                h = nn::maxunpool2x2(h, idx, idx.input_shape);
                break;
            }
            }
        }
        return h;
    }

    /// Fold the batch moments of a train-mode pass into the running statistics.
    void commit_running_stats(const ForwardTape<T>& tape)
    {
        if (tape.mode != Mode::train)
            return;
        for (std::size_t b = 0; b < blocks_.size(); ++b)
            if (blocks_[b].norm)
                nn::update_running_stats(*blocks_[b].norm, tape.blocks[b].moments);
    }

    /**
     * Backpropagate dL/dlogits through the pass recorded in `tape`, adding
     * parameter gradients to `grads`. Returns dL/dinput when requested.
     */
    Tensor<T> backward(const ForwardTape<T>& tape, const Tensor<T>& grad_logits, ModelGrads<T>& grads,
                       bool need_input_grad = false) const
    {
        if (tape.blocks.size() != blocks_.size())
            throw Error("backward called without a recorded forward pass");
        Tensor<T> g = grad_logits;
        std::size_t b = blocks_.size();
        std::vector<std::size_t> pool_of_unpool;
        {
            // replay the pairing used in forward
            std::vector<std::size_t> stack;
            std::size_t next_pool = 0;
            for (const auto& row : kLayerTable) {
                if (row.kind == LayerKind::pool) {
                    stack.push_back(next_pool++);
                } else if (row.kind == LayerKind::unpool) {
                    pool_of_unpool.push_back(stack.back());
                    stack.pop_back();
                }
            }
        }
        std::size_t pool = tape.pools.size();
        std::size_t unpool = pool_of_unpool.size();
        for (auto it = kLayerTable.rbegin(); it != kLayerTable.rend(); ++it) {
            switch (it->kind) {
            case LayerKind::conv:
                --b;
                g = backprop_block(b, tape.blocks[b], std::move(g), grads[b], b > 0 || need_input_grad);
                break;
            case LayerKind::pool:
                --pool;
                g = nn::maxpool2x2_backward(g, tape.pools[pool]);
                break;
            case LayerKind::unpool:
                --unpool;
                g = nn::maxunpool2x2_backward(g, tape.pools[pool_of_unpool[unpool]]);
                break;
            }
        }
        return g;
    }

    /// Trainable tensors in checkpoint order: f(name, tensor).
    template <typename F>
    void visit_parameters(F&& f)
    {
        for (auto& block : blocks_) {
            f(block.name + ".weight", block.conv.weight);
            f(block.name + ".bias", block.conv.bias);
            if (block.norm) {
                f(block.name + ".bn.gamma", block.norm->gamma);
                f(block.name + ".bn.beta", block.norm->beta);
            }
            if (block.dropout)
                f(block.name + ".dropout.p_logit", block.dropout->p_logit);
        }
    }

    /// Parameters paired with their gradients: f(name, param, grad).
    template <typename F>
    void visit_parameters(ModelGrads<T>& grads, F&& f)
    {
        for (std::size_t b = 0; b < blocks_.size(); ++b) {
            auto& block = blocks_[b];
            auto& g = grads.at(b);
            f(block.name + ".weight", block.conv.weight, g.conv.weight);
            f(block.name + ".bias", block.conv.bias, g.conv.bias);
            if (block.norm) {
                f(block.name + ".bn.gamma", block.norm->gamma, g.norm->gamma);
                f(block.name + ".bn.beta", block.norm->beta, g.norm->beta);
            }
            if (block.dropout)
                f(block.name + ".dropout.p_logit", block.dropout->p_logit, g.p_logit);
        }
    }

    /// Everything a checkpoint stores: parameters plus running statistics.
    template <typename F>
    void visit_state(F&& f)
    {
        for (auto& block : blocks_) {
            f(block.name + ".weight", block.conv.weight);
            f(block.name + ".bias", block.conv.bias);
            if (block.norm) {
                f(block.name + ".bn.gamma", block.norm->gamma);
                f(block.name + ".bn.beta", block.norm->beta);
                f(block.name + ".bn.running_mean", block.norm->running_mean);
                f(block.name + ".bn.running_var", block.norm->running_var);
            }
            if (block.dropout)
                f(block.name + ".dropout.p_logit", block.dropout->p_logit);
        }
    }

    template <typename F>
    void visit_state(F&& f) const
    {
        const_cast<SegNet*>(this)->visit_state(
            [&](const std::string& name, Tensor<T>& t) { f(name, static_cast<const Tensor<T>&>(t)); });
    }

    std::size_t parameter_count() const
    {
        std::size_t n = 0;
        const_cast<SegNet*>(this)->visit_parameters(
            [&](const std::string&, Tensor<T>& t) { n += t.size(); });
        return n;
    }

    template <typename U>
    SegNet<U> cast() const
    {
        SegNet<U> out = SegNet<U>::skeleton();
        std::vector<const Tensor<T>*> src;
        visit_state([&](const std::string&, const Tensor<T>& t) { src.push_back(&t); });
        std::size_t i = 0;
        out.visit_state([&](const std::string&, Tensor<U>& t) { t = src[i++]->template cast<U>(); });
        for (std::size_t b = 0; b < blocks_.size(); ++b)
            if (blocks_[b].dropout)
                out.blocks()[b].dropout->temperature = static_cast<U>(blocks_[b].dropout->temperature);
        return out;
    }

private:
    Tensor<T> run_block(std::size_t b, Tensor<T> x, Mode mode, const RngStream& rng,
                        typename ForwardTape<T>::Block* rec) const
    {
        const auto& block = blocks_[b];
        Tensor<T> h = nn::conv2d(x, block.conv);
        if (rec)
            rec->input = std::move(x);
        if (block.norm) {
            const bool train = mode == Mode::train;
            h = nn::batchnorm2d(h, *block.norm, train, rec ? &rec->norm : nullptr,
                                rec ? &rec->moments : nullptr);
        }
        if (block.relu)
            h = nn::relu(h);
        if (block.dropout && mode != Mode::eval) {
            RngStream site = rng.derive(b);
            Tensor<T> out = nn::concrete_dropout(h, *block.dropout, site, mode,
                                                 rec ? &rec->drop_weight : nullptr);
            if (rec) {
                rec->dropout_sampled = true;
                rec->activated = std::move(h);
            }
            return out;
        }
        if (rec)
            rec->activated = h;
        return h;
    }

    Tensor<T> backprop_block(std::size_t b, const typename ForwardTape<T>::Block& rec, Tensor<T> g,
                             BlockGrads<T>& grads, bool need_input_grad) const
    {
        const auto& block = blocks_[b];
        if (rec.dropout_sampled)
            g = nn::concrete_dropout_backward(rec.activated, *block.dropout, rec.drop_weight, g,
                                              grads.p_logit[0]);
        if (block.relu)
            g = nn::relu_backward(rec.activated, g);
        if (block.norm)
            g = nn::batchnorm2d_backward(g, *block.norm, rec.norm, *grads.norm);
        return nn::conv2d_backward(rec.input, block.conv, g, grads.conv, need_input_grad);
    }

    std::vector<ConvBlock<T>> blocks_;
};

} // namespace bseg::model

#endif

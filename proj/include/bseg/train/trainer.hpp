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
#ifndef BSEG_TRAIN_TRAINER_HPP
#define BSEG_TRAIN_TRAINER_HPP

#include <cmath>
#include <functional>
#include <numeric>
#include <optional>
#include <vector>

#include "bseg/data/augment.hpp"
#include "bseg/data/resize.hpp"
#include "bseg/model/segnet.hpp"
#include "bseg/train/objective.hpp"
#include "bseg/train/report.hpp"
#include "bseg/train/sgd.hpp"

namespace bseg::train {

struct TrainConfig {
    double lr = 0.05;
    double momentum = 0.9;
    std::size_t batch_size = 1;
    std::size_t steps = 1000;
    std::uint64_t seed = 1;
    data::Size2 input_size{64, 64};
    nn::RegularizerFactors factors{};
    std::size_t checkpoint_every = 0; ///< 0 disables periodic checkpoints
    std::optional<data::AugmentConfig> augment;

    void validate() const
    {
        if (!(lr > 0))
            throw Error("lr must be positive");
        if (!(momentum >= 0 && momentum < 1))
            throw Error("momentum must be in [0,1)");
        if (batch_size < 1)
            throw Error("batch_size must be at least 1");
        data::require_network_size(input_size);
        if (augment)
            augment->validate();
    }
};

// Stream labels under the training seed.
inline constexpr std::uint64_t kShuffleStream = 0x5348;
inline constexpr std::uint64_t kDropoutStream = 0x4450;
inline constexpr std::uint64_t kAugmentStream = 0x4147;

template <typename T>
struct TrainResult {
    model::SegNet<T> model;
    std::vector<LossRecord> curve;
};

template <typename T>
struct TrainHooks {
    std::function<void(std::size_t step, const model::SegNet<T>&)> on_checkpoint;
    std::function<void(const LossRecord&)> on_step;
};

/**
 * Minibatch SGD with momentum on the regularized objective. Every epoch
 * visits the dataset in a fresh seeded permutation; all randomness derives
 * from cfg.seed, so equal configs give equal curves and weights.
 */
template <typename T>
TrainResult<T> train(const TrainConfig& cfg, const std::vector<data::SampleRecord<T>>& dataset,
                     const TrainHooks<T>& hooks = {})
{
    cfg.validate();
    if (dataset.empty())
        throw Error("training dataset is empty");

    std::vector<data::SampleRecord<T>> records;
    records.reserve(dataset.size());
    for (const auto& r : dataset) {
        data::validate_record(r);
        records.push_back(data::resize_pair(r, cfg.input_size));
    }

    TrainResult<T> result{model::SegNet<T>::build(cfg.seed), {}};
    auto& net = result.model;
    const RngStream root(cfg.seed);
    RngStream order_rng = root.derive(kShuffleStream);
    const RngStream dropout_root = root.derive(kDropoutStream);
    const RngStream augment_root = root.derive(kAugmentStream);

    auto grads = net.zero_grads();
    auto velocity = net.zero_grads();
    const T lr = static_cast<T>(cfg.lr), momentum = static_cast<T>(cfg.momentum);

    std::vector<std::size_t> order(records.size());
    std::size_t cursor = order.size();
    std::vector<data::SampleRecord<T>> batch_records;
    const auto sites = net.dropout_sites();

    for (std::size_t step = 1; step <= cfg.steps; ++step) {
        batch_records.clear();
        for (std::size_t k = 0; k < cfg.batch_size; ++k) {
            if (cursor == order.size()) {
                std::iota(order.begin(), order.end(), std::size_t{0});
                order_rng.shuffle(std::span<std::size_t>(order));
                cursor = 0;
            }
            const auto& rec = records[order[cursor++]];
            if (cfg.augment) {
                RngStream arng = augment_root.derive(step).derive(k);
                batch_records.push_back(data::augment(rec, *cfg.augment, arng));
            } else {
                batch_records.push_back(rec);
            }
        }
        const Batch<T> batch = make_batch<T>(batch_records);

        for (auto& g : grads) {
            g.conv.weight.fill(T{0});
            g.conv.bias.fill(T{0});
            if (g.norm) {
                g.norm->gamma.fill(T{0});
                g.norm->beta.fill(T{0});
            }
            g.p_logit.fill(T{0});
        }
        model::ForwardTape<T> tape;
        const auto loss = total_loss(net, batch, dropout_root.derive(step), records.size(), cfg.factors, &grads, &tape);
        if (!std::isfinite(static_cast<double>(loss.total)))
            throw DivergenceError("loss became non-finite at step " + std::to_string(step));
        net.commit_running_stats(tape);

        for (std::size_t blk = 0; blk < grads.size(); ++blk) {
            auto& block = net.blocks()[blk];
            sgd_momentum_step(block.conv.weight, grads[blk].conv.weight, velocity[blk].conv.weight, lr, momentum);
            sgd_momentum_step(block.conv.bias, grads[blk].conv.bias, velocity[blk].conv.bias, lr, momentum);
            if (block.norm) {
                sgd_momentum_step(block.norm->gamma, grads[blk].norm->gamma, velocity[blk].norm->gamma, lr, momentum);
                sgd_momentum_step(block.norm->beta, grads[blk].norm->beta, velocity[blk].norm->beta, lr, momentum);
            }
            if (block.dropout)
                sgd_momentum_step(block.dropout->p_logit, grads[blk].p_logit, velocity[blk].p_logit, lr, momentum);
        }

        LossRecord rec{step, static_cast<double>(loss.total), static_cast<double>(net.blocks()[sites[0]].dropout->p()),
                       static_cast<double>(net.blocks()[sites[1]].dropout->p())};
        result.curve.push_back(rec);
        if (hooks.on_step)
            hooks.on_step(rec);
        if (hooks.on_checkpoint && cfg.checkpoint_every > 0 && step % cfg.checkpoint_every == 0)
            hooks.on_checkpoint(step, net);
    }
    return result;
}

} // namespace bseg::train

#endif

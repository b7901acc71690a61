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
#ifndef BSEG_TRAIN_EVALUATE_HPP
#define BSEG_TRAIN_EVALUATE_HPP

#include <optional>
#include <vector>

#include "bseg/data/resize.hpp"
#include "bseg/data/sample.hpp"
#include "bseg/model/inference.hpp"
#include "bseg/train/metrics.hpp"

namespace bseg::train {

template <typename T>
struct Segmentation {
    Mask labels;                       ///< [H,W] at the input image's resolution
    std::optional<Tensor<T>> variance; ///< [classes,H,W] at the input's resolution, when T > 1
};

/// Network-compatible size for an arbitrary image: each side rounded to a multiple of 32.
inline data::Size2 network_size_for(std::size_t height, std::size_t width)
{
    return {data::round_to_network(height), data::round_to_network(width)};
}

/**
 * Segment one [3,H,W] image. Sizes that are not multiples of 32 are
 * resized to the nearest valid size for the network and the prediction is
 * brought back with nearest-neighbour sampling.
 */
template <typename T>
Segmentation<T> segment_image(const model::SegNet<T>& net, const Tensor<T>& image, std::size_t samples,
                              const RngStream& rng, model::McOptions opts = {})
{
    if (samples < 1)
        throw Error("sample count must be at least 1");
    if (image.rank() != 3 || image.dim(0) != model::kInputChannels)
        throw Error("segment_image expects a [3,H,W] image, got " + shape_string(image.shape()));
    const data::Size2 original{image.dim(1), image.dim(2)};
    const data::Size2 net_size = network_size_for(original.height, original.width);
    const bool resized = net_size.height != original.height || net_size.width != original.width;
    const Tensor<T> input = (resized ? data::resize_bilinear(image, net_size) : image)
                                .reshaped({1, model::kInputChannels, net_size.height, net_size.width});

    Segmentation<T> out;
    Tensor<T> prob;
    if (samples == 1) {
        prob = model::predict_probabilities(net, input);
    } else {
        auto mc = model::mc_predict(net, input, samples, rng, opts);
        prob = std::move(mc.mean_prob);
        out.variance = resized ? data::resize_bilinear(mc.variance, original) : std::move(mc.variance);
    }
    out.labels = model::argmax_classes(prob);
    if (resized)
        out.labels = data::resize_nearest(out.labels, original);
    return out;
}

template <typename T>
Mask predict_mask(const model::SegNet<T>& net, const Tensor<T>& image, std::size_t samples, const RngStream& rng)
{
    return segment_image(net, image, samples, rng).labels;
}

/**
 * Per-class Dice over a dataset. Sample i draws its dropout noise from
 * rng.derive(i); samples are processed by up to `threads` workers and the
 * counts are merged in dataset order.
 */
template <typename T>
EvalReport evaluate(const model::SegNet<T>& net, const std::vector<data::SampleRecord<T>>& dataset,
                    std::size_t samples = 1, const RngStream& rng = RngStream(0), std::size_t threads = 1)
{
    if (dataset.empty())
        throw Error("evaluation dataset is empty");
    std::vector<ConfusionCounts> per_sample(dataset.size());
    model::parallel_for(dataset.size(), threads, [&](std::size_t i) {
        const Mask pred = predict_mask(net, dataset[i].image, samples, rng.derive(i));
        accumulate_confusion(pred, dataset[i].mask, per_sample[i]);
    });
    ConfusionCounts total;
    for (const auto& c : per_sample)
        total += c;
    return dice_scores(total, dataset.size());
}

/// Dice report for precomputed predictions against ground truth.
inline EvalReport evaluate_masks(const std::vector<Mask>& predictions, const std::vector<Mask>& truths)
{
    if (predictions.size() != truths.size())
        throw Error("prediction and ground-truth counts differ");
    if (predictions.empty())
        throw Error("evaluation dataset is empty");
    ConfusionCounts total;
    for (std::size_t i = 0; i < predictions.size(); ++i)
        accumulate_confusion(predictions[i], truths[i], total);
    return dice_scores(total, predictions.size());
}

} // namespace bseg::train

#endif

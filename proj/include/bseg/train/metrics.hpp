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
#ifndef BSEG_TRAIN_METRICS_HPP
#define BSEG_TRAIN_METRICS_HPP

#include <array>
#include <cstdint>
#include <optional>

#include "bseg/tensor.hpp"

namespace bseg::train {

inline constexpr std::size_t kNumClasses = 12;

struct ConfusionCounts {
    std::array<std::uint64_t, kNumClasses> tp{};
    std::array<std::uint64_t, kNumClasses> fp{};
    std::array<std::uint64_t, kNumClasses> fn{};
    std::array<std::uint64_t, kNumClasses> support{}; ///< ground-truth pixels per class
    std::uint64_t pixels = 0;                         ///< non-void pixels seen

    ConfusionCounts& operator+=(const ConfusionCounts& o)
    {
        for (std::size_t c = 0; c < kNumClasses; ++c) {
            tp[c] += o.tp[c];
            fp[c] += o.fp[c];
            fn[c] += o.fn[c];
            support[c] += o.support[c];
        }
        pixels += o.pixels;
        return *this;
    }

    friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

/// Void ground-truth pixels are skipped entirely.
inline void accumulate_confusion(const Mask& pred, const Mask& gt, ConfusionCounts& counts)
{
    if (pred.shape() != gt.shape())
        throw Error("prediction shape " + shape_string(pred.shape()) + " differs from ground truth " +
                    shape_string(gt.shape()));
    for (std::size_t i = 0; i < gt.size(); ++i) {
        const std::uint8_t g = gt[i], p = pred[i];
        if (p >= kNumClasses)
            throw Error("prediction label " + std::to_string(p) + " is not a class");
        if (g == kVoidLabel)
            continue;
        if (g >= kNumClasses)
            throw Error("ground-truth label " + std::to_string(g) + " is not a class");
        ++counts.pixels;
        ++counts.support[g];
        if (p == g) {
            ++counts.tp[g];
        } else {
            ++counts.fp[p];
            ++counts.fn[g];
        }
    }
}

struct EvalReport {
    /// 2TP / (2TP + FP + FN); empty when the class is absent from prediction and truth.
    std::array<std::optional<double>, kNumClasses> dice{};
    ConfusionCounts counts;
    std::size_t samples = 0;

    /// Mean over defined foreground classes (1..11); empty when none is defined.
    std::optional<double> mean_foreground_dice() const
    {
        double sum = 0;
        std::size_t n = 0;
        for (std::size_t c = 1; c < kNumClasses; ++c)
            if (dice[c]) {
                sum += *dice[c];
                ++n;
            }
        if (n == 0)
            return std::nullopt;
        return sum / static_cast<double>(n);
    }
};

inline EvalReport dice_scores(const ConfusionCounts& counts, std::size_t samples = 0)
{
    EvalReport report;
    report.counts = counts;
    report.samples = samples;
    for (std::size_t c = 0; c < kNumClasses; ++c) {
        const std::uint64_t denom = 2 * counts.tp[c] + counts.fp[c] + counts.fn[c];
        if (denom != 0)
            report.dice[c] = 2.0 * static_cast<double>(counts.tp[c]) / static_cast<double>(denom);
    }
    return report;
}

} // namespace bseg::train

#endif

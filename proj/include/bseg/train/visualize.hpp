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
#ifndef BSEG_TRAIN_VISUALIZE_HPP
#define BSEG_TRAIN_VISUALIZE_HPP

#include <algorithm>
#include <array>
#include <cmath>

#include "bseg/data/png_io.hpp"
#include "bseg/train/metrics.hpp"

namespace bseg::train {

using Rgb8 = std::array<std::uint8_t, 3>;

/**
 * Label colours, indexed by class:
 *
 *   0 Background  black          6 Leg    blue
 *   1 Hair        brown          7 Arm    yellow
 *   2 Head        red            8 Mouth  magenta
 *   3 Ear         orange         9 Neck   cyan
 *   4 Eye         white         10 Nose   pink
 *   5 Eyebrow     purple        11 Torso  green
 *
 * Void pixels are drawn dark gray.
 */
inline constexpr std::array<Rgb8, kNumClasses> kPalette = {{
    {0, 0, 0},
    {128, 64, 0},
    {220, 20, 20},
    {255, 140, 0},
    {255, 255, 255},
    {128, 0, 160},
    {30, 60, 230},
    {240, 220, 0},
    {230, 0, 200},
    {0, 220, 220},
    {255, 160, 190},
    {30, 170, 60},
}};
inline constexpr Rgb8 kVoidColor = {64, 64, 64};

inline data::Image8 colorize(const Mask& mask)
{
    if (mask.rank() != 2)
        throw Error("colorize expects an [H,W] mask");
    data::Image8 img{mask.dim(0), mask.dim(1), 3, std::vector<std::uint8_t>(mask.size() * 3)};
    for (std::size_t i = 0; i < mask.size(); ++i) {
        const std::uint8_t v = mask[i];
        if (v != kVoidLabel && v >= kNumClasses)
            throw Error("label " + std::to_string(v) + " is outside the palette");
        const Rgb8& c = v == kVoidLabel ? kVoidColor : kPalette[v];
        std::copy(c.begin(), c.end(), img.pixels.begin() + static_cast<std::ptrdiff_t>(3 * i));
    }
    return img;
}

/// Inverse palette lookup; colours not in the palette are rejected.
inline Mask decolorize(const data::Image8& img)
{
    if (img.channels != 3)
        throw Error("decolorize expects an RGB image");
    Mask mask({img.height, img.width});
    for (std::size_t i = 0; i < mask.size(); ++i) {
        const Rgb8 px = {img.pixels[3 * i], img.pixels[3 * i + 1], img.pixels[3 * i + 2]};
        if (px == kVoidColor) {
            mask[i] = kVoidLabel;
            continue;
        }
        const auto it = std::find(kPalette.begin(), kPalette.end(), px);
        if (it == kPalette.end())
            throw Error("colour is not in the palette");
        mask[i] = static_cast<std::uint8_t>(it - kPalette.begin());
    }
    return mask;
}

/**
 * Per-pixel mean of the class variances, min-max scaled to [0,255]. A
 * constant map has no range to scale and comes out all zero.
 */
template <typename T>
data::Image8 uncertainty_map(const Tensor<T>& variance)
{
    if (variance.rank() != 3)
        throw Error("uncertainty_map expects [classes, H, W]");
    const std::size_t k = variance.dim(0), plane = variance.dim(1) * variance.dim(2);
    std::vector<double> mean(plane, 0.0);
    for (std::size_t c = 0; c < k; ++c)
        for (std::size_t i = 0; i < plane; ++i)
            mean[i] += static_cast<double>(variance[c * plane + i]);
    for (auto& m : mean)
        m /= static_cast<double>(k);
    const auto [lo, hi] = std::minmax_element(mean.begin(), mean.end());
    const double min = *lo, range = *hi - *lo;
    data::Image8 img{variance.dim(1), variance.dim(2), 1, std::vector<std::uint8_t>(plane, 0)};
    if (range > 0)
        for (std::size_t i = 0; i < plane; ++i)
            img.pixels[i] = static_cast<std::uint8_t>(std::lround(255.0 * (mean[i] - min) / range));
    return img;
}

/// Alpha blend of the colorized mask over a [3,H,W] image in [0,1].
template <typename T>
data::Image8 overlay(const Tensor<T>& image, const Mask& mask, double alpha = 0.5)
{
    if (image.rank() != 3 || image.dim(0) != 3 || image.dim(1) != mask.dim(0) || image.dim(2) != mask.dim(1))
        throw Error("overlay image and mask dims differ");
    const data::Image8 base = data::to_image8(image);
    const data::Image8 colors = colorize(mask);
    data::Image8 out = base;
    for (std::size_t i = 0; i < out.pixels.size(); ++i)
        out.pixels[i] = static_cast<std::uint8_t>(
            std::lround((1 - alpha) * base.pixels[i] + alpha * colors.pixels[i]));
    return out;
}

} // namespace bseg::train

#endif

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
#ifndef BSEG_DATA_RESIZE_HPP
#define BSEG_DATA_RESIZE_HPP

#include <algorithm>
#include <cmath>

#include "bseg/data/sample.hpp"

namespace bseg::data {

struct Size2 {
    std::size_t height = 0;
    std::size_t width = 0;
    friend bool operator==(const Size2&, const Size2&) = default;
};

namespace detail {

/// Half-pixel-centre source coordinate of destination index `i`.
inline double source_coord(std::size_t i, std::size_t src, std::size_t dst)
{
    const double s = (static_cast<double>(i) + 0.5) * static_cast<double>(src) / static_cast<double>(dst) - 0.5;
    return std::clamp(s, 0.0, static_cast<double>(src - 1));
}

inline std::size_t nearest_index(std::size_t i, std::size_t src, std::size_t dst)
{
    const auto s = static_cast<std::size_t>(std::floor((static_cast<double>(i) + 0.5) *
                                                       static_cast<double>(src) / static_cast<double>(dst)));
    return std::min(s, src - 1);
}

} // namespace detail

/// Bilinear resize of a [C,H,W] image (half-pixel centres, edge clamped).
template <typename T>
Tensor<T> resize_bilinear(const Tensor<T>& image, Size2 target)
{
    const std::size_t ch = image.dim(0), h = image.dim(1), w = image.dim(2);
    if (target.height == h && target.width == w)
        return image;
    Tensor<T> out({ch, target.height, target.width});
    for (std::size_t y = 0; y < target.height; ++y) {
        const double sy = detail::source_coord(y, h, target.height);
        const auto y0 = static_cast<std::size_t>(sy);
        const std::size_t y1 = std::min(y0 + 1, h - 1);
        const T fy = static_cast<T>(sy - static_cast<double>(y0));
        for (std::size_t x = 0; x < target.width; ++x) {
            const double sx = detail::source_coord(x, w, target.width);
            const auto x0 = static_cast<std::size_t>(sx);
            const std::size_t x1 = std::min(x0 + 1, w - 1);
            const T fx = static_cast<T>(sx - static_cast<double>(x0));
            for (std::size_t c = 0; c < ch; ++c) {
                const T* p = image.raw() + c * h * w;
                // lerp form keeps constant regions exactly constant
                const T top = p[y0 * w + x0] + fx * (p[y0 * w + x1] - p[y0 * w + x0]);
                const T bot = p[y1 * w + x0] + fx * (p[y1 * w + x1] - p[y1 * w + x0]);
                out[(c * target.height + y) * target.width + x] = top + fy * (bot - top);
            }
        }
    }
    return out;
}

/// Nearest-neighbour resize of an [H,W] mask; labels are never blended.
inline Mask resize_nearest(const Mask& mask, Size2 target)
{
    const std::size_t h = mask.dim(0), w = mask.dim(1);
    if (target.height == h && target.width == w)
        return mask;
    Mask out({target.height, target.width});
    for (std::size_t y = 0; y < target.height; ++y) {
        const std::size_t sy = detail::nearest_index(y, h, target.height);
        for (std::size_t x = 0; x < target.width; ++x)
            out[y * target.width + x] = mask[sy * w + detail::nearest_index(x, w, target.width)];
    }
    return out;
}

template <typename T>
Tensor<T> crop(const Tensor<T>& image, std::size_t top, std::size_t left, Size2 size)
{
    const std::size_t ch = image.dim(0), h = image.dim(1), w = image.dim(2);
    Tensor<T> out({ch, size.height, size.width});
    for (std::size_t c = 0; c < ch; ++c)
        for (std::size_t y = 0; y < size.height; ++y)
            for (std::size_t x = 0; x < size.width; ++x)
                out[(c * size.height + y) * size.width + x] = image[(c * h + top + y) * w + left + x];
    return out;
}

inline void require_network_size(Size2 target)
{
    if (target.height < 32 || target.width < 32 || target.height % 32 != 0 || target.width % 32 != 0)
        throw Error("target size " + std::to_string(target.height) + "x" + std::to_string(target.width) +
                    " must be a multiple of 32");
}

/// Smallest multiple of 32 (at least 32) nearest to `v`.
inline std::size_t round_to_network(std::size_t v)
{
    return std::max<std::size_t>(32, (v + 16) / 32 * 32);
}

/**
 * Scale so the target is covered while keeping aspect ratio, then crop the
 * centre. Image uses bilinear interpolation, mask nearest neighbour.
 */
template <typename T>
SampleRecord<T> resize_pair(const SampleRecord<T>& s, Size2 target)
{
    require_network_size(target);
    const std::size_t h = s.height(), w = s.width();
    if (h == target.height && w == target.width)
        return s;
    const double scale = std::max(static_cast<double>(target.height) / static_cast<double>(h),
                                  static_cast<double>(target.width) / static_cast<double>(w));
    const Size2 scaled{std::max(target.height, static_cast<std::size_t>(std::lround(h * scale))),
                       std::max(target.width, static_cast<std::size_t>(std::lround(w * scale)))};
    const Tensor<T> image = resize_bilinear(s.image, scaled);
    const Mask mask = resize_nearest(s.mask, scaled);
    const std::size_t top = (scaled.height - target.height) / 2;
    const std::size_t left = (scaled.width - target.width) / 2;

    SampleRecord<T> out;
    out.source_id = s.source_id;
    out.image = crop(image, top, left, target);
    Mask m({target.height, target.width});
    for (std::size_t y = 0; y < target.height; ++y)
        for (std::size_t x = 0; x < target.width; ++x)
            m[y * target.width + x] = mask[(top + y) * scaled.width + left + x];
    out.mask = std::move(m);
    return out;
}

} // namespace bseg::data

#endif

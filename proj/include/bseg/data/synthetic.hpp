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
#ifndef BSEG_DATA_SYNTHETIC_HPP
#define BSEG_DATA_SYNTHETIC_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <vector>

#include "bseg/data/resize.hpp"
#include "bseg/data/sample.hpp"
#include "bseg/rng.hpp"

namespace bseg::data {

inline constexpr std::uint8_t kSynthHead = 2;
inline constexpr std::uint8_t kSynthLeg = 6;
inline constexpr std::uint8_t kSynthArm = 7;
inline constexpr std::uint8_t kSynthTorso = 11;

namespace detail {

struct Rgb {
    double r, g, b;
};

inline Rgb jitter(const Rgb& base, double amount, RngStream& rng)
{
    auto j = [&](double v) { return std::clamp(v + rng.uniform(-amount, amount), 0.0, 1.0); };
    const double r = j(base.r);
    const double g = j(base.g);
    const double b = j(base.b);
    return {r, g, b};
}

template <typename T>
class Canvas {
public:
    Canvas(std::size_t h, std::size_t w) : h_(h), w_(w), image_({3, h, w}), mask_({h, w}, 0) {}

    void put(std::size_t y, std::size_t x, const Rgb& c, std::uint8_t label)
    {
        const std::size_t plane = h_ * w_;
        image_[y * w_ + x] = static_cast<T>(c.r);
        image_[plane + y * w_ + x] = static_cast<T>(c.g);
        image_[2 * plane + y * w_ + x] = static_cast<T>(c.b);
        mask_[y * w_ + x] = label;
    }

    /// Pixels whose centre lies inside [y0,y1) x [x0,x1).
    void rect(double y0, double y1, double x0, double x1, const Rgb& c, std::uint8_t label)
    {
        for (std::size_t y = 0; y < h_; ++y) {
            const double cy = static_cast<double>(y) + 0.5;
            if (cy < y0 || cy >= y1)
                continue;
            for (std::size_t x = 0; x < w_; ++x) {
                const double cx = static_cast<double>(x) + 0.5;
                if (cx >= x0 && cx < x1)
                    put(y, x, c, label);
            }
        }
    }

    void ellipse(double cy, double cx, double ry, double rx, const Rgb& c, std::uint8_t label)
    {
        for (std::size_t y = 0; y < h_; ++y) {
            const double dy = (static_cast<double>(y) + 0.5 - cy) / ry;
            for (std::size_t x = 0; x < w_; ++x) {
                const double dx = (static_cast<double>(x) + 0.5 - cx) / rx;
                if (dx * dx + dy * dy <= 1.0)
                    put(y, x, c, label);
            }
        }
    }

    std::size_t height() const { return h_; }
    std::size_t width() const { return w_; }
    Tensor<T>& image() { return image_; }
    Mask& mask() { return mask_; }

private:
    std::size_t h_, w_;
    Tensor<T> image_;
    Mask mask_;
};

template <typename T>
void paint_background(Canvas<T>& canvas, RngStream& rng)
{
    const Rgb base{rng.uniform(0.2, 0.6), rng.uniform(0.2, 0.6), rng.uniform(0.2, 0.6)};
    const double freq = rng.uniform(0.1, 0.4);
    const double angle = rng.uniform(0.0, std::numbers::pi);
    const double amp = rng.uniform(0.03, 0.1);
    const double fy = std::sin(angle) * freq, fx = std::cos(angle) * freq;
    for (std::size_t y = 0; y < canvas.height(); ++y) {
        for (std::size_t x = 0; x < canvas.width(); ++x) {
            const double wave = amp * std::sin(fy * static_cast<double>(y) + fx * static_cast<double>(x));
            const double grain = rng.uniform(-0.03, 0.03);
            canvas.put(y, x,
                       {std::clamp(base.r + wave + grain, 0.0, 1.0), std::clamp(base.g + wave + grain, 0.0, 1.0),
                        std::clamp(base.b + wave + grain, 0.0, 1.0)},
                       0);
        }
    }
}

} // namespace detail

/**
 * One stick figure on a textured background: an elliptical head (2), a
 * rectangular torso (11), two legs (6) and two arms (7). Geometry, colours
 * and texture come from `rng`.
 */
template <typename T = double>
SampleRecord<T> synthetic_record(RngStream rng, Size2 canvas_size, std::string source_id)
{
    detail::Canvas<T> canvas(canvas_size.height, canvas_size.width);
    detail::paint_background(canvas, rng);

    const double H = static_cast<double>(canvas_size.height);
    const double W = static_cast<double>(canvas_size.width);
    const double fig = rng.uniform(0.65, 0.95) * H;
    const double top = rng.uniform(0.02 * H, H - fig - 0.02 * H + 1e-9);
    const double head_ry = 0.11 * fig;
    const double head_rx = head_ry * rng.uniform(0.75, 0.95);
    const double torso_h = 0.36 * fig;
    const double torso_w = rng.uniform(0.26, 0.34) * fig;
    const double limb_w = std::max(3.0, rng.uniform(0.08, 0.11) * fig);
    const double leg_h = fig - 2 * head_ry - torso_h;
    const double arm_h = rng.uniform(0.30, 0.38) * fig;
    const double span = torso_w + 2 * (limb_w + 1.0);
    const double cx = rng.uniform(span / 2 + 1.0, W - span / 2 - 1.0);

    const detail::Rgb skin = detail::jitter({0.85, 0.65, 0.50}, 0.08, rng);
    const detail::Rgb shirt{rng.uniform(0.1, 1.0), rng.uniform(0.1, 1.0), rng.uniform(0.1, 1.0)};
    const detail::Rgb pants{rng.uniform(0.0, 0.4), rng.uniform(0.0, 0.4), rng.uniform(0.1, 0.6)};

    const double neck_y = top + 2 * head_ry;
    const double hip_y = neck_y + torso_h;
    const double gap = rng.uniform(0.5, 2.0);

    canvas.rect(hip_y, hip_y + leg_h, cx - gap / 2 - limb_w, cx - gap / 2, pants, kSynthLeg);
    canvas.rect(hip_y, hip_y + leg_h, cx + gap / 2, cx + gap / 2 + limb_w, pants, kSynthLeg);
    canvas.rect(neck_y, hip_y, cx - torso_w / 2, cx + torso_w / 2, shirt, kSynthTorso);
    canvas.rect(neck_y + 1, neck_y + 1 + arm_h, cx - torso_w / 2 - 1 - limb_w, cx - torso_w / 2 - 1, skin,
                kSynthArm);
    canvas.rect(neck_y + 1, neck_y + 1 + arm_h, cx + torso_w / 2 + 1, cx + torso_w / 2 + 1 + limb_w, skin,
                kSynthArm);
    canvas.ellipse(top + head_ry, cx, head_ry, head_rx, skin, kSynthHead);

    return {std::move(canvas.image()), std::move(canvas.mask()), std::move(source_id)};
}

/// `n` records; record i depends only on (seed, i).
template <typename T = double>
std::vector<SampleRecord<T>> synthetic_dataset(std::size_t n, std::uint64_t seed, Size2 canvas)
{
    if (n < 1)
        throw Error("synthetic_dataset needs n >= 1");
    require_network_size(canvas);
    const RngStream root(seed);
    std::vector<SampleRecord<T>> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        char id[32];
        std::snprintf(id, sizeof(id), "synth_%05zu", i);
        out.push_back(synthetic_record<T>(root.derive(i), canvas, id));
    }
    return out;
}

} // namespace bseg::data

#endif

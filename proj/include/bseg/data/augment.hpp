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
#ifndef BSEG_DATA_AUGMENT_HPP
#define BSEG_DATA_AUGMENT_HPP

#include <algorithm>
#include <cmath>

#include "bseg/data/sample.hpp"
#include "bseg/rng.hpp"

namespace bseg::data {

/// Jitter half-ranges. Factors are drawn from [1-x, 1+x]; hue shift from [-hue, hue].
struct AugmentConfig {
    double flip_prob = 0.5;
    double brightness = 0.25;
    double contrast = 0.25;
    double saturation = 0.25;
    double hue = 0.05;

    static AugmentConfig identity() { return {0.0, 0.0, 0.0, 0.0, 0.0}; }

    void validate() const
    {
        auto in = [](double v, double lo, double hi) { return v >= lo && v < hi; };
        if (!(flip_prob >= 0.0 && flip_prob <= 1.0))
            throw Error("flip_prob must be in [0,1]");
        if (!in(brightness, 0, 1) || !in(contrast, 0, 1) || !in(saturation, 0, 1))
            throw Error("brightness, contrast and saturation must be in [0,1)");
        if (!in(hue, 0, 0.5))
            throw Error("hue must be in [0,0.5)");
    }
};

/// The random choices of one augment call.
struct AugmentDraw {
    bool flip = false;
    double brightness = 1.0;
    double contrast = 1.0;
    double saturation = 1.0;
    double hue = 0.0;
};

/// Always consumes five draws so the stream position does not depend on cfg.
inline AugmentDraw draw_augment(const AugmentConfig& cfg, RngStream& rng)
{
    AugmentDraw d;
    d.flip = rng.next_double() < cfg.flip_prob;
    d.brightness = rng.uniform(1.0 - cfg.brightness, 1.0 + cfg.brightness);
    d.contrast = rng.uniform(1.0 - cfg.contrast, 1.0 + cfg.contrast);
    d.saturation = rng.uniform(1.0 - cfg.saturation, 1.0 + cfg.saturation);
    d.hue = rng.uniform(-cfg.hue, cfg.hue);
    return d;
}

/// Mirror image and mask: pixel (r, c) moves to (r, W-1-c).
template <typename T>
SampleRecord<T> hflip(const SampleRecord<T>& s)
{
    SampleRecord<T> out = s;
    const std::size_t h = s.height(), w = s.width();
    for (std::size_t ch = 0; ch < 3; ++ch)
        for (std::size_t r = 0; r < h; ++r)
            for (std::size_t c = 0; c < w; ++c)
                out.image[(ch * h + r) * w + c] = s.image[(ch * h + r) * w + (w - 1 - c)];
    for (std::size_t r = 0; r < h; ++r)
        for (std::size_t c = 0; c < w; ++c)
            out.mask[r * w + c] = s.mask[r * w + (w - 1 - c)];
    return out;
}

namespace detail {

inline constexpr double kLumaR = 0.299, kLumaG = 0.587, kLumaB = 0.114;

template <typename T>
T clamp01(T v)
{
    return std::clamp(v, T{0}, T{1});
}

inline void rgb_to_hsv(double r, double g, double b, double& h, double& s, double& v)
{
    const double mx = std::max({r, g, b}), mn = std::min({r, g, b});
    const double d = mx - mn;
    v = mx;
    s = mx > 0 ? d / mx : 0.0;
    if (d <= 0) {
        h = 0;
        return;
    }
    if (mx == r)
        h = (g - b) / d;
    else if (mx == g)
        h = 2.0 + (b - r) / d;
    else
        h = 4.0 + (r - g) / d;
    h /= 6.0;
    if (h < 0)
        h += 1.0;
}

inline void hsv_to_rgb(double h, double s, double v, double& r, double& g, double& b)
{
    const double hh = (h - std::floor(h)) * 6.0;
    const int sector = static_cast<int>(hh) % 6;
    const double f = hh - std::floor(hh);
    const double p = v * (1 - s), q = v * (1 - s * f), t = v * (1 - s * (1 - f));
    switch (sector) {
    case 0: r = v, g = t, b = p; break;
    case 1: r = q, g = v, b = p; break;
    case 2: r = p, g = v, b = t; break;
    case 3: r = p, g = q, b = v; break;
    case 4: r = t, g = p, b = v; break;
    default: r = v, g = p, b = q; break;
    }
}

} // namespace detail

/**
 * Apply a fixed draw. Photometric steps run in the order brightness,
 * contrast, saturation, hue, each clamped to [0,1]; a step whose factor is
 * neutral is skipped so the identity draw reproduces the input exactly.
 * Photometric steps never read or write the mask.
 */
template <typename T>
SampleRecord<T> apply_augment(const SampleRecord<T>& s, const AugmentDraw& d)
{
    SampleRecord<T> out = d.flip ? hflip(s) : s;
    const std::size_t plane = s.height() * s.width();
    T* r = out.image.raw();
    T* g = r + plane;
    T* b = g + plane;
    auto luma = [&](std::size_t i) {
        return static_cast<T>(detail::kLumaR * r[i] + detail::kLumaG * g[i] + detail::kLumaB * b[i]);
    };
    if (d.brightness != 1.0) {
        const T f = static_cast<T>(d.brightness);
        for (auto& v : out.image.data())
            v = detail::clamp01(v * f);
    }
    if (d.contrast != 1.0) {
        double mean = 0;
        for (std::size_t i = 0; i < plane; ++i)
            mean += luma(i);
        const T m = static_cast<T>(mean / static_cast<double>(plane));
        const T f = static_cast<T>(d.contrast);
        for (auto& v : out.image.data())
            v = detail::clamp01(m + f * (v - m));
    }
    if (d.saturation != 1.0) {
        const T f = static_cast<T>(d.saturation);
        for (std::size_t i = 0; i < plane; ++i) {
            const T gray = luma(i);
            r[i] = detail::clamp01(gray + f * (r[i] - gray));
            g[i] = detail::clamp01(gray + f * (g[i] - gray));
            b[i] = detail::clamp01(gray + f * (b[i] - gray));
        }
    }
    if (d.hue != 0.0) {
        for (std::size_t i = 0; i < plane; ++i) {
            double h, sat, val, rr, gg, bb;
            detail::rgb_to_hsv(r[i], g[i], b[i], h, sat, val);
            detail::hsv_to_rgb(h + d.hue, sat, val, rr, gg, bb);
            r[i] = detail::clamp01(static_cast<T>(rr));
            g[i] = detail::clamp01(static_cast<T>(gg));
            b[i] = detail::clamp01(static_cast<T>(bb));
        }
    }
    return out;
}

template <typename T>
SampleRecord<T> augment(const SampleRecord<T>& s, const AugmentConfig& cfg, RngStream& rng)
{
    cfg.validate();
    return apply_augment(s, draw_augment(cfg, rng));
}

} // namespace bseg::data

#endif

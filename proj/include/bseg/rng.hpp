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
#ifndef BSEG_RNG_HPP
#define BSEG_RNG_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>

#include "bseg/tensor.hpp"

namespace bseg {

/**
 * Counter-based random stream.
 *
 * The k-th 64-bit draw is the SplitMix64 finalizer applied to
 * `key + k * 0x9E3779B97F4A7C15`, where `key` is the SplitMix64 hash of the
 * seed. Only integer arithmetic is involved, so sequences are identical on
 * every platform. Child streams hash (key, label) into a fresh key.
 */
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : seed_(seed), key_(mix(seed)) {}

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t position() const noexcept { return counter_; }

    std::uint64_t next_u64() noexcept
    {
        ++counter_;
        return mix(key_ + counter_ * kGamma);
    }

    /// Uniform in [0, 1) with 53 random bits.
    double next_double() noexcept
    {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * next_double(); }

    /// Standard normal via Box-Muller (one variate per two uniforms).
    double normal() noexcept
    {
        const double u1 = 1.0 - next_double(); // (0, 1]
        const double u2 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    /// Unbiased integer in [0, n).
    std::uint64_t below(std::uint64_t n)
    {
        if (n == 0)
            throw Error("below(0)");
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v;
        do {
            v = next_u64();
        } while (v >= limit);
        return v % n;
    }

    RngStream derive(std::uint64_t label) const noexcept
    {
        return RngStream(mix(key_ ^ mix(label + 0x632BE59BD9B4E019ULL)));
    }

    template <typename U>
    void shuffle(std::span<U> items)
    {
        for (std::size_t i = items.size(); i > 1; --i)
            std::swap(items[i - 1], items[below(i)]);
    }

    static std::uint64_t mix(std::uint64_t z) noexcept
    {
        z += kGamma;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

private:
    static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

    std::uint64_t seed_;
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

inline constexpr double kUniformEpsilon = 1e-7;

/// Uniform noise clamped to [eps, 1 - eps] so both log(u) and log(1-u) stay finite.
template <typename T = double>
Tensor<T> seeded_uniform(RngStream& rng, const Shape& shape)
{
    if (shape.empty() || shape_size(shape) == 0 ||
        std::find(shape.begin(), shape.end(), 0) != shape.end())
        throw Error("empty shape");
    Tensor<T> out(shape);
    for (auto& v : out.data())
        v = static_cast<T>(std::clamp(rng.next_double(), kUniformEpsilon, 1.0 - kUniformEpsilon));
    return out;
}

} // namespace bseg

#endif

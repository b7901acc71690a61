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
#ifndef BSEG_NN_POOLING_HPP
#define BSEG_NN_POOLING_HPP

#include <cstdint>

#include "bseg/nn/conv.hpp"
#include "bseg/tensor.hpp"

namespace bseg::nn {

/**
 * Argmax positions recorded by maxpool2x2. Each entry is the row-major offset
 * (row * W + col) inside the input plane of the same (n, c), and always lies
 * in the 2x2 window that produced the pooled value.
 */
struct PoolIndices {
    Tensor<std::uint32_t> argmax;
    Shape input_shape;
};

template <typename T>
struct PoolResult {
    Tensor<T> values;
    PoolIndices indices;
};

/// Non-overlapping 2x2 max pool. Ties go to the smallest row-major offset.
template <typename T>
PoolResult<T> maxpool2x2(const Tensor<T>& x)
{
    detail::check_nchw(x.shape(), "maxpool2x2");
    const std::size_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
    if (h % 2 != 0 || w % 2 != 0)
        throw Error("spatial dims must be even");
    const std::size_t oh = h / 2, ow = w / 2;
    PoolResult<T> out{Tensor<T>({n, c, oh, ow}),
                      {Tensor<std::uint32_t>({n, c, oh, ow}), x.shape()}};
    for (std::size_t p = 0; p < n * c; ++p) {
        const T* in = x.raw() + p * h * w;
        T* val = out.values.raw() + p * oh * ow;
        std::uint32_t* idx = out.indices.argmax.raw() + p * oh * ow;
        for (std::size_t y = 0; y < oh; ++y) {
            for (std::size_t xo = 0; xo < ow; ++xo) {
                const std::size_t cand[4] = {(2 * y) * w + 2 * xo, (2 * y) * w + 2 * xo + 1,
                                             (2 * y + 1) * w + 2 * xo, (2 * y + 1) * w + 2 * xo + 1};
                std::size_t best = cand[0];
                for (int k = 1; k < 4; ++k)
                    if (in[cand[k]] > in[best])
                        best = cand[k];
                val[y * ow + xo] = in[best];
                idx[y * ow + xo] = static_cast<std::uint32_t>(best);
            }
        }
    }
    return out;
}

/// Scatter pooled values back to their argmax positions; zeros elsewhere.
template <typename T>
Tensor<T> maxunpool2x2(const Tensor<T>& y, const PoolIndices& idx, const Shape& out_shape)
{
    detail::check_nchw(y.shape(), "maxunpool2x2");
    if (idx.argmax.shape() != y.shape())
        throw Error("maxunpool2x2 index shape does not match values");
    const std::size_t n = y.dim(0), c = y.dim(1), oh = y.dim(2), ow = y.dim(3);
    if (out_shape != Shape{n, c, 2 * oh, 2 * ow})
        throw Error("maxunpool2x2 output shape must be " + shape_string({n, c, 2 * oh, 2 * ow}));
    const std::size_t w = 2 * ow;
    Tensor<T> out(out_shape, T{0});
    for (std::size_t p = 0; p < n * c; ++p) {
        const T* val = y.raw() + p * oh * ow;
        const std::uint32_t* ix = idx.argmax.raw() + p * oh * ow;
        T* dst = out.raw() + p * 4 * oh * ow;
        for (std::size_t r = 0; r < oh; ++r) {
            for (std::size_t q = 0; q < ow; ++q) {
                const std::size_t pos = ix[r * ow + q];
                if (pos / w / 2 != r || (pos % w) / 2 != q || pos >= 4 * oh * ow)
                    throw Error("corrupt indices");
                dst[pos] = val[r * ow + q];
            }
        }
    }
    return out;
}

/// Gradient of maxpool2x2: routes each output gradient to its argmax.
template <typename T>
Tensor<T> maxpool2x2_backward(const Tensor<T>& grad_out, const PoolIndices& idx)
{
    return maxunpool2x2(grad_out, idx, idx.input_shape);
}

/// Gradient of maxunpool2x2: gathers the upstream gradient at the argmax positions.
template <typename T>
Tensor<T> maxunpool2x2_backward(const Tensor<T>& grad_out, const PoolIndices& idx)
{
    const Shape& pooled = idx.argmax.shape();
    if (grad_out.shape() != idx.input_shape)
        throw Error("maxunpool2x2_backward gradient shape mismatch");
    const std::size_t planes = pooled[0] * pooled[1];
    const std::size_t small = pooled[2] * pooled[3];
    const std::size_t big = idx.input_shape[2] * idx.input_shape[3];
    Tensor<T> dy(pooled);
    for (std::size_t p = 0; p < planes; ++p)
        for (std::size_t i = 0; i < small; ++i)
            dy[p * small + i] = grad_out[p * big + idx.argmax[p * small + i]];
    return dy;
}

} // namespace bseg::nn

#endif

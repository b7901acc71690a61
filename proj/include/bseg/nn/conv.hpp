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
#ifndef BSEG_NN_CONV_HPP
#define BSEG_NN_CONV_HPP

#include <algorithm>
#include <cstring>
#include <vector>

#include <Eigen/Core>

#include "bseg/tensor.hpp"

namespace bseg::nn {

enum class Mode {
    train, ///< batch statistics, stochastic dropout
    eval,  ///< running statistics, dropout is the identity
    mc     ///< running statistics, stochastic dropout
};

template <typename T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatrixMap = Eigen::Map<RowMatrix<T>>;
template <typename T>
using ConstMatrixMap = Eigen::Map<const RowMatrix<T>>;

inline constexpr std::size_t kKernel = 3;
inline constexpr std::size_t kTaps = kKernel * kKernel;

/// 3x3 convolution weights [out, in, 3, 3] and bias [out].
template <typename T>
struct ConvParams {
    Tensor<T> weight;
    Tensor<T> bias;

    static ConvParams zeros(std::size_t out_channels, std::size_t in_channels)
    {
        return {Tensor<T>({out_channels, in_channels, kKernel, kKernel}, T{0}),
                Tensor<T>({out_channels}, T{0})};
    }

    std::size_t out_channels() const { return weight.dim(0); }
    std::size_t in_channels() const { return weight.dim(1); }
};

template <typename T>
using ConvGrads = ConvParams<T>;

namespace detail {

inline void check_nchw(const Shape& s, const char* what)
{
    if (s.size() != 4)
        throw Error(std::string(what) + " expects an [N,C,H,W] tensor, got " + shape_string(s));
}

/// col[(c*9 + ky*3 + kx), y*W + x] = in[c, y+ky-1, x+kx-1], zero outside.
template <typename T>
void im2col(const T* in, std::size_t channels, std::size_t height, std::size_t width, T* col)
{
    const std::size_t plane = height * width;
    for (std::size_t c = 0; c < channels; ++c) {
        const T* src = in + c * plane;
        for (std::size_t ky = 0; ky < kKernel; ++ky) {
            for (std::size_t kx = 0; kx < kKernel; ++kx) {
                T* row = col + ((c * kTaps) + ky * kKernel + kx) * plane;
                for (std::size_t y = 0; y < height; ++y) {
                    T* dst = row + y * width;
                    const long sy = static_cast<long>(y) + static_cast<long>(ky) - 1;
                    if (sy < 0 || sy >= static_cast<long>(height)) {
                        std::fill(dst, dst + width, T{0});
                        continue;
                    }
                    const T* s = src + static_cast<std::size_t>(sy) * width;
                    if (kx == 0) {
                        dst[0] = T{0};
                        std::copy(s, s + width - 1, dst + 1);
                    } else if (kx == 1) {
                        std::copy(s, s + width, dst);
                    } else {
                        std::copy(s + 1, s + width, dst);
                        dst[width - 1] = T{0};
                    }
                }
            }
        }
    }
}

/// Adjoint of im2col: scatter-add columns back into the image.
template <typename T>
void col2im_add(const T* col, std::size_t channels, std::size_t height, std::size_t width, T* out)
{
    const std::size_t plane = height * width;
    for (std::size_t c = 0; c < channels; ++c) {
        T* dst = out + c * plane;
        for (std::size_t ky = 0; ky < kKernel; ++ky) {
            for (std::size_t kx = 0; kx < kKernel; ++kx) {
                const T* row = col + ((c * kTaps) + ky * kKernel + kx) * plane;
                for (std::size_t y = 0; y < height; ++y) {
                    const long sy = static_cast<long>(y) + static_cast<long>(ky) - 1;
                    if (sy < 0 || sy >= static_cast<long>(height))
                        continue;
                    const T* s = row + y * width;
                    T* d = dst + static_cast<std::size_t>(sy) * width;
                    if (kx == 0) {
                        for (std::size_t x = 1; x < width; ++x)
                            d[x - 1] += s[x];
                    } else if (kx == 1) {
                        for (std::size_t x = 0; x < width; ++x)
                            d[x] += s[x];
                    } else {
                        for (std::size_t x = 0; x + 1 < width; ++x)
                            d[x + 1] += s[x];
                    }
                }
            }
        }
    }
}

} // namespace detail

/// Stride-1, zero-padding-1 cross-correlation; output keeps H and W.
template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const ConvParams<T>& params)
{
    detail::check_nchw(x.shape(), "conv2d");
    const std::size_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
    if (c != params.in_channels())
        throw Error("conv2d channel mismatch: input has " + std::to_string(c) +
                    " channels, kernel expects " + std::to_string(params.in_channels()));
    const std::size_t out_c = params.out_channels();
    const std::size_t plane = h * w;
    Tensor<T> y({n, out_c, h, w});
    std::vector<T> col(c * kTaps * plane);
    ConstMatrixMap<T> weight(params.weight.raw(), out_c, c * kTaps);
    ConstMatrixMap<T> colm(col.data(), c * kTaps, plane);
    Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>> bias(params.bias.raw(), out_c);
    for (std::size_t s = 0; s < n; ++s) {
        detail::im2col(x.raw() + s * c * plane, c, h, w, col.data());
        MatrixMap<T> out(y.raw() + s * out_c * plane, out_c, plane);
        out.noalias() = weight * colm;
        out.colwise() += bias;
    }
    return y;
}

/**
 * Backward pass of conv2d. Parameter gradients are accumulated into `grads`
 * (which must already have the parameter shapes); the input gradient is
 * returned unless `need_input_grad` is false, in which case a scalar zero is.
 */
template <typename T>
Tensor<T> conv2d_backward(const Tensor<T>& x, const ConvParams<T>& params,
                          const Tensor<T>& grad_out, ConvGrads<T>& grads,
                          bool need_input_grad = true)
{
    detail::check_nchw(x.shape(), "conv2d_backward");
    const std::size_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
    const std::size_t out_c = params.out_channels();
    const std::size_t plane = h * w;
    if (grad_out.shape() != Shape{n, out_c, h, w})
        throw Error("conv2d_backward gradient shape mismatch");
    std::vector<T> col(c * kTaps * plane);
    std::vector<T> dcol(need_input_grad ? c * kTaps * plane : 0);
    ConstMatrixMap<T> weight(params.weight.raw(), out_c, c * kTaps);
    MatrixMap<T> dweight(grads.weight.raw(), out_c, c * kTaps);
    Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>> dbias(grads.bias.raw(), out_c);
    Tensor<T> dx = need_input_grad ? Tensor<T>(x.shape(), T{0}) : Tensor<T>();
    for (std::size_t s = 0; s < n; ++s) {
        detail::im2col(x.raw() + s * c * plane, c, h, w, col.data());
        ConstMatrixMap<T> colm(col.data(), c * kTaps, plane);
        ConstMatrixMap<T> dy(grad_out.raw() + s * out_c * plane, out_c, plane);
        dweight.noalias() += dy * colm.transpose();
        dbias += dy.rowwise().sum();
        if (need_input_grad) {
            MatrixMap<T> dcolm(dcol.data(), c * kTaps, plane);
            dcolm.noalias() = weight.transpose() * dy;
            detail::col2im_add(dcol.data(), c, h, w, dx.raw() + s * c * plane);
        }
    }
    return dx;
}

} // namespace bseg::nn

#endif

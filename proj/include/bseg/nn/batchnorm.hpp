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
#ifndef BSEG_NN_BATCHNORM_HPP
#define BSEG_NN_BATCHNORM_HPP

#include <cmath>
#include <vector>

#include "bseg/nn/conv.hpp"
#include "bseg/tensor.hpp"

namespace bseg::nn {

inline constexpr double kBatchNormEps = 1e-5;
inline constexpr double kBatchNormMomentum = 0.1;

template <typename T>
struct BatchNormParams {
    Tensor<T> gamma;
    Tensor<T> beta;
    Tensor<T> running_mean;
    Tensor<T> running_var;
    T eps = static_cast<T>(kBatchNormEps);
    T momentum = static_cast<T>(kBatchNormMomentum);

    static BatchNormParams identity(std::size_t channels)
    {
        return {Tensor<T>({channels}, T{1}), Tensor<T>({channels}, T{0}),
                Tensor<T>({channels}, T{0}), Tensor<T>({channels}, T{1})};
    }

    std::size_t channels() const { return gamma.size(); }
};

template <typename T>
struct BatchNormGrads {
    Tensor<T> gamma;
    Tensor<T> beta;

    static BatchNormGrads zeros(std::size_t channels)
    {
        return {Tensor<T>({channels}, T{0}), Tensor<T>({channels}, T{0})};
    }
};

/// Per-channel batch moments observed in a train-mode pass.
template <typename T>
struct BatchMoments {
    std::vector<T> mean;
    std::vector<T> var;  ///< biased (divides by N*H*W)
    std::size_t count = 0;
};

/// Saved forward quantities needed by batchnorm2d_backward.
template <typename T>
struct BatchNormCache {
    Tensor<T> normalized;
    std::vector<T> inv_std;
    bool batch_statistics = false;
};

/**
 * Normalizes each channel over (N, H, W). With `train` the batch moments are
 * used and reported through `moments`; otherwise the running statistics are.
 * Running statistics are never touched here, see update_running_stats.
 */
template <typename T>
Tensor<T> batchnorm2d(const Tensor<T>& x, const BatchNormParams<T>& params, bool train,
                      BatchNormCache<T>* cache = nullptr, BatchMoments<T>* moments = nullptr)
{
    detail::check_nchw(x.shape(), "batchnorm2d");
    const std::size_t n = x.dim(0), c = x.dim(1), plane = x.dim(2) * x.dim(3);
    if (c != params.channels())
        throw Error("batchnorm2d channel mismatch");
    const std::size_t count = n * plane;
    if (train && count < 2)
        throw Error("degenerate batch");

    std::vector<T> mean(c), var(c), inv_std(c);
    for (std::size_t ch = 0; ch < c; ++ch) {
        if (train) {
            T sum = 0;
            for (std::size_t s = 0; s < n; ++s) {
                const T* p = x.raw() + (s * c + ch) * plane;
                for (std::size_t i = 0; i < plane; ++i)
                    sum += p[i];
            }
            const T mu = sum / static_cast<T>(count);
            T sq = 0;
            for (std::size_t s = 0; s < n; ++s) {
                const T* p = x.raw() + (s * c + ch) * plane;
                for (std::size_t i = 0; i < plane; ++i) {
                    const T d = p[i] - mu;
                    sq += d * d;
                }
            }
            mean[ch] = mu;
            var[ch] = sq / static_cast<T>(count);
        } else {
            mean[ch] = params.running_mean[ch];
            var[ch] = params.running_var[ch];
        }
        inv_std[ch] = T{1} / std::sqrt(var[ch] + params.eps);
    }

    Tensor<T> y(x.shape());
    Tensor<T> normalized = cache ? Tensor<T>(x.shape()) : Tensor<T>();
    for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t ch = 0; ch < c; ++ch) {
            const std::size_t base = (s * c + ch) * plane;
            const T mu = mean[ch], is = inv_std[ch];
            const T g = params.gamma[ch], b = params.beta[ch];
            for (std::size_t i = 0; i < plane; ++i) {
                const T xh = (x[base + i] - mu) * is;
                if (cache)
                    normalized[base + i] = xh;
                y[base + i] = g * xh + b;
            }
        }
    }
    if (cache) {
        cache->normalized = std::move(normalized);
        cache->inv_std = inv_std;
        cache->batch_statistics = train;
    }
    if (moments && train) {
        moments->mean = std::move(mean);
        moments->var = std::move(var);
        moments->count = count;
    }
    return y;
}

/// new = (1 - m) * old + m * batch; the variance fed in is the unbiased estimate.
template <typename T>
void update_running_stats(BatchNormParams<T>& params, const BatchMoments<T>& moments)
{
    const T m = params.momentum;
    const T unbias = static_cast<T>(moments.count) / static_cast<T>(moments.count - 1);
    for (std::size_t ch = 0; ch < params.channels(); ++ch) {
        params.running_mean[ch] = (T{1} - m) * params.running_mean[ch] + m * moments.mean[ch];
        params.running_var[ch] = (T{1} - m) * params.running_var[ch] + m * moments.var[ch] * unbias;
    }
}

/// Returns dL/dx and accumulates dL/dgamma, dL/dbeta into `grads`.
template <typename T>
Tensor<T> batchnorm2d_backward(const Tensor<T>& grad_out, const BatchNormParams<T>& params,
                               const BatchNormCache<T>& cache, BatchNormGrads<T>& grads)
{
    const std::size_t n = grad_out.dim(0), c = grad_out.dim(1);
    const std::size_t plane = grad_out.dim(2) * grad_out.dim(3);
    const std::size_t count = n * plane;
    if (cache.normalized.shape() != grad_out.shape())
        throw Error("batchnorm2d_backward cache does not match gradient");
    Tensor<T> dx(grad_out.shape());
    for (std::size_t ch = 0; ch < c; ++ch) {
        T sum_dy = 0, sum_dy_xh = 0;
        for (std::size_t s = 0; s < n; ++s) {
            const std::size_t base = (s * c + ch) * plane;
            for (std::size_t i = 0; i < plane; ++i) {
                sum_dy += grad_out[base + i];
                sum_dy_xh += grad_out[base + i] * cache.normalized[base + i];
            }
        }
        grads.beta[ch] += sum_dy;
        grads.gamma[ch] += sum_dy_xh;
        const T scale = params.gamma[ch] * cache.inv_std[ch];
        if (cache.batch_statistics) {
            const T inv_count = T{1} / static_cast<T>(count);
            const T mean_dy = sum_dy * inv_count, mean_dy_xh = sum_dy_xh * inv_count;
            for (std::size_t s = 0; s < n; ++s) {
                const std::size_t base = (s * c + ch) * plane;
                for (std::size_t i = 0; i < plane; ++i)
                    dx[base + i] = scale * (grad_out[base + i] - mean_dy -
                                            cache.normalized[base + i] * mean_dy_xh);
            }
        } else {
            for (std::size_t s = 0; s < n; ++s) {
                const std::size_t base = (s * c + ch) * plane;
                for (std::size_t i = 0; i < plane; ++i)
                    dx[base + i] = scale * grad_out[base + i];
            }
        }
    }
    return dx;
}

} // namespace bseg::nn

#endif

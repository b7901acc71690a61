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
#ifndef BSEG_NN_ACTIVATION_HPP
#define BSEG_NN_ACTIVATION_HPP

#include "bseg/tensor.hpp"

namespace bseg::nn {

template <typename T>
Tensor<T> relu(const Tensor<T>& x)
{
    Tensor<T> y(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i)
        y[i] = x[i] > T{0} ? x[i] : T{0};
    return y;
}

/// Subgradient at exactly zero is zero. `x` may be the input or the output.
template <typename T>
Tensor<T> relu_backward(const Tensor<T>& x, const Tensor<T>& grad_out)
{
    if (x.shape() != grad_out.shape())
        throw Error("relu_backward shape mismatch");
    Tensor<T> dx(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i)
        dx[i] = x[i] > T{0} ? grad_out[i] : T{0};
    return dx;
}

} // namespace bseg::nn

#endif

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
#ifndef BSEG_TRAIN_SGD_HPP
#define BSEG_TRAIN_SGD_HPP

#include "bseg/tensor.hpp"

namespace bseg::train {

/// v <- momentum * v + g;  w <- w - lr * v
template <typename T>
void sgd_momentum_step(Tensor<T>& params, const Tensor<T>& grads, Tensor<T>& velocity, T lr, T momentum)
{
    if (params.shape() != grads.shape() || params.shape() != velocity.shape())
        throw Error("sgd_momentum_step shape mismatch: params " + shape_string(params.shape()) + ", grads " +
                    shape_string(grads.shape()) + ", velocity " + shape_string(velocity.shape()));
    for (std::size_t i = 0; i < params.size(); ++i) {
        velocity[i] = momentum * velocity[i] + grads[i];
        params[i] -= lr * velocity[i];
    }
}

} // namespace bseg::train

#endif

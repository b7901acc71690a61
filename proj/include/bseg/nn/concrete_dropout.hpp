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
#ifndef BSEG_NN_CONCRETE_DROPOUT_HPP
#define BSEG_NN_CONCRETE_DROPOUT_HPP

#include <cmath>

#include "bseg/nn/conv.hpp"
#include "bseg/rng.hpp"
#include "bseg/tensor.hpp"

namespace bseg::nn {

inline constexpr double kDropoutTemperature = 0.1;
inline constexpr double kInitialDropProbability = 0.1;
inline constexpr double kWeightRegularizerFactor = 1e-6;
inline constexpr double kDropoutRegularizerFactor = 1e-5;

template <typename T>
T sigmoid(T v)
{
    return v >= T{0} ? T{1} / (T{1} + std::exp(-v)) : std::exp(v) / (T{1} + std::exp(v));
}

template <typename T>
T logit(T p)
{
    return std::log(p) - std::log1p(-p);
}

/**
 * Learned drop probability p = sigmoid(p_logit) of one concrete-dropout site.
 * `p_logit` is a shape-[1] tensor so that it can be handled like any other
 * parameter by the optimizer and the checkpoint writer.
 */
template <typename T>
struct ConcreteDropoutState {
    Tensor<T> p_logit{Shape{1}, static_cast<T>(logit(kInitialDropProbability))};
    T temperature = static_cast<T>(kDropoutTemperature);

    static ConcreteDropoutState with_probability(T p, T temperature = static_cast<T>(kDropoutTemperature))
    {
        ConcreteDropoutState s;
        s.p_logit[0] = logit(p);
        s.temperature = temperature;
        return s;
    }

    T p() const { return sigmoid(p_logit[0]); }
};

/**
 * Concrete relaxation of Bernoulli dropout with uniform noise `u`:
 *   z = sigmoid((logit p + log u - log(1-u)) / t),   y = x * (1 - z) / (1 - p).
 * z is the soft drop weight; it is written to `drop_weight` when given.
 */
template <typename T>
Tensor<T> concrete_dropout_with_noise(const Tensor<T>& x, const ConcreteDropoutState<T>& state,
                                      const Tensor<T>& u, Tensor<T>* drop_weight = nullptr)
{
    if (u.shape() != x.shape())
        throw Error("dropout noise shape mismatch");
    if (!(state.temperature > T{0}))
        throw Error("dropout temperature must be positive");
    const T lp = state.p_logit[0];
    const T keep_scale = T{1} / (T{1} - state.p());
    const T inv_t = T{1} / state.temperature;
    Tensor<T> y(x.shape());
    Tensor<T> z = drop_weight ? Tensor<T>(x.shape()) : Tensor<T>();
    for (std::size_t i = 0; i < x.size(); ++i) {
        const T zi = sigmoid((lp + std::log(u[i]) - std::log1p(-u[i])) * inv_t);
        if (drop_weight)
            z[i] = zi;
        y[i] = x[i] * (T{1} - zi) * keep_scale;
    }
    if (drop_weight)
        *drop_weight = std::move(z);
    return y;
}

/// Stochastic in train and mc modes; the exact identity in eval mode.
template <typename T>
Tensor<T> concrete_dropout(const Tensor<T>& x, const ConcreteDropoutState<T>& state,
                           RngStream& rng, Mode mode, Tensor<T>* drop_weight = nullptr)
{
    if (mode == Mode::eval)
        return x;
    const Tensor<T> u = seeded_uniform<T>(rng, x.shape());
    return concrete_dropout_with_noise(x, state, u, drop_weight);
}

/**
 * Backward pass given the saved drop weights z. Returns dL/dx and adds
 * dL/dp_logit to `grad_p_logit`:
 *   dy/dlogit = x * [ -z(1-z)/t + (1-z) p ] / (1-p).
 */
template <typename T>
Tensor<T> concrete_dropout_backward(const Tensor<T>& x, const ConcreteDropoutState<T>& state,
                                    const Tensor<T>& drop_weight, const Tensor<T>& grad_out,
                                    T& grad_p_logit)
{
    if (drop_weight.shape() != x.shape() || grad_out.shape() != x.shape())
        throw Error("concrete_dropout_backward shape mismatch");
    const T p = state.p();
    const T keep_scale = T{1} / (T{1} - p);
    const T inv_t = T{1} / state.temperature;
    Tensor<T> dx(x.shape());
    T acc = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const T z = drop_weight[i];
        dx[i] = grad_out[i] * (T{1} - z) * keep_scale;
        acc += grad_out[i] * x[i] * (-z * (T{1} - z) * inv_t + (T{1} - z) * p);
    }
    grad_p_logit += acc * keep_scale;
    return dx;
}

struct RegularizerFactors {
    double weight = kWeightRegularizerFactor;
    double dropout = kDropoutRegularizerFactor;
};

template <typename T>
struct RegularizerTerm {
    T value = 0;
    Tensor<T> grad_weights;
    T grad_p_logit = 0;
};

/**
 * Concrete-dropout regularizer for the weights W that consume the dropped
 * features (K of them), with a training set of N examples:
 *   (w/N) ||W||^2 / (1-p) + (d/N) K (p log p + (1-p) log(1-p)).
 */
template <typename T>
RegularizerTerm<T> concrete_dropout_regularizer_grad(const ConcreteDropoutState<T>& state,
                                                     const Tensor<T>& weights, std::size_t input_features,
                                                     std::size_t dataset_size,
                                                     RegularizerFactors factors = {})
{
    if (dataset_size < 1 || input_features < 1)
        throw Error("regularizer needs N >= 1 and K >= 1");
    const T p = state.p();
    const T lambda_w = static_cast<T>(factors.weight) / static_cast<T>(dataset_size);
    const T lambda_d = static_cast<T>(factors.dropout) / static_cast<T>(dataset_size);
    const T k = static_cast<T>(input_features);
    T sq = 0;
    for (T v : weights.data())
        sq += v * v;
    const T neg_entropy = p * std::log(p) + (T{1} - p) * std::log1p(-p);
    RegularizerTerm<T> term;
    term.value = lambda_w * sq / (T{1} - p) + lambda_d * k * neg_entropy;
    term.grad_weights = Tensor<T>(weights.shape());
    const T wscale = T{2} * lambda_w / (T{1} - p);
    for (std::size_t i = 0; i < weights.size(); ++i)
        term.grad_weights[i] = wscale * weights[i];
    // dp/dlogit = p(1-p); d/dp of the entropy part is logit(p)
    term.grad_p_logit = lambda_w * sq * p / (T{1} - p) + lambda_d * k * p * (T{1} - p) * state.p_logit[0];
    return term;
}

template <typename T>
T concrete_dropout_regularizer(const ConcreteDropoutState<T>& state, const Tensor<T>& weights,
                               std::size_t input_features, std::size_t dataset_size,
                               RegularizerFactors factors = {})
{
    return concrete_dropout_regularizer_grad(state, weights, input_features, dataset_size, factors).value;
}

} // namespace bseg::nn

#endif

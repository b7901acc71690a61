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
#ifndef BSEG_GRADCHECK_HPP
#define BSEG_GRADCHECK_HPP

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "bseg/tensor.hpp"

namespace bseg {

inline constexpr double kDefaultFiniteDiffStep = 1e-5;

/// |a - b| / max(1, |a|, |b|)
inline double relative_error(double a, double b)
{
    return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

inline double max_relative_error(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size())
        throw Error("gradient length mismatch");
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        worst = std::max(worst, relative_error(a[i], b[i]));
    return worst;
}

namespace detail {

template <typename F>
double central_difference(F& f, Tensor<double>& x, std::size_t i, double h)
{
    const double saved = x[i];
    x[i] = saved + h;
    const double up = f(static_cast<const Tensor<double>&>(x));
    x[i] = saved - h;
    const double down = f(static_cast<const Tensor<double>&>(x));
    x[i] = saved;
    if (!std::isfinite(up) || !std::isfinite(down))
        throw Error("oracle evaluation failed");
    return (up - down) / (2.0 * h);
}

} // namespace detail

/// Central-difference gradient of a scalar function, one coordinate at a time.
template <typename F>
Tensor<double> finite_diff_gradient(F&& f, const Tensor<double>& x,
                                    double h = kDefaultFiniteDiffStep)
{
    if (!(h > 0.0))
        throw Error("finite-difference step must be positive");
    Tensor<double> probe = x;
    Tensor<double> grad(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i)
        grad[i] = detail::central_difference(f, probe, i, h);
    return grad;
}

/// Same as finite_diff_gradient but only at the listed flat coordinates;
/// used where a full sweep would need thousands of network evaluations.
template <typename F>
std::vector<double> finite_diff_gradient_at(F&& f, const Tensor<double>& x,
                                            std::span<const std::size_t> coords,
                                            double h = kDefaultFiniteDiffStep)
{
    if (!(h > 0.0))
        throw Error("finite-difference step must be positive");
    Tensor<double> probe = x;
    std::vector<double> grad;
    grad.reserve(coords.size());
    for (std::size_t i : coords) {
        if (i >= x.size())
            throw Error("gradient coordinate out of range");
        grad.push_back(detail::central_difference(f, probe, i, h));
    }
    return grad;
}

} // namespace bseg

#endif

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
#ifndef BSEG_TENSOR_HPP
#define BSEG_TENSOR_HPP

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <limits>
#include <new>
#include <numeric>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "bseg/error.hpp"

namespace bseg {

using Shape = std::vector<std::size_t>;

inline std::size_t shape_size(const Shape& shape)
{
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                           std::multiplies<>());
}

inline std::string shape_string(const Shape& shape)
{
    std::ostringstream out;
    out << '[';
    for (std::size_t i = 0; i < shape.size(); ++i)
        out << (i ? "," : "") << shape[i];
    out << ']';
    return out.str();
}

/// Allocator that places every buffer on a 64-byte boundary.
template <typename T>
struct AlignedAllocator {
    using value_type = T;
    static constexpr std::align_val_t kAlignment{64};

    AlignedAllocator() noexcept = default;
    template <typename U>
    AlignedAllocator(const AlignedAllocator<U>&) noexcept
    {
    }

    T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), kAlignment)); }
    void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, kAlignment); }

    template <typename U>
    friend bool operator==(const AlignedAllocator&, const AlignedAllocator<U>&) noexcept
    {
        return true;
    }
};

/**
 * Dense row-major N-dimensional array.
 *
 * Every dimension is positive, so `size() == product(shape())` always holds.
 * A rank-0 tensor holds exactly one value; this is also the default state.
 */
template <typename T>
class Tensor {
public:
    using value_type = T;

    Tensor() : data_(1, T{}) {}

    explicit Tensor(Shape shape, T fill = T{})
        : shape_(std::move(shape))
    {
        check_dims(shape_);
        data_.assign(shape_size(shape_), fill);
    }

    Tensor(Shape shape, const std::vector<T>& data)
        : shape_(std::move(shape)), data_(data.begin(), data.end())
    {
        check_dims(shape_);
        if (data_.size() != shape_size(shape_))
            throw Error("tensor data length " + std::to_string(data_.size()) +
                        " does not match shape " + shape_string(shape_));
    }

    static Tensor scalar(T value) { return Tensor(Shape{}, std::vector<T>{value}); }

    const Shape& shape() const noexcept { return shape_; }
    std::size_t rank() const noexcept { return shape_.size(); }
    std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
    std::size_t size() const noexcept { return data_.size(); }

    std::span<T> data() noexcept { return data_; }
    std::span<const T> data() const noexcept { return data_; }
    T* raw() noexcept { return data_.data(); }
    const T* raw() const noexcept { return data_.data(); }

    T& operator[](std::size_t i) { return data_[i]; }
    const T& operator[](std::size_t i) const { return data_[i]; }

    template <typename... Idx>
    T& at(Idx... idx) { return data_[offset({static_cast<std::size_t>(idx)...})]; }
    template <typename... Idx>
    const T& at(Idx... idx) const { return data_[offset({static_cast<std::size_t>(idx)...})]; }

    /// Row-major flat offset of a full multi-index; bounds-checked.
    std::size_t offset(std::initializer_list<std::size_t> idx) const
    {
        if (idx.size() != shape_.size())
            throw Error("index rank mismatch");
        std::size_t off = 0;
        std::size_t axis = 0;
        for (std::size_t i : idx) {
            if (i >= shape_[axis])
                throw Error("index out of range");
            off = off * shape_[axis] + i;
            ++axis;
        }
        return off;
    }

    Tensor reshaped(Shape shape) const
    {
        check_dims(shape);
        if (shape_size(shape) != data_.size())
            throw Error("tensor data length " + std::to_string(data_.size()) +
                        " does not match shape " + shape_string(shape));
        Tensor out;
        out.shape_ = std::move(shape);
        out.data_ = data_;
        return out;
    }

    void fill(T value) { std::fill(data_.begin(), data_.end(), value); }

    template <typename U>
    Tensor<U> cast() const
    {
        Tensor<U> out(shape_);
        std::transform(data_.begin(), data_.end(), out.data().begin(),
                       [](T v) { return static_cast<U>(v); });
        return out;
    }

    friend bool operator==(const Tensor& a, const Tensor& b)
    {
        return a.shape_ == b.shape_ && a.data_ == b.data_;
    }

private:
    static void check_dims(const Shape& shape)
    {
        for (std::size_t d : shape)
            if (d == 0)
                throw Error("tensor dimensions must be positive, got " + shape_string(shape));
    }

    Shape shape_;
    std::vector<T, AlignedAllocator<T>> data_;
};

/// Integer label mask; values 0..11 are classes, 255 is void.
using Mask = Tensor<std::uint8_t>;

inline constexpr std::uint8_t kVoidLabel = 255;

namespace detail {

inline Shape broadcast_shape(const Shape& a, const Shape& b)
{
    const std::size_t rank = std::max(a.size(), b.size());
    Shape out(rank);
    for (std::size_t i = 0; i < rank; ++i) {
        const std::size_t da = i < rank - a.size() ? 1 : a[i - (rank - a.size())];
        const std::size_t db = i < rank - b.size() ? 1 : b[i - (rank - b.size())];
        if (da != db && da != 1 && db != 1)
            throw Error("broadcast mismatch: " + shape_string(a) + " vs " + shape_string(b));
        out[i] = std::max(da, db);
    }
    return out;
}

/// Strides of `shape` viewed inside `target` (right-aligned); broadcast axes get 0.
inline std::vector<std::size_t> broadcast_strides(const Shape& shape, const Shape& target)
{
    std::vector<std::size_t> strides(target.size(), 0);
    std::size_t stride = 1;
    for (std::size_t k = 0; k < shape.size(); ++k) {
        const std::size_t src = shape.size() - 1 - k;
        const std::size_t dst = target.size() - 1 - k;
        strides[dst] = shape[src] == 1 ? 0 : stride;
        stride *= shape[src];
    }
    return strides;
}

} // namespace detail

/// Elementwise binary op with right-aligned broadcasting of size-1 dimensions.
template <typename T, typename Op>
Tensor<T> broadcast_zip(const Tensor<T>& a, const Tensor<T>& b, Op op)
{
    if (a.shape() == b.shape()) {
        Tensor<T> out(a.shape());
        for (std::size_t i = 0; i < a.size(); ++i)
            out[i] = op(a[i], b[i]);
        return out;
    }
    const Shape shape = detail::broadcast_shape(a.shape(), b.shape());
    const auto sa = detail::broadcast_strides(a.shape(), shape);
    const auto sb = detail::broadcast_strides(b.shape(), shape);
    Tensor<T> out(shape);
    std::vector<std::size_t> idx(shape.size(), 0);
    std::size_t oa = 0, ob = 0;
    for (std::size_t flat = 0; flat < out.size(); ++flat) {
        out[flat] = op(a[oa], b[ob]);
        // odometer increment, last axis fastest
        for (std::size_t ax = shape.size(); ax-- > 0;) {
            ++idx[ax];
            oa += sa[ax];
            ob += sb[ax];
            if (idx[ax] < shape[ax])
                break;
            oa -= sa[ax] * idx[ax];
            ob -= sb[ax] * idx[ax];
            idx[ax] = 0;
        }
    }
    return out;
}

enum class ReduceOp { sum, max, mean };

/// Result of a max reduction; `argmax` holds the row-major offset of the
/// winning element within the reduced sub-block (first occurrence on ties).
template <typename T>
struct ArgmaxResult {
    Tensor<T> values;
    Tensor<std::size_t> argmax;
};

namespace detail {

struct ReductionPlan {
    Shape out_shape;
    std::vector<std::size_t> out_of;   // flat input -> flat output
    std::vector<std::size_t> inner_of; // flat input -> offset within reduced block
    std::size_t block = 1;
};

inline ReductionPlan plan_reduction(const Shape& shape, const std::set<std::size_t>& axes)
{
    for (std::size_t ax : axes)
        if (ax >= shape.size())
            throw Error("reduction axis " + std::to_string(ax) + " out of range for " +
                        shape_string(shape));
    ReductionPlan plan;
    Shape kept_dims, red_dims;
    for (std::size_t ax = 0; ax < shape.size(); ++ax) {
        if (axes.count(ax)) {
            red_dims.push_back(shape[ax]);
            plan.block *= shape[ax];
        } else {
            kept_dims.push_back(shape[ax]);
        }
    }
    plan.out_shape = kept_dims;
    const std::size_t n = shape_size(shape);
    plan.out_of.resize(n);
    plan.inner_of.resize(n);
    std::vector<std::size_t> idx(shape.size(), 0);
    for (std::size_t flat = 0; flat < n; ++flat) {
        std::size_t o = 0, r = 0;
        for (std::size_t ax = 0; ax < shape.size(); ++ax) {
            if (axes.count(ax))
                r = r * shape[ax] + idx[ax];
            else
                o = o * shape[ax] + idx[ax];
        }
        plan.out_of[flat] = o;
        plan.inner_of[flat] = r;
        for (std::size_t ax = shape.size(); ax-- > 0;) {
            if (++idx[ax] < shape[ax])
                break;
            idx[ax] = 0;
        }
    }
    return plan;
}

} // namespace detail

template <typename T>
ArgmaxResult<T> reduce_max(const Tensor<T>& x, const std::set<std::size_t>& axes)
{
    const auto plan = detail::plan_reduction(x.shape(), axes);
    Tensor<T> values(plan.out_shape, std::numeric_limits<T>::lowest());
    Tensor<std::size_t> arg(plan.out_shape, 0);
    std::vector<bool> seen(values.size(), false);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const std::size_t o = plan.out_of[i];
        if (!seen[o] || x[i] > values[o]) {
            values[o] = x[i];
            arg[o] = plan.inner_of[i];
            seen[o] = true;
        }
    }
    return {std::move(values), std::move(arg)};
}

template <typename T>
Tensor<T> reduce(const Tensor<T>& x, const std::set<std::size_t>& axes, ReduceOp op)
{
    if (op == ReduceOp::max)
        return reduce_max(x, axes).values;
    const auto plan = detail::plan_reduction(x.shape(), axes);
    Tensor<T> out(plan.out_shape, T{0});
    for (std::size_t i = 0; i < x.size(); ++i)
        out[plan.out_of[i]] += x[i];
    if (op == ReduceOp::mean)
        for (auto& v : out.data())
            v /= static_cast<T>(plan.block);
    return out;
}

template <typename T>
std::set<std::size_t> all_axes(const Tensor<T>& x)
{
    std::set<std::size_t> axes;
    for (std::size_t i = 0; i < x.rank(); ++i)
        axes.insert(i);
    return axes;
}

} // namespace bseg

#endif

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
#ifndef BSEG_DATA_SAMPLE_HPP
#define BSEG_DATA_SAMPLE_HPP

#include <string>

#include "bseg/tensor.hpp"

namespace bseg::data {

/// An RGB image [3,H,W] in [0,1] with its label mask [H,W].
template <typename T>
struct SampleRecord {
    Tensor<T> image;
    Mask mask;
    std::string source_id;

    std::size_t height() const { return mask.dim(0); }
    std::size_t width() const { return mask.dim(1); }
};

template <typename T>
void validate_record(const SampleRecord<T>& s)
{
    if (s.image.rank() != 3 || s.image.dim(0) != 3)
        throw Error(s.source_id + ": image must be [3,H,W]");
    if (s.mask.rank() != 2 || s.mask.dim(0) != s.image.dim(1) || s.mask.dim(1) != s.image.dim(2))
        throw Error(s.source_id + ": mask dims differ from image dims");
    for (std::uint8_t v : s.mask.data())
        if (v > 11 && v != kVoidLabel)
            throw Error(s.source_id + ": mask value " + std::to_string(v) + " is not a class label");
}

template <typename U, typename T>
SampleRecord<U> cast_record(const SampleRecord<T>& s)
{
    return {s.image.template cast<U>(), s.mask, s.source_id};
}

} // namespace bseg::data

#endif

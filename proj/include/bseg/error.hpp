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
#ifndef BSEG_ERROR_HPP
#define BSEG_ERROR_HPP

#include <stdexcept>
#include <string>

namespace bseg {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Training produced a non-finite loss.
class DivergenceError : public Error {
public:
    using Error::Error;
};

/// A file is not a checkpoint, or is truncated.
class CheckpointError : public Error {
public:
    using Error::Error;
};

/// A checkpoint was readable but does not describe this network.
class ArchitectureMismatch : public CheckpointError {
public:
    using CheckpointError::CheckpointError;
};

} // namespace bseg

#endif

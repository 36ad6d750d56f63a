// SPDX-License-Identifier: Apache-2.0
//
// chartkit - channel charting from CSI datasets with triplet-loss networks
// Copyright (C) 2026 The chartkit contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace chartkit {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid argument or violated precondition.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Malformed or unreadable configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Filesystem failure while reading or writing an artifact.
class IoError : public Error {
public:
    using Error::Error;
};

/// Binary artifact (container, feature cache, triplet or weight file) that fails validation.
class LoadError : public Error {
public:
    enum class Kind { BadMagic, VersionMismatch, MalformedHeader, Truncated, NonFinite, ShapeMismatch };

    LoadError(Kind kind, std::uint64_t offset, const std::string& what);

    Kind kind() const noexcept { return kind_; }
    std::uint64_t offset() const noexcept { return offset_; }

private:
    Kind kind_;
    std::uint64_t offset_;
};

const char* to_string(LoadError::Kind kind) noexcept;

/// Triplet generation failed, e.g. an anchor without positive candidates.
class SelectionError : public Error {
public:
    using Error::Error;
};

/// Training produced a non-finite loss.
class DivergenceError : public Error {
public:
    DivergenceError(std::size_t epoch, std::size_t batch);

    std::size_t epoch() const noexcept { return epoch_; }
    std::size_t batch() const noexcept { return batch_; }

private:
    std::size_t epoch_;
    std::size_t batch_;
};

/// Pipeline stage failure; wraps the underlying message with the stage name.
class StageError : public Error {
public:
    StageError(std::string stage, const std::string& what);

    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

} // namespace chartkit

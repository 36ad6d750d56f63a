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

#include "chartkit/error.hpp"

namespace chartkit {

LoadError::LoadError(Kind kind, std::uint64_t offset, const std::string& what)
    : Error(what), kind_(kind), offset_(offset)
{
}

const char* to_string(LoadError::Kind kind) noexcept
{
    switch (kind) {
    case LoadError::Kind::BadMagic: return "bad magic";
    case LoadError::Kind::VersionMismatch: return "version mismatch";
    case LoadError::Kind::MalformedHeader: return "malformed header";
    case LoadError::Kind::Truncated: return "truncated payload";
    case LoadError::Kind::NonFinite: return "non-finite value";
    case LoadError::Kind::ShapeMismatch: return "shape mismatch";
    }
    return "unknown";
}

DivergenceError::DivergenceError(std::size_t epoch, std::size_t batch)
    : Error("non-finite loss at epoch " + std::to_string(epoch) + ", batch " + std::to_string(batch)),
      epoch_(epoch), batch_(batch)
{
}

StageError::StageError(std::string stage, const std::string& what)
    : Error("[" + stage + "] " + what), stage_(std::move(stage))
{
}

} // namespace chartkit

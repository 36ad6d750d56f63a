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

// JSON (de)serialisation of the configuration structs, shared by the pipeline
// and the CLI.

#pragma once

#include "json_util.hpp"

#include "chartkit/dataset.hpp"

namespace chartkit::detail {

SynthConfig synth_config_from_json(const Json& j);
Json to_json(const SynthConfig& config);

} // namespace chartkit::detail

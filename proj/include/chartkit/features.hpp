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

#include "chartkit/dataset.hpp"

#include <Eigen/Core>

#include <filesystem>

namespace chartkit {

struct FeatureConfig {
    double sigma = 8.0; // estimated path-loss exponent
};

using FeatureVector = Eigen::VectorXd;
// One feature vector per row, f32 to match the on-disk cache.
using FeatureMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// h * ||h||^(2/sigma - 1). Zero stays zero.
CsiVector scale_csi(const CsiVector& h, double sigma);

/// Real part of vec(hs hs^H) with hs = scale_csi(h, sigma); length B^2, row-major.
FeatureVector scaled_r2m(const CsiVector& h, const FeatureConfig& config);

FeatureMatrix featurize_dataset(const ReducedDataset& reduced, const FeatureConfig& config);

void save_feature_cache(const FeatureMatrix& features, const std::filesystem::path& path);
FeatureMatrix load_feature_cache(const std::filesystem::path& path);

} // namespace chartkit

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

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <span>
#include <string>

namespace chartkit {

using RankMatrix = Eigen::Matrix<std::int32_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Entry (i, j): rank of point j by Euclidean distance from point i, nearest
/// other point = 1, ties broken by ascending index. The diagonal is 0.
RankMatrix rank_matrix(const Eigen::MatrixXd& points);

/// Row i of rank_matrix without materialising the rest. `out` has N entries.
void rank_row(const Eigen::MatrixXd& points, Eigen::Index i, std::span<std::int32_t> out);

/// floor(0.05 * n), at least 1.
std::size_t default_neighbourhood(std::size_t n);

struct NeighbourhoodScores {
    double trustworthiness = 0.0;
    double continuity = 0.0;
};

/// Both rank scores in one pass over the point set. Requires 1 <= k <= n/2 and 3k < 2n - 1.
NeighbourhoodScores neighbourhood_scores(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& chart, std::size_t k);

/// Penalises chart neighbours that are not true neighbours.
double trustworthiness(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& chart, std::size_t k);

/// Penalises true neighbours that are not chart neighbours.
double continuity(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& chart, std::size_t k);

enum class StressNormalization {
    GroundTruth, // divide by sum of squared true distances
    Scaled,      // divide by sum of squared rescaled chart distances
};

/// Kruskal stress after least-squares scaling of the chart distances; 1 for a
/// chart whose points all coincide.
double kruskal_stress(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& chart,
                      StressNormalization normalization = StressNormalization::GroundTruth);

struct EvaluateOptions {
    std::optional<std::size_t> k;         // neighbourhood override
    std::optional<std::size_t> subsample; // evaluate a seeded uniform subset of this size
    std::uint64_t seed = 0;
    StressNormalization normalization = StressNormalization::GroundTruth;
};

struct MetricsReport {
    double ct = 0.0;
    double tw = 0.0;
    double ks = 0.0;
    std::size_t k_used = 0;
    std::size_t n_used = 0;
    std::uint64_t seed = 0;
};

MetricsReport evaluate(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& chart, const EvaluateOptions& options = {});

/// JSON document with keys ct, tw, ks, k_used, n_used, seed.
std::string to_text(const MetricsReport& report);
MetricsReport metrics_from_text(const std::string& text);

} // namespace chartkit

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

#include "chartkit/features.hpp"
#include "chartkit/mlp.hpp"
#include "chartkit/triplets.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace chartkit {

struct NetworkConfig {
    std::size_t input_dim = 0;
    std::vector<std::size_t> hidden = {512, 256, 128, 64};
    std::size_t output_dim = 2;
    std::uint64_t init_seed = 0;

    bool operator==(const NetworkConfig& o) const
    {
        return input_dim == o.input_dim && hidden == o.hidden && output_dim == o.output_dim;
    }
};

/// Forward charting function: standardise the feature, then apply the MLP.
struct ChartingNetwork {
    NetworkConfig config;
    Mlp<float> mlp;
    Eigen::VectorXf mean;  // per-dimension training-set mean
    Eigen::VectorXf scale; // per-dimension training-set standard deviation (1 where constant)
};

struct TrainConfig {
    double margin = 1.0;
    double learning_rate = 1e-3;
    std::size_t batch_size = 512;
    std::size_t epochs = 10;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_epsilon = 1e-8;
    std::uint64_t seed = 0;
};

struct TrainResult {
    ChartingNetwork net;
    std::vector<double> epoch_loss; // mean triplet loss per epoch
};

using EpochCallback = std::function<void(std::size_t epoch, double mean_loss)>;

/// Fan-in scaled uniform initialisation, identity standardisation.
ChartingNetwork init_network(const NetworkConfig& config);

/// Standardisation statistics of `features` (population standard deviation).
void fit_normalization(ChartingNetwork& net, const FeatureMatrix& features);

Eigen::Vector2d forward(const ChartingNetwork& net, const FeatureVector& feature);

/// Chart points for every row of `features`; N x 2.
Eigen::MatrixXd forward_all(const ChartingNetwork& net, const FeatureMatrix& features);

double triplet_loss(const Eigen::Vector2d& z_anchor, const Eigen::Vector2d& z_positive,
                    const Eigen::Vector2d& z_negative, double margin);

/// Mini-batch Adam over the triplet list, one shuffled pass per epoch.
/// Throws DivergenceError on a non-finite batch loss.
TrainResult train(const FeatureMatrix& features, const TripletSet& triplets, const NetworkConfig& net_config,
                  const TrainConfig& train_config, const EpochCallback& on_epoch = {});

/// Worst per-parameter relative error between backpropagated and central
/// finite-difference gradients of the mean batch loss, computed in extended
/// precision.
/// Relative error is |a - n| / max(|a|, |n|, 1e-3 * max|a|).
double gradient_check(const ChartingNetwork& net, const FeatureMatrix& features, std::span<const Triplet> batch,
                      double epsilon, double margin = 1.0);

/// Smallest distance of the batch to a non-differentiable point: hidden
/// pre-activations at 0, the loss hinge, or coincident chart points.
double kink_distance(const ChartingNetwork& net, const FeatureMatrix& features, std::span<const Triplet> batch,
                     double margin = 1.0);

/// Exact bytes of the weights file.
std::string serialize_weights(const ChartingNetwork& net);
void save_weights(const ChartingNetwork& net, const std::filesystem::path& path);
ChartingNetwork load_weights(const std::filesystem::path& path);
/// As load_weights, but throws LoadError(ShapeMismatch) unless the layer shapes match `expected`.
ChartingNetwork load_weights(const std::filesystem::path& path, const NetworkConfig& expected);

} // namespace chartkit

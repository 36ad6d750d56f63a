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

#include <complex>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace chartkit {

using CsiMatrix = Eigen::Matrix<std::complex<float>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using CsiVector = Eigen::VectorXcd;
using Position = Eigen::VectorXd;

// One measurement: B x W channel coefficients, D-dimensional position in meters,
// timestamp in seconds since the dataset epoch.
struct CsiDatapoint {
    CsiMatrix csi;
    Position position;
    double timestamp = 0.0;
};

struct Dataset {
    std::string name;
    std::vector<CsiDatapoint> datapoints;
    std::uint32_t antenna_count = 0;    // B
    std::uint32_t subcarrier_count = 0; // W
    std::uint32_t position_dim = 0;     // D, 2 or 3

    std::size_t size() const noexcept { return datapoints.size(); }
};

// Datapoint after averaging a subcarrier window: one complex coefficient per antenna.
struct ReducedDatapoint {
    CsiVector h;
    Position position;
    double timestamp = 0.0;
};

struct ReducedDataset {
    std::string name;
    std::vector<ReducedDatapoint> datapoints;
    std::uint32_t antenna_count = 0;
    std::uint32_t position_dim = 0;

    std::size_t size() const noexcept { return datapoints.size(); }
};

/// Throws InvalidArgument when a Dataset invariant does not hold.
void validate(const Dataset& dataset);

/// N x D matrix of ground-truth positions.
Eigen::MatrixXd positions(const Dataset& dataset);
Eigen::MatrixXd positions(const ReducedDataset& dataset);

std::vector<double> timestamps(const Dataset& dataset);

// -- CCDS container ---------------------------------------------------------

inline constexpr std::uint32_t kContainerVersion = 1;

struct ContainerShape {
    std::uint64_t n = 0;
    std::uint32_t antenna_count = 0;
    std::uint32_t subcarrier_count = 0;
    std::uint32_t position_dim = 0;
};

/// Header fields of a CCDS container; the payload is not read.
ContainerShape read_container_shape(const std::filesystem::path& path);

/// Reads a CCDS container; the result is stably sorted by timestamp.
/// Throws LoadError (with byte offset) on malformed input.
Dataset load_container(const std::filesystem::path& path);

/// Streams a CCDS container and averages subcarriers [w_start, w_start + w_count)
/// while reading, so the full B x W matrices are never held in memory.
ReducedDataset load_container_reduced(const std::filesystem::path& path, std::uint32_t w_start,
                                      std::uint32_t w_count);

void save_container(const Dataset& dataset, const std::filesystem::path& path);

// -- subcarrier reduction ---------------------------------------------------

/// h[b] = mean of csi[b, w_start .. w_start + w_count - 1].
ReducedDataset subcarrier_average(const Dataset& dataset, std::uint32_t w_start, std::uint32_t w_count);

/// The 8-subcarrier window centred in a band of `subcarrier_count` (508..515 for 1024).
std::uint32_t centre_window_start(std::uint32_t subcarrier_count, std::uint32_t w_count);

// -- synthetic line-of-sight data -------------------------------------------

enum class TrajectoryStyle { Meander, RandomWaypoint };

struct SynthConfig {
    std::string name = "synthetic";
    std::size_t n = 2000;
    std::uint32_t antenna_count = 16;
    std::uint32_t subcarrier_count = 8;
    std::uint32_t position_dim = 2;
    Eigen::VectorXd area_min = Eigen::Vector2d(0.0, 0.0);
    Eigen::VectorXd area_max = Eigen::Vector2d(10.0, 10.0);
    // B x D; empty places the antennas evenly on a ring around the area.
    Eigen::MatrixXd antenna_positions;
    double antenna_ring_margin = 2.0; // meters beyond the area when placed automatically
    double carrier_hz = 1.272e9;
    double subcarrier_spacing_hz = 50e6 / 1024.0;
    double path_loss_exponent = 2.0;
    TrajectoryStyle trajectory = TrajectoryStyle::Meander;
    double speed = 1.0;           // m/s
    double sample_interval = 0.0; // s between datapoints; 0 spreads n points over one meander pass
    double lane_spacing = 0.5;    // meander lane pitch, m
    double jitter = 0.02;         // gaussian position noise, m
    std::uint64_t seed = 1;
};

/// Antenna positions actually used for `config` (explicit or the default ring).
Eigen::MatrixXd antenna_layout(const SynthConfig& config);

/// Free-space LoS channel along a seeded trajectory:
/// csi(b, w) = d_b^(-pl/2) * exp(-j 2 pi f_w d_b / c).
Dataset synthesize_los_dataset(const SynthConfig& config);

SynthConfig load_synth_config(const std::filesystem::path& path);
SynthConfig synth_config_from_json_text(const std::string& text);

} // namespace chartkit

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

#include <compare>
#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <variant>
#include <vector>

namespace chartkit {

struct Triplet {
    std::size_t anchor = 0;
    std::size_t positive = 0;
    std::size_t negative = 0;

    friend auto operator<=>(const Triplet&, const Triplet&) = default;
};

// Positive within t_c seconds of the anchor; negative anywhere.
struct TimeSelectionConfig {
    double t_c = 1.5;
    std::size_t count = 1'200'000;
    std::uint64_t seed = 0;
};

// Positive within d_c meters of the anchor (ground-truth positions); negative anywhere.
struct GenieSelectionConfig {
    double d_c = 1.5;
    std::size_t count = 1'200'000;
    std::uint64_t seed = 0;
};

struct SimTrajectoryConfig {
    std::size_t r = 30'000;  // number of straight-line trajectories
    double speed = 1.0;      // m/s
    double corridor = 0.25;  // max perpendicular distance of a member, m
    std::uint64_t seed = 0;
};

// Positive within t_c pseudo-seconds on the anchor's trajectory; negative on another trajectory.
struct SimTripletConfig {
    double t_c = 1.5;
    std::size_t count = 1'200'000;
    std::uint64_t seed = 0;
};

struct TripletSet {
    std::vector<Triplet> items;
    // Generating rule; monostate when read back from a file.
    std::variant<std::monostate, TimeSelectionConfig, GenieSelectionConfig, SimTripletConfig> rule;

    std::size_t size() const noexcept { return items.size(); }
};

struct TrajectoryMember {
    std::size_t index = 0;
    double t = 0.0; // projected arclength / speed
};

struct SimTrajectory {
    Eigen::Vector2d start = Eigen::Vector2d::Zero();
    Eigen::Vector2d end = Eigen::Vector2d::Zero();
    double speed = 1.0;
    std::vector<TrajectoryMember> members; // sorted by t, then index
};

struct SimTripletSelection {
    TripletSet triplets;
    // Per triplet: (trajectory of anchor and positive, trajectory of negative).
    std::vector<std::pair<std::uint32_t, std::uint32_t>> sources;
};

/// `timestamps` must be nondecreasing.
TripletSet select_time_based(std::span<const double> timestamps, const TimeSelectionConfig& config);
TripletSet select_time_based(const Dataset& dataset, const TimeSelectionConfig& config);

/// `positions` is N x D.
TripletSet select_genie(const Eigen::MatrixXd& positions, const GenieSelectionConfig& config);
TripletSet select_genie(const Dataset& dataset, const GenieSelectionConfig& config);

/// Straight segments with endpoints uniform in the bounding box of the first two
/// position coordinates. Segments with fewer than two members are redrawn.
std::vector<SimTrajectory> simulate_trajectories(const Eigen::MatrixXd& positions, const SimTrajectoryConfig& config);
std::vector<SimTrajectory> simulate_trajectories(const Dataset& dataset, const SimTrajectoryConfig& config);

/// Members of one segment, as used by simulate_trajectories.
std::vector<TrajectoryMember> trajectory_members(const Eigen::MatrixXd& positions, const Eigen::Vector2d& start,
                                                 const Eigen::Vector2d& end, double speed, double corridor);

SimTripletSelection select_sim_trajectory_triplets(std::span<const SimTrajectory> trajectories,
                                                   const SimTripletConfig& config);

/// Fraction of triplets with ||x_a - x_p|| > ||x_a - x_n||.
double violation_rate(const TripletSet& triplets, const Eigen::MatrixXd& positions);
double violation_rate(const TripletSet& triplets, const Dataset& dataset);

void save_triplets(const TripletSet& triplets, const std::filesystem::path& path);
TripletSet load_triplets(const std::filesystem::path& path);

} // namespace chartkit

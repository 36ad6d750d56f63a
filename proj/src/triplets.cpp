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

#include "chartkit/triplets.hpp"

#include "binary_io.hpp"

#include "chartkit/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

namespace chartkit {

namespace {

constexpr std::uint32_t kTripletFileVersion = 1;

std::size_t uniform_index(std::mt19937_64& rng, std::size_t n)
{
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

// Uniform over [0, n) without `skip`; n must be at least 2.
std::size_t uniform_index_except(std::mt19937_64& rng, std::size_t n, std::size_t skip)
{
    const auto k = uniform_index(rng, n - 1);
    return k >= skip ? k + 1 : k;
}

void check_count(std::size_t count)
{
    if (count == 0) throw InvalidArgument("triplet count must be at least 1");
}

// Compressed neighbour lists: neighbours of i are ids[offsets[i] .. offsets[i+1]).
struct NeighbourLists {
    std::vector<std::size_t> offsets;
    std::vector<std::uint32_t> ids;
};

// All j != i with ||x_j - x_i|| <= radius, found by bucketing into a grid of
// cell size `radius`. Lists are sorted by index.
NeighbourLists radius_neighbours(const Eigen::MatrixXd& x, double radius)
{
    const auto n = static_cast<std::size_t>(x.rows());
    // Bucketing uses at most three coordinates; the distance test uses all of them.
    const auto dim = std::min(static_cast<int>(x.cols()), 3);
    const Eigen::RowVectorXd lo = x.colwise().minCoeff();
    using Cell = std::array<std::int64_t, 3>;
    std::vector<Cell> cell(n, Cell{0, 0, 0});
    for (std::size_t i = 0; i < n; ++i)
        for (int k = 0; k < dim; ++k)
            cell[i][static_cast<std::size_t>(k)] =
                static_cast<std::int64_t>(std::floor((x(static_cast<Eigen::Index>(i), k) - lo[k]) / radius));
    std::vector<std::uint32_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<std::uint32_t>(i);
    std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) { return cell[a] < cell[b]; });
    std::vector<Cell> sorted_cells(n);
    for (std::size_t i = 0; i < n; ++i) sorted_cells[i] = cell[order[i]];

    NeighbourLists out;
    out.offsets.reserve(n + 1);
    out.offsets.push_back(0);
    std::vector<std::uint32_t> found;
    for (std::size_t i = 0; i < n; ++i) {
        found.clear();
        const auto xi = x.row(static_cast<Eigen::Index>(i));
        const int span_z = dim == 3 ? 1 : 0;
        const int span_y = dim >= 2 ? 1 : 0;
        for (int dx = -1; dx <= 1; ++dx)
            for (int dy = -span_y; dy <= span_y; ++dy)
                for (int dz = -span_z; dz <= span_z; ++dz) {
                    const Cell c{cell[i][0] + dx, cell[i][1] + dy, cell[i][2] + dz};
                    const auto [first, last] = std::equal_range(sorted_cells.begin(), sorted_cells.end(), c);
                    for (auto it = first; it != last; ++it) {
                        const auto j = order[static_cast<std::size_t>(it - sorted_cells.begin())];
                        if (j == i) continue;
                        if ((x.row(j) - xi).norm() <= radius) found.push_back(j);
                    }
                }
        std::sort(found.begin(), found.end());
        out.ids.insert(out.ids.end(), found.begin(), found.end());
        out.offsets.push_back(out.ids.size());
    }
    return out;
}

} // namespace

TripletSet select_time_based(std::span<const double> timestamps, const TimeSelectionConfig& config)
{
    check_count(config.count);
    if (!(config.t_c > 0.0)) throw InvalidArgument("t_c must be positive");
    if (!std::is_sorted(timestamps.begin(), timestamps.end()))
        throw InvalidArgument("timestamps must be sorted for time-based selection");
    const std::size_t n = timestamps.size();
    if (n < 2) throw SelectionError("time-based selection needs at least two datapoints");

    // Positive candidates of anchor a are the contiguous range [lo[a], hi[a]) minus a.
    std::vector<std::size_t> lo(n), hi(n);
    for (std::size_t a = 0; a < n; ++a) {
        const double ta = timestamps[a];
        lo[a] = static_cast<std::size_t>(
            std::partition_point(timestamps.begin(), timestamps.begin() + static_cast<std::ptrdiff_t>(a),
                                 [&](double t) { return !(std::abs(t - ta) <= config.t_c); }) -
            timestamps.begin());
        hi[a] = static_cast<std::size_t>(
            std::partition_point(timestamps.begin() + static_cast<std::ptrdiff_t>(a), timestamps.end(),
                                 [&](double t) { return std::abs(t - ta) <= config.t_c; }) -
            timestamps.begin());
        if (hi[a] - lo[a] < 2)
            throw SelectionError("anchor " + std::to_string(a) + " has no other datapoint within t_c");
    }

    std::mt19937_64 rng(config.seed);
    TripletSet out;
    out.rule = config;
    out.items.reserve(config.count);
    for (std::size_t k = 0; k < config.count; ++k) {
        Triplet t;
        t.anchor = uniform_index(rng, n);
        t.positive = lo[t.anchor] + uniform_index_except(rng, hi[t.anchor] - lo[t.anchor], t.anchor - lo[t.anchor]);
        t.negative = uniform_index_except(rng, n, t.anchor);
        out.items.push_back(t);
    }
    return out;
}

TripletSet select_time_based(const Dataset& dataset, const TimeSelectionConfig& config)
{
    const auto t = timestamps(dataset);
    return select_time_based(std::span<const double>(t), config);
}

TripletSet select_genie(const Eigen::MatrixXd& positions, const GenieSelectionConfig& config)
{
    check_count(config.count);
    if (!(config.d_c > 0.0)) throw InvalidArgument("d_c must be positive");
    const auto n = static_cast<std::size_t>(positions.rows());
    if (n < 2) throw SelectionError("genie selection needs at least two datapoints");
    const auto nb = radius_neighbours(positions, config.d_c);
    for (std::size_t i = 0; i < n; ++i)
        if (nb.offsets[i + 1] == nb.offsets[i])
            throw SelectionError("datapoint " + std::to_string(i) + " has no neighbour within d_c");

    std::mt19937_64 rng(config.seed);
    TripletSet out;
    out.rule = config;
    out.items.reserve(config.count);
    for (std::size_t k = 0; k < config.count; ++k) {
        Triplet t;
        t.anchor = uniform_index(rng, n);
        const auto first = nb.offsets[t.anchor];
        t.positive = nb.ids[first + uniform_index(rng, nb.offsets[t.anchor + 1] - first)];
        t.negative = uniform_index_except(rng, n, t.anchor);
        out.items.push_back(t);
    }
    return out;
}

TripletSet select_genie(const Dataset& dataset, const GenieSelectionConfig& config)
{
    return select_genie(positions(dataset), config);
}

std::vector<TrajectoryMember> trajectory_members(const Eigen::MatrixXd& positions, const Eigen::Vector2d& start,
                                                 const Eigen::Vector2d& end, double speed, double corridor)
{
    std::vector<TrajectoryMember> members;
    const double length = (end - start).norm();
    if (length == 0.0) return members;
    const Eigen::Vector2d dir = (end - start) / length;
    for (Eigen::Index i = 0; i < positions.rows(); ++i) {
        const Eigen::Vector2d rel(positions(i, 0) - start[0], positions(i, 1) - start[1]);
        const double along = rel.dot(dir);
        if (along < 0.0 || along > length) continue;
        const double across = std::abs(rel[0] * dir[1] - rel[1] * dir[0]);
        if (across <= corridor) members.push_back({static_cast<std::size_t>(i), along / speed});
    }
    std::sort(members.begin(), members.end(), [](const TrajectoryMember& a, const TrajectoryMember& b) {
        return a.t < b.t || (a.t == b.t && a.index < b.index);
    });
    return members;
}

std::vector<SimTrajectory> simulate_trajectories(const Eigen::MatrixXd& positions, const SimTrajectoryConfig& config)
{
    if (config.r == 0) throw InvalidArgument("need at least one trajectory");
    if (!(config.speed > 0.0)) throw InvalidArgument("trajectory speed must be positive");
    if (!(config.corridor >= 0.0)) throw InvalidArgument("corridor width must be nonnegative");
    if (positions.cols() < 2) throw InvalidArgument("trajectory simulation needs at least two position coordinates");
    if (positions.rows() < 2) throw SelectionError("trajectory simulation needs at least two datapoints");

    const Eigen::Vector2d lo = positions.leftCols<2>().colwise().minCoeff().transpose();
    const Eigen::Vector2d hi = positions.leftCols<2>().colwise().maxCoeff().transpose();
    std::uniform_real_distribution<double> ux(lo[0], std::nextafter(hi[0], INFINITY));
    std::uniform_real_distribution<double> uy(lo[1], std::nextafter(hi[1], INFINITY));
    std::mt19937_64 rng(config.seed);

    const std::size_t budget = 100 * config.r + 1000;
    std::vector<SimTrajectory> out;
    out.reserve(config.r);
    std::size_t attempts = 0;
    while (out.size() < config.r) {
        if (attempts++ >= budget)
            throw SelectionError("found only " + std::to_string(out.size()) + " of " + std::to_string(config.r) +
                                 " trajectories with two or more members after " + std::to_string(budget) +
                                 " attempts");
        SimTrajectory traj;
        traj.start = Eigen::Vector2d(ux(rng), uy(rng));
        traj.end = Eigen::Vector2d(ux(rng), uy(rng));
        traj.speed = config.speed;
        traj.members = trajectory_members(positions, traj.start, traj.end, config.speed, config.corridor);
        if (traj.members.size() >= 2) out.push_back(std::move(traj));
    }
    return out;
}

std::vector<SimTrajectory> simulate_trajectories(const Dataset& dataset, const SimTrajectoryConfig& config)
{
    return simulate_trajectories(positions(dataset), config);
}

SimTripletSelection select_sim_trajectory_triplets(std::span<const SimTrajectory> trajectories,
                                                   const SimTripletConfig& config)
{
    check_count(config.count);
    if (!(config.t_c > 0.0)) throw InvalidArgument("t_c must be positive");
    if (trajectories.size() < 2)
        throw SelectionError("simulated-trajectory selection needs at least two trajectories");
    for (std::size_t k = 0; k < trajectories.size(); ++k)
        if (trajectories[k].members.size() < 2)
            throw SelectionError("trajectory " + std::to_string(k) + " has fewer than two members");

    constexpr int kRetries = 1000;
    std::mt19937_64 rng(config.seed);
    SimTripletSelection out;
    out.triplets.rule = config;
    out.triplets.items.reserve(config.count);
    out.sources.reserve(config.count);
    const std::size_t r = trajectories.size();
    for (std::size_t k = 0; k < config.count; ++k) {
        Triplet t;
        std::size_t home = 0;
        bool found = false;
        for (int attempt = 0; attempt < kRetries && !found; ++attempt) {
            home = uniform_index(rng, r);
            const auto& m = trajectories[home].members;
            const auto a = uniform_index(rng, m.size());
            const double ta = m[a].t;
            const auto lo = static_cast<std::size_t>(
                std::partition_point(m.begin(), m.begin() + static_cast<std::ptrdiff_t>(a),
                                     [&](const TrajectoryMember& x) { return !(std::abs(x.t - ta) <= config.t_c); }) -
                m.begin());
            const auto hi = static_cast<std::size_t>(
                std::partition_point(m.begin() + static_cast<std::ptrdiff_t>(a), m.end(),
                                     [&](const TrajectoryMember& x) { return std::abs(x.t - ta) <= config.t_c; }) -
                m.begin());
            if (hi - lo < 2) continue;
            t.anchor = m[a].index;
            t.positive = m[lo + uniform_index_except(rng, hi - lo, a - lo)].index;
            found = true;
        }
        if (!found)
            throw SelectionError("no anchor with a positive candidate within t_c after " + std::to_string(kRetries) +
                                 " draws (triplet " + std::to_string(k) + ")");
        std::size_t away = 0;
        found = false;
        for (int attempt = 0; attempt < kRetries && !found; ++attempt) {
            away = uniform_index_except(rng, r, home);
            const auto& m = trajectories[away].members;
            t.negative = m[uniform_index(rng, m.size())].index;
            found = t.negative != t.anchor;
        }
        if (!found)
            throw SelectionError("no negative distinct from anchor " + std::to_string(t.anchor) + " after " +
                                 std::to_string(kRetries) + " draws");
        out.triplets.items.push_back(t);
        out.sources.emplace_back(static_cast<std::uint32_t>(home), static_cast<std::uint32_t>(away));
    }
    return out;
}

double violation_rate(const TripletSet& triplets, const Eigen::MatrixXd& positions)
{
    if (triplets.items.empty()) return 0.0;
    const auto n = static_cast<std::size_t>(positions.rows());
    std::size_t violations = 0;
    for (const auto& t : triplets.items) {
        if (t.anchor >= n || t.positive >= n || t.negative >= n)
            throw InvalidArgument("triplet index out of range");
        const auto xa = positions.row(static_cast<Eigen::Index>(t.anchor));
        const double dp = (xa - positions.row(static_cast<Eigen::Index>(t.positive))).norm();
        const double dn = (xa - positions.row(static_cast<Eigen::Index>(t.negative))).norm();
        if (dp > dn) ++violations;
    }
    return static_cast<double>(violations) / static_cast<double>(triplets.size());
}

double violation_rate(const TripletSet& triplets, const Dataset& dataset)
{
    return violation_rate(triplets, positions(dataset));
}

void save_triplets(const TripletSet& triplets, const std::filesystem::path& path)
{
    detail::write_binary_file(path, [&](detail::BinaryWriter& out) {
    out.magic("CCTS");
    out.write(kTripletFileVersion);
    out.write(static_cast<std::uint64_t>(triplets.size()));
    for (const auto& t : triplets.items) {
        out.write(static_cast<std::uint64_t>(t.anchor));
        out.write(static_cast<std::uint64_t>(t.positive));
        out.write(static_cast<std::uint64_t>(t.negative));
    }
    });
}

TripletSet load_triplets(const std::filesystem::path& path)
{
    detail::BinaryReader in(path);
    in.expect_magic("CCTS");
    in.expect_version(kTripletFileVersion);
    const auto count = in.read<std::uint64_t>("triplet count");
    if (in.remaining() != count * 24)
        in.fail(in.remaining() < count * 24 ? LoadError::Kind::Truncated : LoadError::Kind::MalformedHeader,
                in.offset(), "payload size does not match triplet count");
    TripletSet out;
    std::vector<std::uint64_t> raw(count * 3);
    in.read_span(std::span<std::uint64_t>(raw), "triplets");
    out.items.resize(count);
    for (std::size_t k = 0; k < count; ++k)
        out.items[k] = {static_cast<std::size_t>(raw[3 * k]), static_cast<std::size_t>(raw[3 * k + 1]),
                        static_cast<std::size_t>(raw[3 * k + 2])};
    return out;
}

} // namespace chartkit

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
#include "chartkit/triplets.hpp"

#include "doctest.h"
#include "oracles.hpp"
#include "test_util.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>

using namespace chartkit;

namespace {

Eigen::MatrixXd grid(int side, double pitch)
{
    Eigen::MatrixXd p(side * side, 2);
    for (int i = 0; i < side; ++i)
        for (int j = 0; j < side; ++j) p.row(i * side + j) << i * pitch, j * pitch;
    return p;
}

// Chi-square statistic of observed counts against a uniform law.
double chi_square(const std::vector<std::size_t>& counts)
{
    const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
    const double expected = total / static_cast<double>(counts.size());
    double s = 0;
    for (auto c : counts) s += (static_cast<double>(c) - expected) * (static_cast<double>(c) - expected) / expected;
    return s;
}

} // namespace

TEST_CASE("time rule on three equally spaced points")
{
    const std::vector<double> t = {0.0, 1.0, 2.0};
    const auto set = select_time_based(t, TimeSelectionConfig{1.0, 30000, 4});
    std::size_t middle = 0, first = 0;
    for (const auto& tr : set.items) {
        CHECK(tr.positive != tr.anchor);
        CHECK(std::abs(t[tr.positive] - t[tr.anchor]) <= 1.0);
        CHECK(tr.negative != tr.anchor);
        if (tr.anchor == 1) {
            ++middle;
            first += tr.positive == 0;
            CHECK(tr.positive != 1);
        }
        if (tr.anchor == 0) CHECK(tr.positive == 1);
    }
    REQUIRE(middle > 5000);
    CHECK(static_cast<double>(first) / static_cast<double>(middle) == doctest::Approx(0.5).epsilon(0.04));
}

TEST_CASE("time rule with a wide window is unrestricted")
{
    const std::vector<double> t = {0.0, 0.5, 1.0, 2.0, 4.0};
    const auto set = select_time_based(t, TimeSelectionConfig{100.0, 50000, 5});
    std::vector<std::size_t> counts(5, 0);
    std::size_t from0 = 0;
    for (const auto& tr : set.items)
        if (tr.anchor == 0) {
            ++counts[tr.positive];
            ++from0;
        }
    CHECK(counts[0] == 0);
    counts.erase(counts.begin());
    CHECK(chi_square(counts) < 11.34); // 3 degrees of freedom, 1%
    CHECK(from0 > 0);
}

TEST_CASE("time rule errors")
{
    const std::vector<double> t = {0.0, 0.5, 10.0};
    try {
        (void)select_time_based(t, TimeSelectionConfig{1.0, 10, 1});
        FAIL("expected an error");
    } catch (const SelectionError& e) {
        CHECK(std::string(e.what()).find('2') != std::string::npos);
    }
    const std::vector<double> unsorted = {1.0, 0.0};
    CHECK_THROWS_AS((void)select_time_based(unsorted, TimeSelectionConfig{5.0, 10, 1}), InvalidArgument);
}

TEST_CASE("genie rule with two points")
{
    Eigen::MatrixXd p(2, 2);
    p << 0, 0, 1, 0;
    const auto set = select_genie(p, GenieSelectionConfig{1.5, 1000, 1});
    for (const auto& tr : set.items) {
        CHECK(tr.positive == 1 - tr.anchor);
        CHECK(tr.negative == 1 - tr.anchor);
    }
}

TEST_CASE("genie rule on a grid picks 4-neighbours")
{
    const auto p = grid(10, 0.5);
    const auto set = select_genie(p, GenieSelectionConfig{0.5, 20000, 2});
    std::map<std::size_t, std::set<std::size_t>> seen;
    for (const auto& tr : set.items) {
        const auto ai = static_cast<int>(tr.anchor), pi = static_cast<int>(tr.positive);
        const int manhattan = std::abs(ai / 10 - pi / 10) + std::abs(ai % 10 - pi % 10);
        CHECK(manhattan == 1);
        seen[tr.anchor].insert(tr.positive);
    }
    // Corner anchors have exactly two neighbours.
    for (std::size_t corner : {0u, 9u, 90u, 99u})
        if (seen.count(corner)) CHECK(seen[corner].size() <= 2);
}

TEST_CASE("genie rule replays exactly against a brute-force ball")
{
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 10; ++trial) {
        const auto dim = std::uniform_int_distribution<Eigen::Index>(2, 3)(rng);
        const auto p = oracle::random_points(rng, 300, dim, 4.0);
        const double dc = 1.5;
        const auto set = select_genie(p, GenieSelectionConfig{dc, 5000, static_cast<std::uint64_t>(trial)});
        for (const auto& tr : set.items) {
            CHECK(tr.positive != tr.anchor);
            CHECK(std::sqrt(oracle::sq_dist(p, tr.anchor, tr.positive)) <= dc);
        }
        if (trial > 0) continue;
        // Every in-ball candidate of a heavily sampled anchor is eventually hit.
        const auto heavy = select_genie(p, GenieSelectionConfig{dc, 1'500'000, 99});
        std::set<std::size_t> hit;
        for (const auto& tr : heavy.items)
            if (tr.anchor == 0) hit.insert(tr.positive);
        std::set<std::size_t> ball;
        for (Eigen::Index j = 1; j < p.rows(); ++j)
            if (std::sqrt(oracle::sq_dist(p, 0, j)) <= dc) ball.insert(static_cast<std::size_t>(j));
        CHECK(hit == ball);
    }
}

TEST_CASE("genie rule rejects isolated points")
{
    Eigen::MatrixXd p(3, 2);
    p << 0, 0, 0.5, 0, 9, 9;
    try {
        (void)select_genie(p, GenieSelectionConfig{1.0, 10, 1});
        FAIL("expected an error");
    } catch (const SelectionError& e) {
        CHECK(std::string(e.what()).find('2') != std::string::npos);
    }
}

TEST_CASE("anchors are uniform")
{
    const auto p = grid(10, 1.0);
    const auto set = select_genie(p, GenieSelectionConfig{1.0, 1'000'000, 6});
    std::vector<std::size_t> counts(100, 0), neg(100, 0);
    for (const auto& tr : set.items) {
        ++counts[tr.anchor];
        ++neg[tr.negative];
    }
    CHECK(chi_square(counts) < 134.64); // 99 degrees of freedom, 1%
    CHECK(chi_square(neg) < 134.64);
}

TEST_CASE("selection is deterministic in the seed")
{
    const auto p = grid(8, 1.0);
    const auto a = select_genie(p, GenieSelectionConfig{1.5, 1000, 3});
    const auto b = select_genie(p, GenieSelectionConfig{1.5, 1000, 3});
    const auto c = select_genie(p, GenieSelectionConfig{1.5, 1000, 4});
    CHECK(a.items == b.items);
    CHECK(a.items != c.items);
    std::vector<double> t(64);
    std::iota(t.begin(), t.end(), 0.0);
    CHECK(select_time_based(t, TimeSelectionConfig{1.5, 1000, 3}).items ==
          select_time_based(t, TimeSelectionConfig{1.5, 1000, 3}).items);
}

TEST_CASE("projection onto a collinear segment")
{
    Eigen::MatrixXd p(6, 2);
    p << 4, 0, 1, 0, 3, 0.05, 0, 0, 2, 0, 7, 0;
    const auto m = trajectory_members(p, Eigen::Vector2d(0.5, 0), Eigen::Vector2d(5, 0), 1.0, 0.1);
    REQUIRE(m.size() == 4);
    const std::vector<std::size_t> expected = {1, 4, 2, 0};
    for (std::size_t k = 0; k < m.size(); ++k) {
        CHECK(m[k].index == expected[k]);
        CHECK(m[k].t == doctest::Approx(p(static_cast<Eigen::Index>(m[k].index), 0) - 0.5));
    }
    const auto slow = trajectory_members(p, Eigen::Vector2d(0, 0), Eigen::Vector2d(5, 0), 2.0, 0.1);
    for (const auto& mm : slow) CHECK(mm.t == doctest::Approx(p(static_cast<Eigen::Index>(mm.index), 0) / 2.0));
}

TEST_CASE("three meters at unit speed is three seconds")
{
    Eigen::MatrixXd p(2, 2);
    p << 0, 0, 3, 0;
    const auto m = trajectory_members(p, Eigen::Vector2d(0, 0), Eigen::Vector2d(0, 0) + Eigen::Vector2d(5, 0), 1.0, 0.25);
    REQUIRE(m.size() == 2);
    CHECK(m[1].t == doctest::Approx(3.0));
}

TEST_CASE("simulated trajectories satisfy their membership rule")
{
    std::mt19937_64 rng(41);
    const auto p = oracle::random_points(rng, 500, 2, 10.0);
    const auto trajs = simulate_trajectories(p, SimTrajectoryConfig{200, 1.0, 0.25, 8});
    REQUIRE(trajs.size() == 200);
    for (const auto& tr : trajs) {
        CHECK(tr.members.size() >= 2);
        const Eigen::Vector2d dir = (tr.end - tr.start).normalized();
        const double len = (tr.end - tr.start).norm();
        for (const auto& m : tr.members) {
            const Eigen::Vector2d rel = p.row(static_cast<Eigen::Index>(m.index)).transpose() - tr.start;
            const double along = rel.dot(dir);
            const double cross = std::abs(rel.x() * dir.y() - rel.y() * dir.x());
            CHECK(along >= -1e-12);
            CHECK(along <= len + 1e-12);
            CHECK(cross <= 0.25 + 1e-12);
            CHECK(m.t == doctest::Approx(along));
        }
        CHECK(std::is_sorted(tr.members.begin(), tr.members.end(),
                             [](const auto& a, const auto& b) { return a.t < b.t; }));
        for (int k = 0; k < 2; ++k) {
            CHECK(tr.start[k] >= p.col(k).minCoeff());
            CHECK(tr.end[k] <= p.col(k).maxCoeff());
        }
    }
    CHECK_THROWS_AS((void)simulate_trajectories(p, SimTrajectoryConfig{0, 1.0, 0.25, 8}), InvalidArgument);
}

TEST_CASE("unreachable trajectory budget is an error")
{
    Eigen::MatrixXd p(2, 2);
    p << 0, 0, 100, 100;
    CHECK_THROWS_AS((void)simulate_trajectories(p, SimTrajectoryConfig{5, 1.0, 0.001, 1}), SelectionError);
}

TEST_CASE("two parallel trajectories")
{
    Eigen::MatrixXd p(20, 2);
    for (int i = 0; i < 10; ++i) {
        p.row(i) << i, 0;
        p.row(10 + i) << i, 5;
    }
    std::vector<SimTrajectory> trajs(2);
    trajs[0].start = {0, 0};
    trajs[0].end = {9, 0};
    trajs[0].members = trajectory_members(p, trajs[0].start, trajs[0].end, 1.0, 0.1);
    trajs[1].start = {0, 5};
    trajs[1].end = {9, 5};
    trajs[1].members = trajectory_members(p, trajs[1].start, trajs[1].end, 1.0, 0.1);
    const auto sel = select_sim_trajectory_triplets(trajs, SimTripletConfig{1.5, 10000, 2});
    REQUIRE(sel.triplets.size() == 10000);
    REQUIRE(sel.sources.size() == 10000);
    for (std::size_t k = 0; k < sel.triplets.size(); ++k) {
        const auto& t = sel.triplets.items[k];
        const bool anchor_low = t.anchor < 10;
        CHECK((t.positive < 10) == anchor_low);
        CHECK((t.negative < 10) != anchor_low);
        CHECK(std::abs(p(static_cast<Eigen::Index>(t.anchor), 0) - p(static_cast<Eigen::Index>(t.positive), 0)) <= 1.5);
        CHECK(t.positive != t.anchor);
        CHECK(sel.sources[k].first == (anchor_low ? 0u : 1u));
        CHECK(sel.sources[k].second != sel.sources[k].first);
    }
}

TEST_CASE("simulated triplets need two trajectories")
{
    std::vector<SimTrajectory> one(1);
    one[0].members = {{0, 0.0}, {1, 1.0}};
    CHECK_THROWS_AS((void)select_sim_trajectory_triplets(one, SimTripletConfig{1.5, 10, 1}), SelectionError);
}

TEST_CASE("violation rate")
{
    Eigen::MatrixXd p(4, 2);
    p << 0, 0, 1, 0, 2, 0, 5, 0;
    TripletSet set;
    for (int k = 0; k < 9; ++k) set.items.push_back({0, 1, 3});
    set.items.push_back({0, 3, 1});
    CHECK(violation_rate(set, p) == doctest::Approx(0.1));

    TripletSet nearest;
    for (std::size_t a = 0; a < 4; ++a) {
        std::size_t nn = a == 0 ? 1 : a - 1, far = a < 2 ? 3 : 0;
        if (a == 3) nn = 2;
        nearest.items.push_back({a, nn, far});
    }
    CHECK(violation_rate(nearest, p) == 0.0);

    set.items.push_back({0, 1, 4});
    CHECK_THROWS_AS((void)violation_rate(set, p), InvalidArgument);
}

TEST_CASE("genie violation rate shrinks with the radius")
{
    std::mt19937_64 rng(51);
    const auto p = oracle::random_points(rng, 1000, 2, 10.0);
    double previous = 1.0;
    for (double dc : {4.0, 2.0, 1.0}) {
        double sum = 0;
        for (std::uint64_t s = 0; s < 3; ++s) sum += violation_rate(select_genie(p, GenieSelectionConfig{dc, 20000, s}), p);
        CHECK(sum / 3 < previous);
        previous = sum / 3;
    }
}

TEST_CASE("triplet file round-trip")
{
    testutil::TempDir dir("ts");
    const auto set = select_genie(grid(6, 1.0), GenieSelectionConfig{1.0, 777, 1});
    save_triplets(set, dir / "t.ccts");
    const auto back = load_triplets(dir / "t.ccts");
    CHECK(back.items == set.items);
    CHECK(std::holds_alternative<std::monostate>(back.rule));
    const auto bytes = testutil::read_bytes(dir / "t.ccts");
    CHECK(bytes.size() == 16 + 777 * 24);
    testutil::write_bytes(dir / "bad.ccts", bytes.substr(0, bytes.size() - 8));
    CHECK_THROWS_AS((void)load_triplets(dir / "bad.ccts"), LoadError);
}

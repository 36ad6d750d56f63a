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

#include "chartkit/dataset.hpp"
#include "chartkit/error.hpp"
#include "chartkit/features.hpp"

#include "doctest.h"
#include "oracles.hpp"
#include "test_util.hpp"

#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>
#include <random>

using namespace chartkit;

namespace {

Dataset random_dataset(std::mt19937_64& rng, std::size_t n, std::uint32_t b, std::uint32_t w, std::uint32_t d)
{
    std::normal_distribution<float> g;
    std::uniform_real_distribution<double> u(-50.0, 50.0);
    Dataset ds;
    ds.name = "random";
    ds.antenna_count = b;
    ds.subcarrier_count = w;
    ds.position_dim = d;
    double t = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        CsiDatapoint p;
        p.csi.resize(b, w);
        for (Eigen::Index k = 0; k < p.csi.size(); ++k) p.csi.data()[k] = {g(rng), g(rng)};
        p.position = Position(d);
        for (std::uint32_t c = 0; c < d; ++c) p.position[c] = u(rng);
        t += std::uniform_real_distribution<double>(0.0, 0.2)(rng);
        p.timestamp = t;
        ds.datapoints.push_back(std::move(p));
    }
    return ds;
}

bool same_bits(const Dataset& a, const Dataset& b)
{
    if (a.size() != b.size() || a.antenna_count != b.antenna_count || a.subcarrier_count != b.subcarrier_count ||
        a.position_dim != b.position_dim)
        return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const auto& p = a.datapoints[i];
        const auto& q = b.datapoints[i];
        if (std::memcmp(&p.timestamp, &q.timestamp, sizeof(double)) != 0) return false;
        if (std::memcmp(p.position.data(), q.position.data(), sizeof(double) * p.position.size()) != 0) return false;
        if (std::memcmp(p.csi.data(), q.csi.data(), sizeof(std::complex<float>) * p.csi.size()) != 0) return false;
    }
    return true;
}

template <class T>
void patch(std::string& bytes, std::size_t offset, T value)
{
    std::memcpy(bytes.data() + offset, &value, sizeof(T));
}

LoadError::Kind load_failure(const std::filesystem::path& p, std::uint64_t* offset = nullptr)
{
    try {
        (void)load_container(p);
    } catch (const LoadError& e) {
        if (offset) *offset = e.offset();
        return e.kind();
    }
    FAIL("container loaded without error");
    return LoadError::Kind::BadMagic;
}

} // namespace

TEST_CASE("single record round-trips byte for byte")
{
    testutil::TempDir dir("ds");
    Dataset ds;
    ds.antenna_count = 2;
    ds.subcarrier_count = 4;
    ds.position_dim = 2;
    CsiDatapoint p;
    p.csi.resize(2, 4);
    for (int k = 0; k < 8; ++k) p.csi.data()[k] = {0.5f * k, -0.25f * k};
    p.position = Eigen::Vector2d(1.0, 2.0);
    p.timestamp = 3.0;
    ds.datapoints.push_back(p);

    save_container(ds, dir / "a.ccds");
    const Dataset back = load_container(dir / "a.ccds");
    REQUIRE(back.size() == 1);
    CHECK(back.datapoints[0].csi == p.csi);
    CHECK(back.datapoints[0].position == p.position);
    CHECK(back.datapoints[0].timestamp == 3.0);
    save_container(back, dir / "b.ccds");
    CHECK(testutil::read_bytes(dir / "a.ccds") == testutil::read_bytes(dir / "b.ccds"));
    CHECK(std::filesystem::file_size(dir / "a.ccds") == 28 + 8 + 16 + 64);
}

TEST_CASE("random containers round-trip bit-exactly")
{
    testutil::TempDir dir("ds");
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const auto n = std::uniform_int_distribution<std::size_t>(1, 40)(rng);
        const auto b = std::uniform_int_distribution<std::uint32_t>(1, 6)(rng);
        const auto w = std::uniform_int_distribution<std::uint32_t>(1, 9)(rng);
        const auto d = std::uniform_int_distribution<std::uint32_t>(2, 3)(rng);
        const Dataset ds = random_dataset(rng, n, b, w, d);
        save_container(ds, dir / "r.ccds");
        CHECK(same_bits(ds, load_container(dir / "r.ccds")));
        const auto shape = read_container_shape(dir / "r.ccds");
        CHECK(shape.n == n);
        CHECK(shape.antenna_count == b);
        CHECK(shape.subcarrier_count == w);
        CHECK(shape.position_dim == d);
    }
}

TEST_CASE("synthetic dataset of 1000 points round-trips")
{
    testutil::TempDir dir("ds");
    SynthConfig cfg;
    cfg.n = 1000;
    const Dataset ds = synthesize_los_dataset(cfg);
    save_container(ds, dir / "s.ccds");
    CHECK(same_bits(ds, load_container(dir / "s.ccds")));
}

TEST_CASE("large container keeps its shape")
{
    testutil::TempDir dir("ds");
    std::mt19937_64 rng(3);
    const Dataset ds = random_dataset(rng, 13496, 32, 2, 3);
    save_container(ds, dir / "big.ccds");
    const Dataset back = load_container(dir / "big.ccds");
    CHECK(back.size() == 13496);
    CHECK(back.antenna_count == 32);
    CHECK(back.position_dim == 3);
}

TEST_CASE("records are returned sorted by timestamp, ties in file order")
{
    testutil::TempDir dir("ds");
    std::mt19937_64 rng(11);
    Dataset ds = random_dataset(rng, 50, 2, 3, 2);
    for (std::size_t i = 0; i < ds.size(); ++i) ds.datapoints[i].timestamp = static_cast<double>((i * 7) % 10);
    save_container(ds, dir / "shuffled.ccds");
    const Dataset back = load_container(dir / "shuffled.ccds");
    REQUIRE(back.size() == ds.size());
    for (std::size_t i = 1; i < back.size(); ++i)
        CHECK(back.datapoints[i - 1].timestamp <= back.datapoints[i].timestamp);
    std::vector<std::size_t> order(ds.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
        return ds.datapoints[a].timestamp < ds.datapoints[b].timestamp;
    });
    for (std::size_t i = 0; i < order.size(); ++i)
        CHECK(back.datapoints[i].position == ds.datapoints[order[i]].position);
}

TEST_CASE("malformed containers are rejected with the failing offset")
{
    testutil::TempDir dir("ds");
    std::mt19937_64 rng(5);
    const Dataset ds = random_dataset(rng, 3, 2, 2, 2);
    save_container(ds, dir / "ok.ccds");
    const std::string good = testutil::read_bytes(dir / "ok.ccds");
    const std::size_t record = 8 + 16 + 2 * 2 * 8;
    const auto bad = dir / "bad.ccds";
    std::uint64_t offset = 0;

    SUBCASE("bad magic")
    {
        std::string b = good;
        b[0] = 'X';
        testutil::write_bytes(bad, b);
        CHECK(load_failure(bad, &offset) == LoadError::Kind::BadMagic);
        CHECK(offset == 0);
    }
    SUBCASE("unsupported version")
    {
        std::string b = good;
        patch<std::uint32_t>(b, 4, 2);
        testutil::write_bytes(bad, b);
        CHECK(load_failure(bad, &offset) == LoadError::Kind::VersionMismatch);
        CHECK(offset == 4);
    }
    SUBCASE("zero records")
    {
        std::string b = good;
        patch<std::uint64_t>(b, 8, 0);
        testutil::write_bytes(bad, b);
        CHECK(load_failure(bad, &offset) == LoadError::Kind::MalformedHeader);
        CHECK(offset == 8);
    }
    SUBCASE("position dimension out of range")
    {
        std::string b = good;
        patch<std::uint32_t>(b, 24, 4);
        testutil::write_bytes(bad, b);
        CHECK(load_failure(bad, &offset) == LoadError::Kind::MalformedHeader);
        CHECK(offset == 24);
    }
    SUBCASE("truncated payload")
    {
        testutil::write_bytes(bad, good.substr(0, good.size() - 5));
        CHECK(load_failure(bad, &offset) == LoadError::Kind::Truncated);
        CHECK(offset == 28 + 2 * record + 8 + 16);
    }
    SUBCASE("truncated header")
    {
        testutil::write_bytes(bad, good.substr(0, 10));
        CHECK(load_failure(bad) == LoadError::Kind::Truncated);
    }
    SUBCASE("NaN coefficient")
    {
        std::string b = good;
        const std::size_t at = 28 + record + 8 + 16 + 4;
        patch<float>(b, at, std::numeric_limits<float>::quiet_NaN());
        testutil::write_bytes(bad, b);
        CHECK(load_failure(bad, &offset) == LoadError::Kind::NonFinite);
        CHECK(offset == at);
    }
    SUBCASE("infinite position")
    {
        std::string b = good;
        const std::size_t at = 28 + 8;
        patch<double>(b, at, std::numeric_limits<double>::infinity());
        testutil::write_bytes(bad, b);
        CHECK(load_failure(bad, &offset) == LoadError::Kind::NonFinite);
        CHECK(offset == at);
    }
    SUBCASE("trailing bytes")
    {
        testutil::write_bytes(bad, good + "xx");
        CHECK(load_failure(bad) == LoadError::Kind::MalformedHeader);
    }
    SUBCASE("reduced loader reports the same errors")
    {
        testutil::write_bytes(bad, good.substr(0, good.size() - 5));
        CHECK_THROWS_AS((void)load_container_reduced(bad, 0, 1), LoadError);
    }
}

TEST_CASE("missing file is an I/O error")
{
    CHECK_THROWS_AS((void)load_container("/nonexistent/chartkit.ccds"), IoError);
}

TEST_CASE("invalid datasets cannot be saved")
{
    testutil::TempDir dir("ds");
    Dataset empty;
    empty.antenna_count = 1;
    empty.subcarrier_count = 1;
    empty.position_dim = 2;
    CHECK_THROWS_AS(save_container(empty, dir / "e.ccds"), InvalidArgument);

    std::mt19937_64 rng(1);
    Dataset ds = random_dataset(rng, 2, 2, 2, 2);
    ds.datapoints[1].csi.resize(2, 3);
    CHECK_THROWS_AS(save_container(ds, dir / "e.ccds"), InvalidArgument);
    CHECK_FALSE(std::filesystem::exists(dir / "e.ccds"));
}

TEST_CASE("subcarrier averaging")
{
    Dataset ds;
    ds.antenna_count = 1;
    ds.subcarrier_count = 4;
    ds.position_dim = 2;
    CsiDatapoint p;
    p.csi.resize(1, 4);
    p.csi << std::complex<float>(1, 0), std::complex<float>(3, 0), std::complex<float>(0, 2), std::complex<float>(0, 6);
    p.position = Eigen::Vector2d(0, 0);
    ds.datapoints.push_back(p);

    const auto r = subcarrier_average(ds, 0, 4);
    REQUIRE(r.size() == 1);
    CHECK(r.datapoints[0].h[0] == std::complex<double>(1.0, 2.0));
    CHECK(subcarrier_average(ds, 1, 1).datapoints[0].h[0] == std::complex<double>(3.0, 0.0));
    CHECK_THROWS_AS((void)subcarrier_average(ds, 2, 3), InvalidArgument);
    CHECK_THROWS_AS((void)subcarrier_average(ds, 0, 0), InvalidArgument);
}

TEST_CASE("single-subcarrier averaging is the identity")
{
    std::mt19937_64 rng(2);
    const Dataset ds = random_dataset(rng, 10, 4, 1, 2);
    const auto r = subcarrier_average(ds, 0, 1);
    for (std::size_t i = 0; i < ds.size(); ++i)
        for (Eigen::Index b = 0; b < 4; ++b)
            CHECK(r.datapoints[i].h[b] == std::complex<double>(ds.datapoints[i].csi(b, 0)));
}

TEST_CASE("averaging does not depend on subcarrier order")
{
    std::mt19937_64 rng(4);
    const Dataset ds = random_dataset(rng, 5, 3, 6, 2);
    Dataset rev = ds;
    for (auto& p : rev.datapoints) p.csi = p.csi.rowwise().reverse().eval();
    const auto a = subcarrier_average(ds, 0, 6);
    const auto b = subcarrier_average(rev, 0, 6);
    for (std::size_t i = 0; i < ds.size(); ++i) CHECK((a.datapoints[i].h - b.datapoints[i].h).norm() < 1e-12);
}

TEST_CASE("centre window")
{
    CHECK(centre_window_start(1024, 8) == 508);
    CHECK(centre_window_start(8, 8) == 0);
}

TEST_CASE("streaming reduction equals averaging the loaded container")
{
    testutil::TempDir dir("ds");
    std::mt19937_64 rng(9);
    Dataset ds = random_dataset(rng, 30, 4, 16, 3);
    std::shuffle(ds.datapoints.begin(), ds.datapoints.end(), rng);
    save_container(ds, dir / "s.ccds");
    const auto a = subcarrier_average(load_container(dir / "s.ccds"), 4, 8);
    const auto b = load_container_reduced(dir / "s.ccds", 4, 8);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a.datapoints[i].h == b.datapoints[i].h);
        CHECK(a.datapoints[i].timestamp == b.datapoints[i].timestamp);
        CHECK(a.datapoints[i].position == b.datapoints[i].position);
    }
    CHECK_THROWS_AS((void)load_container_reduced(dir / "s.ccds", 10, 8), InvalidArgument);
}

TEST_CASE("single point at unit distance has unit magnitude")
{
    SynthConfig cfg;
    cfg.n = 1;
    cfg.antenna_count = 1;
    cfg.subcarrier_count = 3;
    cfg.jitter = 0.0;
    cfg.area_min = Eigen::Vector2d(0.0, 0.0);
    cfg.area_max = Eigen::Vector2d(0.0, 0.0);
    cfg.antenna_positions = Eigen::MatrixXd(1, 2);
    cfg.antenna_positions << 1.0, 0.0;
    const Dataset ds = synthesize_los_dataset(cfg);
    REQUIRE(ds.size() == 1);
    for (Eigen::Index w = 0; w < 3; ++w) CHECK(std::abs(ds.datapoints[0].csi(0, w)) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("synthesis is deterministic and valid")
{
    SynthConfig cfg;
    cfg.n = 300;
    const Dataset a = synthesize_los_dataset(cfg);
    const Dataset b = synthesize_los_dataset(cfg);
    CHECK(same_bits(a, b));
    CHECK_NOTHROW(validate(a));
    cfg.seed = 2;
    CHECK_FALSE(same_bits(a, synthesize_los_dataset(cfg)));
    const auto p = positions(a);
    CHECK(p.minCoeff() >= 0.0);
    CHECK(p.maxCoeff() <= 10.0);
    for (std::size_t i = 1; i < a.size(); ++i) CHECK(a.datapoints[i - 1].timestamp < a.datapoints[i].timestamp);
}

TEST_CASE("antenna layout errors")
{
    SynthConfig cfg;
    cfg.n = 1;
    cfg.antenna_count = 2;
    cfg.jitter = 0.0;
    cfg.area_min = Eigen::Vector2d(1.0, 1.0);
    cfg.area_max = Eigen::Vector2d(1.0, 1.0);
    cfg.antenna_positions = Eigen::MatrixXd(2, 2);
    cfg.antenna_positions << 1.0, 1.0, 3.0, 3.0;
    CHECK_THROWS_AS((void)synthesize_los_dataset(cfg), InvalidArgument);
    cfg.antenna_positions << 3.0, 3.0, 3.0, 3.0;
    CHECK_THROWS_AS((void)synthesize_los_dataset(cfg), InvalidArgument);
}

TEST_CASE("feature distance tracks physical distance")
{
    SynthConfig cfg;
    cfg.n = 2000;
    const Dataset ds = synthesize_los_dataset(cfg);
    const auto reduced = subcarrier_average(ds, 0, cfg.subcarrier_count);
    const auto f = featurize_dataset(reduced, FeatureConfig{});
    const auto p = positions(ds);
    std::mt19937_64 rng(1);
    std::uniform_int_distribution<Eigen::Index> pick(0, static_cast<Eigen::Index>(ds.size()) - 1);
    std::vector<double> df, dx;
    for (int k = 0; k < 20000; ++k) {
        const auto i = pick(rng), j = pick(rng);
        if (i == j) continue;
        df.push_back((f.row(i) - f.row(j)).cast<double>().norm());
        dx.push_back((p.row(i) - p.row(j)).norm());
    }
    CHECK(oracle::spearman(df, dx) > 0.5);
}

TEST_CASE("synthesis configuration from JSON")
{
    const auto cfg = synth_config_from_json_text(R"({"n": 50, "antennas": 4, "trajectory": "random_waypoint", "seed": 9})");
    CHECK(cfg.n == 50);
    CHECK(cfg.antenna_count == 4);
    CHECK(cfg.trajectory == TrajectoryStyle::RandomWaypoint);
    CHECK(cfg.seed == 9);
    CHECK(synthesize_los_dataset(cfg).size() == 50);
    CHECK_THROWS_AS((void)synth_config_from_json_text(R"({"antenas": 4})"), ConfigError);
    CHECK_THROWS_AS((void)synth_config_from_json_text(R"({"trajectory": "spiral"})"), ConfigError);
    CHECK_THROWS_AS((void)synth_config_from_json_text("{"), ConfigError);
}

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
#include "chartkit/features.hpp"

#include "doctest.h"
#include "oracles.hpp"
#include "test_util.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

using namespace chartkit;

namespace {

CsiVector random_csi(std::mt19937_64& rng, Eigen::Index b, double scale = 1.0)
{
    std::normal_distribution<double> g(0.0, scale);
    CsiVector h(b);
    for (Eigen::Index i = 0; i < b; ++i) h[i] = {g(rng), g(rng)};
    return h;
}

} // namespace

TEST_CASE("single antenna")
{
    CsiVector h(1);
    h[0] = 2.0;
    const auto f = scaled_r2m(h, FeatureConfig{});
    REQUIRE(f.size() == 1);
    CHECK(f[0] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("zero channel maps to zero")
{
    const CsiVector h = CsiVector::Zero(4);
    CHECK(scale_csi(h, 8.0).isZero());
    CHECK(scaled_r2m(h, FeatureConfig{}).isZero());
}

TEST_CASE("invalid inputs")
{
    CsiVector h = CsiVector::Ones(3);
    CHECK_THROWS_AS((void)scale_csi(h, 0.0), InvalidArgument);
    CHECK_THROWS_AS((void)scale_csi(h, -1.0), InvalidArgument);
    h[1] = {std::numeric_limits<double>::quiet_NaN(), 0.0};
    CHECK_THROWS_AS((void)scaled_r2m(h, FeatureConfig{}), InvalidArgument);
}

TEST_CASE("features agree with the scalar oracle")
{
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 200; ++trial) {
        const Eigen::Index b = std::uniform_int_distribution<Eigen::Index>(1, 32)(rng);
        const double sigma = std::uniform_real_distribution<double>(0.5, 12.0)(rng);
        const auto h = random_csi(rng, b, std::pow(10.0, std::uniform_real_distribution<double>(-4, 1)(rng)));
        const auto f = scaled_r2m(h, FeatureConfig{sigma});
        const auto ref = oracle::scaled_r2m(std::vector<std::complex<double>>(h.data(), h.data() + b), sigma);
        REQUIRE(f.size() == b * b);
        for (Eigen::Index k = 0; k < f.size(); ++k)
            CHECK(std::abs(f[k] - ref[static_cast<std::size_t>(k)]) <= 1e-6 * std::max(1.0, std::abs(ref[static_cast<std::size_t>(k)])));
    }
}

TEST_CASE("features ignore a common phase rotation")
{
    std::mt19937_64 rng(22);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    for (int trial = 0; trial < 50; ++trial) {
        const auto h = random_csi(rng, 8);
        const CsiVector rotated = h * std::polar(1.0, phase(rng));
        const FeatureConfig cfg{std::uniform_real_distribution<double>(1.0, 10.0)(rng)};
        CHECK((scaled_r2m(h, cfg) - scaled_r2m(rotated, cfg)).norm() <= 1e-10 * scaled_r2m(h, cfg).norm());
    }
}

TEST_CASE("scaled norm follows the power law")
{
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 100; ++trial) {
        const double sigma = std::uniform_real_distribution<double>(0.5, 16.0)(rng);
        const auto h = random_csi(rng, 6, std::pow(10.0, std::uniform_real_distribution<double>(-3, 2)(rng)));
        const double expected = std::pow(h.norm(), 2.0 / sigma);
        CHECK(scale_csi(h, sigma).norm() == doctest::Approx(expected).epsilon(1e-10));
        // The diagonal of the outer product sums to the squared scaled norm.
        const auto f = scaled_r2m(h, FeatureConfig{sigma});
        double trace = 0;
        for (Eigen::Index i = 0; i < 6; ++i) trace += f[i * 6 + i];
        CHECK(trace == doctest::Approx(expected * expected).epsilon(1e-10));
    }
}

TEST_CASE("feature matrix rows are the per-point features")
{
    std::mt19937_64 rng(24);
    ReducedDataset rd;
    rd.antenna_count = 5;
    rd.position_dim = 2;
    for (int i = 0; i < 20; ++i) rd.datapoints.push_back({random_csi(rng, 5), Eigen::Vector2d(i, 0), double(i)});
    const auto fm = featurize_dataset(rd, FeatureConfig{});
    REQUIRE(fm.rows() == 20);
    REQUIRE(fm.cols() == 25);
    for (int i = 0; i < 20; ++i)
        CHECK((fm.row(i).cast<double>().transpose() - scaled_r2m(rd.datapoints[static_cast<std::size_t>(i)].h, FeatureConfig{})).norm() < 1e-5);
}

TEST_CASE("feature cache round-trip and validation")
{
    testutil::TempDir dir("ft");
    std::mt19937_64 rng(25);
    FeatureMatrix f(17, 9);
    std::normal_distribution<float> g;
    for (Eigen::Index k = 0; k < f.size(); ++k) f.data()[k] = g(rng);
    save_feature_cache(f, dir / "f.ccft");
    CHECK(load_feature_cache(dir / "f.ccft") == f);

    std::string bytes = testutil::read_bytes(dir / "f.ccft");
    testutil::write_bytes(dir / "t.ccft", bytes.substr(0, bytes.size() - 1));
    CHECK_THROWS_AS((void)load_feature_cache(dir / "t.ccft"), LoadError);
    bytes[1] = '?';
    testutil::write_bytes(dir / "m.ccft", bytes);
    CHECK_THROWS_AS((void)load_feature_cache(dir / "m.ccft"), LoadError);
}

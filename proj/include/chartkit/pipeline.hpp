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

#include "chartkit/chartnet.hpp"
#include "chartkit/dataset.hpp"
#include "chartkit/features.hpp"
#include "chartkit/metrics.hpp"
#include "chartkit/triplets.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace chartkit {

enum class TripletRule { Time, Genie, SimTrajectory };

std::string_view to_string(TripletRule rule) noexcept;

struct TripletRuleConfig {
    TripletRule rule = TripletRule::Genie;
    double t_c = 1.5;        // s, time and simtraj rules
    double d_c = 1.5;        // m, genie rule
    std::size_t r = 30'000;  // simulated trajectories
    double speed = 1.0;      // m/s
    double corridor = 0.25;  // m
    std::size_t count = 1'200'000;
    std::uint64_t seed = 0;
};

struct RunConfig {
    // Exactly one of `dataset` and `synth` is set.
    std::optional<std::filesystem::path> dataset;
    std::optional<SynthConfig> synth;
    std::optional<std::uint32_t> w_start; // default: window centred in the band
    std::uint32_t w_count = 8;            // clamped to W when the band is narrower
    FeatureConfig features;
    TripletRuleConfig triplets;
    NetworkConfig network;
    TrainConfig training;
    EvaluateOptions metrics;
    std::filesystem::path output_dir; // empty: nothing is written
    std::uint64_t seed = 0;
};

enum class Stage { Triplets, Network, Training, Metrics };

/// Seed of one stochastic stage derived from a master seed (std::seed_seq).
std::uint64_t derive_seed(std::uint64_t master, Stage stage);

/// Seed of row `row` of a parameter sweep.
std::uint64_t sweep_row_seed(std::uint64_t master, std::size_t row);

/// Sets the master seed and every stage seed derived from it.
void apply_master_seed(RunConfig& config, std::uint64_t seed);

/// Parses a JSON run configuration. Relative dataset and output paths resolve
/// against `base_dir`. Stage seeds not given explicitly derive from "seed".
RunConfig run_config_from_json_text(const std::string& text, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);
std::string to_json_text(const RunConfig& config);

struct ChartProvenance {
    std::string config_json;
    std::string weights_digest; // SHA-256 of the weights file bytes, hex
    std::string digest;         // SHA-256 over config and weights, hex
};

struct ChartResult {
    std::vector<std::size_t> index;
    Eigen::MatrixXd chart; // N x 2
    Eigen::MatrixXd truth; // N x D
    std::vector<double> timestamps;
    ChartProvenance provenance;

    std::size_t size() const noexcept { return index.size(); }
};

struct RunOutput {
    ChartResult chart;
    MetricsReport metrics;
    std::vector<double> epoch_loss;
    double triplet_violation_rate = 0.0;
};

/// Reduced dataset and feature matrix shared by every run on one dataset.
struct PreparedData {
    ReducedDataset reduced;
    FeatureMatrix features;
    std::optional<Dataset> synthesized; // full synthetic dataset, when generated
};

PreparedData prepare_data(const RunConfig& config);

/// load -> subcarrier average -> featurise -> triplets -> train -> chart -> evaluate.
/// Writes every intermediate artifact into config.output_dir when it is set.
/// Stage failures are rethrown as StageError.
RunOutput run_pipeline(const RunConfig& config);
RunOutput run_pipeline(const RunConfig& config, const PreparedData& data);

struct SweepRow {
    double value = 0.0;
    MetricsReport metrics;
};

/// One genie run per d_c value, row i seeded with sweep_row_seed(config.seed, i).
std::vector<SweepRow> sweep_dc(const RunConfig& config, const std::vector<double>& dc_values);

/// One simulated-trajectory run per trajectory count.
std::vector<SweepRow> sweep_r(const RunConfig& config, const std::vector<std::size_t>& r_values);

/// Charts a dataset with a previously trained network; no training happens.
/// Uses the dataset, subcarrier window, features, metrics and output_dir of `target`.
RunOutput transfer_evaluate(const std::filesystem::path& weights, const RunConfig& target);

// -- artifacts ---------------------------------------------------------------

/// CSV with header index,z1,z2,x1,x2[,x3],timestamp.
void write_chart_csv(const ChartResult& result, const std::filesystem::path& path);
ChartResult read_chart_csv(const std::filesystem::path& path);

void write_sweep_csv(const std::vector<SweepRow>& rows, std::string_view parameter, const std::filesystem::path& path);

enum class PlotSpace { Chart, Truth };

/// Colour of a point from its normalised ground-truth position (u, v) in [0, 1]^2:
/// (r, g, b) = (u, v, 1 - u).
Eigen::Vector3d position_colour(double u, double v);

/// SVG scatter of the chart (or the ground truth), coloured by ground-truth position.
std::string render_plot(const ChartResult& result, PlotSpace space = PlotSpace::Chart);
void emit_plot(const ChartResult& result, const std::filesystem::path& path, PlotSpace space = PlotSpace::Chart);

/// SVG line plot of CT, TW and KS against the swept parameter.
std::string render_sweep_plot(const std::vector<SweepRow>& rows, std::string_view parameter, bool log_x);

std::string sha256_hex(std::string_view bytes);

} // namespace chartkit

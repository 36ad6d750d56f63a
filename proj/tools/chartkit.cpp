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

// chartkit command-line front end.

#include "chartkit/chartnet.hpp"
#include "chartkit/dataset.hpp"
#include "chartkit/error.hpp"
#include "chartkit/features.hpp"
#include "chartkit/metrics.hpp"
#include "chartkit/pipeline.hpp"
#include "chartkit/triplets.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace chartkit;

namespace {

constexpr int kConfigError = 2;
constexpr int kStageError = 3;

struct DataSource {
    std::string dataset;
    std::string synth_config;

    void add(CLI::App* app)
    {
        auto* d = app->add_option("--dataset", dataset, "CCDS container");
        auto* s = app->add_option("--synth-config", synth_config, "JSON synthetic dataset description");
        d->excludes(s);
        s->excludes(d);
    }

    void require() const
    {
        if (dataset.empty() == synth_config.empty())
            throw ConfigError("exactly one of --dataset and --synth-config is required");
    }

    // Reduced to the given subcarrier window; positions and timestamps are all a caller may need.
    ReducedDataset reduced(std::optional<std::uint32_t> w_start, std::uint32_t w_count) const
    {
        require();
        if (!dataset.empty()) {
            const auto shape = read_container_shape(dataset);
            const auto count = std::min(w_count, shape.subcarrier_count);
            return load_container_reduced(dataset, w_start.value_or(centre_window_start(shape.subcarrier_count, count)),
                                          count);
        }
        const Dataset ds = synthesize_los_dataset(load_synth_config(synth_config));
        const auto count = std::min(w_count, ds.subcarrier_count);
        return subcarrier_average(ds, w_start.value_or(centre_window_start(ds.subcarrier_count, count)), count);
    }
};

struct Window {
    std::optional<std::uint32_t> start;
    std::uint32_t count = 8;

    void add(CLI::App* app)
    {
        app->add_option("--w-start", start, "first subcarrier of the averaging window (default: centred)");
        app->add_option("--w-count", count, "subcarriers averaged")->capture_default_str();
    }
};

void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw IoError("write failed: " + path.string());
}

void print_report(const MetricsReport& m)
{
    fmt::print("CT = {:.4f}  TW = {:.4f}  KS = {:.4f}  (K = {}, N = {})\n", m.ct, m.tw, m.ks, m.k_used, m.n_used);
}

std::vector<double> parse_list(const std::string& text)
{
    std::vector<double> values;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto end = std::min(text.find(',', pos), text.size());
        const std::string item = text.substr(pos, end - pos);
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != item.size()) throw ConfigError("bad list entry \"" + item + "\" in \"" + text + "\"");
        values.push_back(v);
        pos = end + 1;
    }
    return values;
}

RunConfig run_config(const std::string& config_path, const std::string& out, std::optional<std::uint64_t> seed)
{
    RunConfig c = load_run_config(config_path);
    if (seed) apply_master_seed(c, *seed);
    if (!out.empty()) c.output_dir = out;
    return c;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"chartkit: channel charting with triplet-loss networks"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "chartkit 0.1.0");

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic line-of-sight dataset");
    std::string synth_cfg, synth_out;
    synth->add_option("--synth-config", synth_cfg, "JSON description (defaults when omitted)");
    synth->add_option("--out", synth_out, "output container")->required();

    // info
    auto* info = app.add_subcommand("info", "print the header of a container");
    std::string info_path;
    info->add_option("--dataset", info_path, "CCDS container")->required();

    // features
    auto* feat = app.add_subcommand("features", "average subcarriers and compute scaled R2M features");
    DataSource feat_src;
    Window feat_win;
    double sigma = 8.0;
    std::string feat_out;
    feat_src.add(feat);
    feat_win.add(feat);
    feat->add_option("--sigma", sigma, "path-loss exponent of the feature scaling")->capture_default_str();
    feat->add_option("--out", feat_out, "feature cache")->required();

    // triplets
    auto* trip = app.add_subcommand("triplets", "generate a triplet set");
    DataSource trip_src;
    TripletRuleConfig rule_cfg;
    std::string rule_name = "genie", trip_out;
    trip_src.add(trip);
    trip->add_option("--rule", rule_name, "selection rule")
        ->check(CLI::IsMember({"time", "genie", "simtraj"}))
        ->capture_default_str();
    trip->add_option("--tc", rule_cfg.t_c, "positive time window, s")->capture_default_str();
    trip->add_option("--dc", rule_cfg.d_c, "positive distance ball, m")->capture_default_str();
    trip->add_option("--r", rule_cfg.r, "simulated trajectories")->capture_default_str();
    trip->add_option("--speed", rule_cfg.speed, "simulated speed, m/s")->capture_default_str();
    trip->add_option("--corridor", rule_cfg.corridor, "trajectory corridor half-width, m")->capture_default_str();
    trip->add_option("--count", rule_cfg.count, "triplets")->capture_default_str();
    trip->add_option("--seed", rule_cfg.seed, "selection seed")->capture_default_str();
    trip->add_option("--out", trip_out, "triplet file")->required();

    // train
    auto* trn = app.add_subcommand("train", "train a charting network");
    std::string trn_features, trn_triplets, trn_out;
    NetworkConfig net_cfg;
    TrainConfig train_cfg;
    std::uint64_t trn_seed = 0;
    trn->add_option("--features", trn_features, "feature cache")->required();
    trn->add_option("--triplets", trn_triplets, "triplet file")->required();
    trn->add_option("--epochs", train_cfg.epochs, "passes over the triplets")->capture_default_str();
    trn->add_option("--batch-size", train_cfg.batch_size, "triplets per step")->capture_default_str();
    trn->add_option("--learning-rate", train_cfg.learning_rate, "Adam step size")->capture_default_str();
    trn->add_option("--margin", train_cfg.margin, "triplet margin")->capture_default_str();
    trn->add_option("--hidden", net_cfg.hidden, "hidden layer widths")->delimiter(',');
    trn->add_option("--seed", trn_seed, "master seed for initialisation and shuffling")->capture_default_str();
    trn->add_option("--out", trn_out, "weights file")->required();

    // chart
    auto* chart = app.add_subcommand("chart", "apply a trained network to a dataset");
    DataSource chart_src;
    Window chart_win;
    std::string chart_weights, chart_out;
    double chart_sigma = 8.0;
    chart_src.add(chart);
    chart_win.add(chart);
    chart->add_option("--weights", chart_weights, "weights file")->required();
    chart->add_option("--sigma", chart_sigma, "feature scaling exponent")->capture_default_str();
    chart->add_option("--out", chart_out, "chart CSV")->required();

    // eval
    auto* ev = app.add_subcommand("eval", "score a chart against ground truth");
    std::string ev_chart, ev_truth, ev_out;
    std::optional<std::size_t> ev_subsample, ev_k;
    std::uint64_t ev_seed = 0;
    ev->add_option("--chart", ev_chart, "chart CSV")->required();
    ev->add_option("--truth", ev_truth, "CCDS container with ground-truth positions (default: the CSV columns)");
    ev->add_option("--subsample", ev_subsample, "evaluate a random subset of this size");
    ev->add_option("--k", ev_k, "neighbourhood size (default 5% of N)");
    ev->add_option("--seed", ev_seed, "subsample seed")->capture_default_str();
    ev->add_option("--out", ev_out, "metrics file");

    // run / sweeps / transfer
    auto* run = app.add_subcommand("run", "run the whole pipeline from a JSON configuration");
    std::string run_cfg, run_out;
    std::optional<std::uint64_t> run_seed;
    run->add_option("--config", run_cfg, "run configuration")->required()->check(CLI::ExistingFile);
    run->add_option("--out", run_out, "output directory (overrides the configuration)");
    run->add_option("--seed", run_seed, "master seed (overrides the configuration)");

    auto* sdc = app.add_subcommand("sweep-dc", "genie runs over a list of d_c values");
    auto* sr = app.add_subcommand("sweep-r", "simulated-trajectory runs over a list of trajectory counts");
    std::string sweep_values;
    for (auto* s : {sdc, sr}) {
        s->add_option("--config", run_cfg, "run configuration")->required()->check(CLI::ExistingFile);
        s->add_option("--values", sweep_values, "comma-separated values")->required();
        s->add_option("--out", run_out, "output directory");
        s->add_option("--seed", run_seed, "master seed");
    }

    auto* tr = app.add_subcommand("transfer", "chart and score a dataset with previously trained weights");
    std::string tr_weights;
    tr->add_option("--weights", tr_weights, "weights file")->required();
    tr->add_option("--config", run_cfg, "run configuration describing the target")->required()->check(CLI::ExistingFile);
    tr->add_option("--out", run_out, "output directory");

    // plot
    auto* plot = app.add_subcommand("plot", "render a chart CSV as SVG");
    std::string plot_chart, plot_out;
    bool plot_truth = false;
    plot->add_option("--chart", plot_chart, "chart CSV")->required();
    plot->add_option("--out", plot_out, "SVG file")->required();
    plot->add_flag("--truth-space", plot_truth, "draw the ground-truth positions instead of the chart");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kConfigError;
    }

    try {
        if (*synth) {
            const SynthConfig cfg = synth_cfg.empty() ? SynthConfig{} : load_synth_config(synth_cfg);
            const Dataset ds = synthesize_los_dataset(cfg);
            save_container(ds, synth_out);
            fmt::print("wrote {} points (B = {}, W = {}) to {}\n", ds.size(), ds.antenna_count, ds.subcarrier_count,
                       synth_out);
        } else if (*info) {
            const auto s = read_container_shape(info_path);
            fmt::print("N = {}\nB = {}\nW = {}\nD = {}\n", s.n, s.antenna_count, s.subcarrier_count, s.position_dim);
        } else if (*feat) {
            const auto reduced = feat_src.reduced(feat_win.start, feat_win.count);
            const auto f = featurize_dataset(reduced, FeatureConfig{sigma});
            save_feature_cache(f, feat_out);
            fmt::print("wrote {} x {} features to {}\n", f.rows(), f.cols(), feat_out);
        } else if (*trip) {
            const auto reduced = trip_src.reduced(std::nullopt, 1);
            const auto pos = positions(reduced);
            TripletSet set;
            if (rule_name == "time") {
                std::vector<double> ts;
                for (const auto& p : reduced.datapoints) ts.push_back(p.timestamp);
                set = select_time_based(std::span<const double>(ts), {rule_cfg.t_c, rule_cfg.count, rule_cfg.seed});
            } else if (rule_name == "genie") {
                set = select_genie(pos, {rule_cfg.d_c, rule_cfg.count, rule_cfg.seed});
            } else {
                const auto trajs = simulate_trajectories(pos, {rule_cfg.r, rule_cfg.speed, rule_cfg.corridor, rule_cfg.seed});
                set = select_sim_trajectory_triplets(
                          trajs, {rule_cfg.t_c, rule_cfg.count, derive_seed(rule_cfg.seed, Stage::Triplets)})
                          .triplets;
            }
            save_triplets(set, trip_out);
            fmt::print("wrote {} triplets to {} (violation rate {:.4f})\n", set.size(), trip_out,
                       violation_rate(set, pos));
        } else if (*trn) {
            const auto f = load_feature_cache(trn_features);
            const auto set = load_triplets(trn_triplets);
            net_cfg.input_dim = static_cast<std::size_t>(f.cols());
            net_cfg.init_seed = derive_seed(trn_seed, Stage::Network);
            train_cfg.seed = derive_seed(trn_seed, Stage::Training);
            const auto result = train(f, set, net_cfg, train_cfg, [](std::size_t epoch, double loss) {
                fmt::print("epoch {:3}  loss {:.6f}\n", epoch + 1, loss);
                std::fflush(stdout);
            });
            save_weights(result.net, trn_out);
        } else if (*chart) {
            const auto net = load_weights(chart_weights);
            const auto reduced = chart_src.reduced(chart_win.start, chart_win.count);
            const auto f = featurize_dataset(reduced, FeatureConfig{chart_sigma});
            ChartResult r;
            r.chart = forward_all(net, f);
            r.truth = positions(reduced);
            for (std::size_t i = 0; i < reduced.size(); ++i) {
                r.index.push_back(i);
                r.timestamps.push_back(reduced.datapoints[i].timestamp);
            }
            write_chart_csv(r, chart_out);
            fmt::print("wrote {} chart points to {}\n", r.size(), chart_out);
        } else if (*ev) {
            const auto r = read_chart_csv(ev_chart);
            Eigen::MatrixXd truth = r.truth;
            if (!ev_truth.empty()) {
                const auto all = positions(load_container_reduced(ev_truth, 0, 1));
                truth.resize(static_cast<Eigen::Index>(r.size()), all.cols());
                for (std::size_t i = 0; i < r.size(); ++i) {
                    if (r.index[i] >= static_cast<std::size_t>(all.rows()))
                        throw InvalidArgument(fmt::format("chart index {} beyond the {} truth points", r.index[i], all.rows()));
                    truth.row(static_cast<Eigen::Index>(i)) = all.row(static_cast<Eigen::Index>(r.index[i]));
                }
            }
            EvaluateOptions opt;
            opt.k = ev_k;
            opt.subsample = ev_subsample;
            opt.seed = ev_seed;
            const auto m = evaluate(truth, r.chart, opt);
            const auto text = to_text(m);
            if (ev_out.empty())
                std::cout << text;
            else
                write_text(ev_out, text);
            print_report(m);
        } else if (*run) {
            const auto out = run_pipeline(run_config(run_cfg, run_out, run_seed));
            print_report(out.metrics);
        } else if (*sdc || *sr) {
            const RunConfig c = run_config(run_cfg, run_out, run_seed);
            const auto values = parse_list(sweep_values);
            std::vector<SweepRow> rows;
            if (*sdc) {
                rows = sweep_dc(c, values);
            } else {
                std::vector<std::size_t> rs;
                for (double v : values) {
                    if (!(v >= 1.0) || v != std::floor(v)) throw ConfigError(fmt::format("trajectory count {} is not a positive integer", v));
                    rs.push_back(static_cast<std::size_t>(v));
                }
                rows = sweep_r(c, rs);
            }
            fmt::print("{:>10}  {:>7}  {:>7}  {:>7}\n", *sdc ? "d_c" : "r", "CT", "TW", "KS");
            for (const auto& row : rows)
                fmt::print("{:>10}  {:7.4f}  {:7.4f}  {:7.4f}\n", row.value, row.metrics.ct, row.metrics.tw, row.metrics.ks);
        } else if (*tr) {
            const auto out = transfer_evaluate(tr_weights, run_config(run_cfg, run_out, std::nullopt));
            print_report(out.metrics);
        } else if (*plot) {
            emit_plot(read_chart_csv(plot_chart), plot_out, plot_truth ? PlotSpace::Truth : PlotSpace::Chart);
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const InvalidArgument& e) {
        std::cerr << "invalid argument: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kStageError;
    }
    return 0;
}

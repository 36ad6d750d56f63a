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

#include "chartkit/pipeline.hpp"

#include "config_json.hpp"
#include "json_util.hpp"

#include "chartkit/error.hpp"

#include <fmt/format.h>
#include <openssl/evp.h>

#include <array>
#include <charconv>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <utility>

namespace chartkit {

using detail::Json;

std::string_view to_string(TripletRule rule) noexcept
{
    switch (rule) {
    case TripletRule::Time: return "time";
    case TripletRule::Genie: return "genie";
    case TripletRule::SimTrajectory: return "simtraj";
    }
    return "unknown";
}

// -- seeds ---------------------------------------------------------------------

namespace {

std::uint64_t seed_from(std::initializer_list<std::uint32_t> words)
{
    std::seed_seq seq(words);
    std::array<std::uint32_t, 2> out{};
    seq.generate(out.begin(), out.end());
    return (std::uint64_t{out[0]} << 32) | out[1];
}

std::uint32_t lo32(std::uint64_t v) { return static_cast<std::uint32_t>(v); }
std::uint32_t hi32(std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); }

} // namespace

std::uint64_t derive_seed(std::uint64_t master, Stage stage)
{
    return seed_from({lo32(master), hi32(master), 0x73746167u, static_cast<std::uint32_t>(stage)});
}

std::uint64_t sweep_row_seed(std::uint64_t master, std::size_t row)
{
    return seed_from({lo32(master), hi32(master), 0x726f7773u, static_cast<std::uint32_t>(row)});
}

void apply_master_seed(RunConfig& config, std::uint64_t seed)
{
    config.seed = seed;
    config.triplets.seed = derive_seed(seed, Stage::Triplets);
    config.network.init_seed = derive_seed(seed, Stage::Network);
    config.training.seed = derive_seed(seed, Stage::Training);
    config.metrics.seed = derive_seed(seed, Stage::Metrics);
}

// -- configuration ---------------------------------------------------------------

namespace {

TripletRule parse_rule(const std::string& s)
{
    if (s == "time") return TripletRule::Time;
    if (s == "genie") return TripletRule::Genie;
    if (s == "simtraj") return TripletRule::SimTrajectory;
    throw ConfigError("triplets.rule: expected \"time\", \"genie\" or \"simtraj\", got \"" + s + "\"");
}

std::filesystem::path resolve(const std::filesystem::path& p, const std::filesystem::path& base)
{
    return p.is_relative() && !base.empty() ? base / p : p;
}

} // namespace

RunConfig run_config_from_json_text(const std::string& text, const std::filesystem::path& base_dir)
{
    using namespace detail;
    const Json j = parse_json_text(text, "run config");
    reject_unknown_keys(j,
                        {"dataset", "synth", "subcarriers", "features", "triplets", "network", "training", "metrics",
                         "output_dir", "seed"},
                        "config");
    RunConfig c;
    std::uint64_t seed = 0;
    get_opt(j, "seed", seed, "config");
    apply_master_seed(c, seed);

    if (j.contains("dataset") == j.contains("synth"))
        throw ConfigError("config: exactly one of \"dataset\" and \"synth\" must be given");
    if (j.contains("dataset")) {
        std::string path;
        get_opt(j, "dataset", path, "config");
        c.dataset = resolve(path, base_dir);
    } else {
        c.synth = synth_config_from_json(j["synth"]);
    }
    if (j.contains("subcarriers")) {
        const auto& s = j["subcarriers"];
        reject_unknown_keys(s, {"start", "count"}, "subcarriers");
        if (s.contains("start")) {
            std::uint32_t start = 0;
            get_opt(s, "start", start, "subcarriers");
            c.w_start = start;
        }
        get_opt(s, "count", c.w_count, "subcarriers");
    }
    if (j.contains("features")) {
        reject_unknown_keys(j["features"], {"sigma"}, "features");
        get_opt(j["features"], "sigma", c.features.sigma, "features");
    }
    if (j.contains("triplets")) {
        const auto& t = j["triplets"];
        reject_unknown_keys(t, {"rule", "tc", "dc", "r", "speed", "corridor", "count", "seed"}, "triplets");
        if (t.contains("rule")) {
            std::string rule;
            get_opt(t, "rule", rule, "triplets");
            c.triplets.rule = parse_rule(rule);
        }
        get_opt(t, "tc", c.triplets.t_c, "triplets");
        get_opt(t, "dc", c.triplets.d_c, "triplets");
        get_opt(t, "r", c.triplets.r, "triplets");
        get_opt(t, "speed", c.triplets.speed, "triplets");
        get_opt(t, "corridor", c.triplets.corridor, "triplets");
        get_opt(t, "count", c.triplets.count, "triplets");
        get_opt(t, "seed", c.triplets.seed, "triplets");
    }
    if (j.contains("network")) {
        const auto& n = j["network"];
        reject_unknown_keys(n, {"hidden", "seed"}, "network");
        get_opt(n, "hidden", c.network.hidden, "network");
        get_opt(n, "seed", c.network.init_seed, "network");
    }
    if (j.contains("training")) {
        const auto& t = j["training"];
        reject_unknown_keys(
            t, {"margin", "learning_rate", "batch_size", "epochs", "beta1", "beta2", "adam_epsilon", "seed"}, "training");
        get_opt(t, "margin", c.training.margin, "training");
        get_opt(t, "learning_rate", c.training.learning_rate, "training");
        get_opt(t, "batch_size", c.training.batch_size, "training");
        get_opt(t, "epochs", c.training.epochs, "training");
        get_opt(t, "beta1", c.training.beta1, "training");
        get_opt(t, "beta2", c.training.beta2, "training");
        get_opt(t, "adam_epsilon", c.training.adam_epsilon, "training");
        get_opt(t, "seed", c.training.seed, "training");
    }
    if (j.contains("metrics")) {
        const auto& m = j["metrics"];
        reject_unknown_keys(m, {"k", "subsample", "seed", "normalization"}, "metrics");
        if (m.contains("k") && !m["k"].is_null()) {
            std::size_t k = 0;
            get_opt(m, "k", k, "metrics");
            c.metrics.k = k;
        }
        if (m.contains("subsample") && !m["subsample"].is_null()) {
            std::size_t s = 0;
            get_opt(m, "subsample", s, "metrics");
            c.metrics.subsample = s;
        }
        get_opt(m, "seed", c.metrics.seed, "metrics");
        if (m.contains("normalization")) {
            std::string norm;
            get_opt(m, "normalization", norm, "metrics");
            if (norm == "ground_truth")
                c.metrics.normalization = StressNormalization::GroundTruth;
            else if (norm == "scaled")
                c.metrics.normalization = StressNormalization::Scaled;
            else
                throw ConfigError("metrics.normalization: expected \"ground_truth\" or \"scaled\"");
        }
    }
    if (j.contains("output_dir")) {
        std::string out;
        get_opt(j, "output_dir", out, "config");
        c.output_dir = resolve(out, base_dir);
    }
    return c;
}

RunConfig load_run_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return run_config_from_json_text(ss.str(), path.parent_path());
}

std::string to_json_text(const RunConfig& c)
{
    Json j;
    if (c.dataset) j["dataset"] = c.dataset->string();
    if (c.synth) j["synth"] = detail::to_json(*c.synth);
    Json sub;
    if (c.w_start) sub["start"] = *c.w_start;
    sub["count"] = c.w_count;
    j["subcarriers"] = sub;
    j["features"] = {{"sigma", c.features.sigma}};
    j["triplets"] = {{"rule", std::string(to_string(c.triplets.rule))},
                     {"tc", c.triplets.t_c},
                     {"dc", c.triplets.d_c},
                     {"r", c.triplets.r},
                     {"speed", c.triplets.speed},
                     {"corridor", c.triplets.corridor},
                     {"count", c.triplets.count},
                     {"seed", c.triplets.seed}};
    j["network"] = {{"hidden", c.network.hidden}, {"seed", c.network.init_seed}};
    j["training"] = {{"margin", c.training.margin},
                     {"learning_rate", c.training.learning_rate},
                     {"batch_size", c.training.batch_size},
                     {"epochs", c.training.epochs},
                     {"beta1", c.training.beta1},
                     {"beta2", c.training.beta2},
                     {"adam_epsilon", c.training.adam_epsilon},
                     {"seed", c.training.seed}};
    Json m;
    m["k"] = c.metrics.k ? Json(*c.metrics.k) : Json(nullptr);
    m["subsample"] = c.metrics.subsample ? Json(*c.metrics.subsample) : Json(nullptr);
    m["seed"] = c.metrics.seed;
    m["normalization"] = c.metrics.normalization == StressNormalization::GroundTruth ? "ground_truth" : "scaled";
    j["metrics"] = m;
    if (!c.output_dir.empty()) j["output_dir"] = c.output_dir.string();
    j["seed"] = c.seed;
    return j.dump(2) + "\n";
}

// -- pipeline ----------------------------------------------------------------------

std::string sha256_hex(std::string_view bytes)
{
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw Error("SHA-256 digest failed");
    std::string hex;
    for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", md[i]);
    return hex;
}

namespace {

template <class Fn>
auto staged(const char* stage, Fn&& fn) -> decltype(fn())
{
    try {
        return fn();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(stage, e.what());
    }
}

void write_text(const std::filesystem::path& path, std::string_view text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.close();
    if (!out) throw IoError("write failed: " + path.string());
}

ChartResult make_chart(const ReducedDataset& reduced, Eigen::MatrixXd z)
{
    ChartResult r;
    r.index.resize(reduced.size());
    std::iota(r.index.begin(), r.index.end(), std::size_t{0});
    r.chart = std::move(z);
    r.truth = positions(reduced);
    r.timestamps.reserve(reduced.size());
    for (const auto& p : reduced.datapoints) r.timestamps.push_back(p.timestamp);
    return r;
}

void write_outputs(const std::filesystem::path& dir, const RunOutput& out)
{
    write_chart_csv(out.chart, dir / "chart.csv");
    write_text(dir / "metrics.json", to_text(out.metrics));
    emit_plot(out.chart, dir / "chart.svg", PlotSpace::Chart);
    emit_plot(out.chart, dir / "truth.svg", PlotSpace::Truth);
    Json prov;
    prov["weights_sha256"] = out.chart.provenance.weights_digest;
    prov["digest"] = out.chart.provenance.digest;
    prov["config"] = Json::parse(out.chart.provenance.config_json);
    write_text(dir / "provenance.json", prov.dump(2) + "\n");
}

} // namespace

PreparedData prepare_data(const RunConfig& config)
{
    if (config.dataset.has_value() == config.synth.has_value())
        throw ConfigError("exactly one of dataset and synth must be configured");
    PreparedData data;
    staged("load", [&] {
        if (config.synth) {
            data.synthesized = synthesize_los_dataset(*config.synth);
            const auto w = data.synthesized->subcarrier_count;
            const auto count = std::min(config.w_count, w);
            data.reduced =
                subcarrier_average(*data.synthesized, config.w_start.value_or(centre_window_start(w, count)), count);
        } else {
            const auto shape = read_container_shape(*config.dataset);
            const auto count = std::min(config.w_count, shape.subcarrier_count);
            data.reduced = load_container_reduced(
                *config.dataset, config.w_start.value_or(centre_window_start(shape.subcarrier_count, count)), count);
        }
    });
    data.features = staged("features", [&] { return featurize_dataset(data.reduced, config.features); });
    return data;
}

RunOutput run_pipeline(const RunConfig& config)
{
    return run_pipeline(config, prepare_data(config));
}

RunOutput run_pipeline(const RunConfig& config, const PreparedData& data)
{
    const Eigen::MatrixXd truth = positions(data.reduced);
    const TripletSet triplets = staged("triplets", [&] {
        const auto& t = config.triplets;
        switch (t.rule) {
        case TripletRule::Time: {
            std::vector<double> ts;
            for (const auto& p : data.reduced.datapoints) ts.push_back(p.timestamp);
            return select_time_based(std::span<const double>(ts), {t.t_c, t.count, t.seed});
        }
        case TripletRule::Genie: return select_genie(truth, {t.d_c, t.count, t.seed});
        case TripletRule::SimTrajectory: {
            const auto trajectories = simulate_trajectories(truth, {t.r, t.speed, t.corridor, t.seed});
            return select_sim_trajectory_triplets(trajectories,
                                                  {t.t_c, t.count, derive_seed(t.seed, Stage::Triplets)})
                .triplets;
        }
        }
        throw ConfigError("unknown triplet rule");
    });

    RunOutput out;
    out.triplet_violation_rate = violation_rate(triplets, truth);
    NetworkConfig net_config = config.network;
    net_config.input_dim = static_cast<std::size_t>(data.features.cols());
    TrainResult trained = staged("train", [&] { return train(data.features, triplets, net_config, config.training); });
    out.epoch_loss = trained.epoch_loss;

    out.chart = staged("chart", [&] { return make_chart(data.reduced, forward_all(trained.net, data.features)); });
    out.metrics = staged("evaluate", [&] { return evaluate(truth, out.chart.chart, config.metrics); });

    const std::string weights = serialize_weights(trained.net);
    out.chart.provenance.config_json = to_json_text(config);
    out.chart.provenance.weights_digest = sha256_hex(weights);
    out.chart.provenance.digest = sha256_hex(out.chart.provenance.config_json + out.chart.provenance.weights_digest);

    if (!config.output_dir.empty()) {
        staged("persist", [&] {
            const auto& dir = config.output_dir;
            std::filesystem::create_directories(dir);
            write_text(dir / "config.json", out.chart.provenance.config_json);
            if (data.synthesized) save_container(*data.synthesized, dir / "dataset.ccds");
            save_feature_cache(data.features, dir / "features.ccft");
            save_triplets(triplets, dir / "triplets.ccts");
            write_text(dir / "weights.ccnn", weights);
            std::string loss = "epoch,loss\n";
            for (std::size_t e = 0; e < out.epoch_loss.size(); ++e) loss += fmt::format("{},{}\n", e, out.epoch_loss[e]);
            write_text(dir / "loss.csv", loss);
            write_outputs(dir, out);
        });
    }
    return out;
}

namespace {

template <class Value, class Apply>
std::vector<SweepRow> sweep(const RunConfig& config, const std::vector<Value>& values, std::string_view parameter,
                            bool log_x, Apply&& apply)
{
    const PreparedData data = prepare_data(config);
    std::vector<SweepRow> rows;
    for (std::size_t i = 0; i < values.size(); ++i) {
        RunConfig row = config;
        apply(row, values[i]);
        apply_master_seed(row, sweep_row_seed(config.seed, i));
        if (!config.output_dir.empty()) row.output_dir = config.output_dir / fmt::format("{}_{:02}", parameter, i);
        rows.push_back({static_cast<double>(values[i]), run_pipeline(row, data).metrics});
    }
    if (!config.output_dir.empty()) {
        staged("persist", [&] {
            std::filesystem::create_directories(config.output_dir);
            write_sweep_csv(rows, parameter, config.output_dir / fmt::format("sweep_{}.csv", parameter));
            write_text(config.output_dir / fmt::format("sweep_{}.svg", parameter),
                       render_sweep_plot(rows, parameter, log_x));
        });
    }
    return rows;
}

} // namespace

std::vector<SweepRow> sweep_dc(const RunConfig& config, const std::vector<double>& dc_values)
{
    if (config.triplets.rule != TripletRule::Genie) throw ConfigError("sweep_dc needs the genie triplet rule");
    return sweep(config, dc_values, "dc", false, [](RunConfig& c, double v) { c.triplets.d_c = v; });
}

std::vector<SweepRow> sweep_r(const RunConfig& config, const std::vector<std::size_t>& r_values)
{
    if (config.triplets.rule != TripletRule::SimTrajectory)
        throw ConfigError("sweep_r needs the simtraj triplet rule");
    return sweep(config, r_values, "r", true, [](RunConfig& c, std::size_t v) { c.triplets.r = v; });
}

RunOutput transfer_evaluate(const std::filesystem::path& weights, const RunConfig& target)
{
    const ChartingNetwork net = staged("load", [&] { return load_weights(weights); });
    const PreparedData data = prepare_data(target);
    if (static_cast<std::size_t>(data.features.cols()) != net.config.input_dim)
        throw StageError("chart", "target feature dimension " + std::to_string(data.features.cols()) +
                                      " does not match network input " + std::to_string(net.config.input_dim));
    RunOutput out;
    out.chart = staged("chart", [&] { return make_chart(data.reduced, forward_all(net, data.features)); });
    out.metrics = staged("evaluate", [&] { return evaluate(positions(data.reduced), out.chart.chart, target.metrics); });
    out.chart.provenance.config_json = to_json_text(target);
    out.chart.provenance.weights_digest = sha256_hex(serialize_weights(net));
    out.chart.provenance.digest = sha256_hex(out.chart.provenance.config_json + out.chart.provenance.weights_digest);
    if (!target.output_dir.empty()) {
        staged("persist", [&] {
            std::filesystem::create_directories(target.output_dir);
            write_outputs(target.output_dir, out);
        });
    }
    return out;
}

// -- CSV -------------------------------------------------------------------------

void write_chart_csv(const ChartResult& r, const std::filesystem::path& path)
{
    const bool three_d = r.truth.cols() == 3;
    std::string text = three_d ? "index,z1,z2,x1,x2,x3,timestamp\n" : "index,z1,z2,x1,x2,timestamp\n";
    for (std::size_t i = 0; i < r.size(); ++i) {
        const auto row = static_cast<Eigen::Index>(i);
        text += fmt::format("{},{},{},{},{}", r.index[i], r.chart(row, 0), r.chart(row, 1), r.truth(row, 0),
                            r.truth(row, 1));
        if (three_d) text += fmt::format(",{}", r.truth(row, 2));
        text += fmt::format(",{}\n", r.timestamps[i]);
    }
    write_text(path, text);
}

namespace {

template <class T>
T parse_field(std::string_view s, std::size_t line)
{
    T value{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw InvalidArgument("chart CSV line " + std::to_string(line) + ": cannot parse \"" + std::string(s) + "\"");
    return value;
}

} // namespace

ChartResult read_chart_csv(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    std::getline(in, line);
    std::size_t columns = 0;
    if (line == "index,z1,z2,x1,x2,timestamp")
        columns = 6;
    else if (line == "index,z1,z2,x1,x2,x3,timestamp")
        columns = 7;
    else
        throw InvalidArgument(path.string() + ": unexpected chart CSV header \"" + line + "\"");
    std::vector<std::array<double, 7>> rows;
    std::vector<std::size_t> index;
    for (std::size_t lineno = 2; std::getline(in, line); ++lineno) {
        if (line.empty()) continue;
        std::vector<std::string_view> fields;
        std::string_view rest(line);
        for (;;) {
            const auto comma = rest.find(',');
            fields.push_back(rest.substr(0, comma));
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
        if (fields.size() != columns)
            throw InvalidArgument(path.string() + ": line " + std::to_string(lineno) + " has " +
                                  std::to_string(fields.size()) + " fields");
        index.push_back(parse_field<std::size_t>(fields[0], lineno));
        std::array<double, 7> v{};
        for (std::size_t k = 1; k < columns; ++k) v[k] = parse_field<double>(fields[k], lineno);
        rows.push_back(v);
    }
    ChartResult r;
    r.index = std::move(index);
    const auto n = static_cast<Eigen::Index>(rows.size());
    const Eigen::Index d = columns == 7 ? 3 : 2;
    r.chart.resize(n, 2);
    r.truth.resize(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& v = rows[static_cast<std::size_t>(i)];
        r.chart(i, 0) = v[1];
        r.chart(i, 1) = v[2];
        for (Eigen::Index k = 0; k < d; ++k) r.truth(i, k) = v[static_cast<std::size_t>(3 + k)];
        r.timestamps.push_back(v[columns - 1]);
    }
    return r;
}

void write_sweep_csv(const std::vector<SweepRow>& rows, std::string_view parameter, const std::filesystem::path& path)
{
    std::string text = fmt::format("{},ct,tw,ks,k_used,n_used\n", parameter);
    for (const auto& r : rows)
        text += fmt::format("{},{},{},{},{},{}\n", r.value, r.metrics.ct, r.metrics.tw, r.metrics.ks, r.metrics.k_used,
                            r.metrics.n_used);
    write_text(path, text);
}

} // namespace chartkit

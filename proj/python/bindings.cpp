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

// Python bindings: module chartkit._chartkit.

#include "chartkit/chartnet.hpp"
#include "chartkit/dataset.hpp"
#include "chartkit/error.hpp"
#include "chartkit/features.hpp"
#include "chartkit/metrics.hpp"
#include "chartkit/pipeline.hpp"
#include "chartkit/triplets.hpp"

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace chartkit;

namespace {

using TripletArray = py::array_t<std::uint64_t>;

TripletArray to_array(const TripletSet& set)
{
    TripletArray out({static_cast<py::ssize_t>(set.size()), py::ssize_t{3}});
    auto v = out.mutable_unchecked<2>();
    for (std::size_t k = 0; k < set.size(); ++k) {
        const auto r = static_cast<py::ssize_t>(k);
        v(r, 0) = set.items[k].anchor;
        v(r, 1) = set.items[k].positive;
        v(r, 2) = set.items[k].negative;
    }
    return out;
}

TripletSet from_array(const py::array_t<std::uint64_t, py::array::c_style | py::array::forcecast>& a)
{
    if (a.ndim() != 2 || a.shape(1) != 3) throw InvalidArgument("triplets must have shape (count, 3)");
    const auto v = a.unchecked<2>();
    TripletSet set;
    set.items.reserve(static_cast<std::size_t>(a.shape(0)));
    for (py::ssize_t k = 0; k < a.shape(0); ++k) set.items.push_back({v(k, 0), v(k, 1), v(k, 2)});
    return set;
}

py::dict report_dict(const MetricsReport& m)
{
    py::dict d;
    d["ct"] = m.ct;
    d["tw"] = m.tw;
    d["ks"] = m.ks;
    d["k_used"] = m.k_used;
    d["n_used"] = m.n_used;
    d["seed"] = m.seed;
    return d;
}

py::dict output_dict(const RunOutput& out)
{
    py::dict d;
    d["metrics"] = report_dict(out.metrics);
    d["chart"] = out.chart.chart;
    d["truth"] = out.chart.truth;
    d["timestamps"] = out.chart.timestamps;
    d["epoch_loss"] = out.epoch_loss;
    d["triplet_violation_rate"] = out.triplet_violation_rate;
    d["digest"] = out.chart.provenance.digest;
    return d;
}

} // namespace

PYBIND11_MODULE(_chartkit, m)
{
    m.doc() = "Channel charting from CSI datasets with triplet-loss networks";

    auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<InvalidArgument>(m, "InvalidArgument", error.ptr());
    py::register_exception<ConfigError>(m, "ConfigError", error.ptr());
    py::register_exception<IoError>(m, "IoError", error.ptr());
    py::register_exception<LoadError>(m, "LoadError", error.ptr());
    py::register_exception<SelectionError>(m, "SelectionError", error.ptr());
    py::register_exception<DivergenceError>(m, "DivergenceError", error.ptr());
    py::register_exception<StageError>(m, "StageError", error.ptr());

    // -- datasets
    py::class_<Dataset>(m, "Dataset")
        .def_readonly("name", &Dataset::name)
        .def_readonly("antenna_count", &Dataset::antenna_count)
        .def_readonly("subcarrier_count", &Dataset::subcarrier_count)
        .def_readonly("position_dim", &Dataset::position_dim)
        .def("__len__", &Dataset::size)
        .def("positions", [](const Dataset& d) { return positions(d); })
        .def("timestamps", [](const Dataset& d) { return timestamps(d); })
        .def(
            "csi", [](const Dataset& d, std::size_t i) -> CsiMatrix {
                if (i >= d.size()) throw py::index_error("datapoint index out of range");
                return d.datapoints[i].csi;
            },
            py::arg("index"));

    py::class_<ReducedDataset>(m, "ReducedDataset")
        .def_readonly("antenna_count", &ReducedDataset::antenna_count)
        .def("__len__", &ReducedDataset::size)
        .def("positions", [](const ReducedDataset& d) { return positions(d); })
        .def("h", [](const ReducedDataset& d) {
            Eigen::MatrixXcd h(static_cast<Eigen::Index>(d.size()), static_cast<Eigen::Index>(d.antenna_count));
            for (std::size_t i = 0; i < d.size(); ++i) h.row(static_cast<Eigen::Index>(i)) = d.datapoints[i].h.transpose();
            return h;
        });

    m.def("load_container", &load_container, py::arg("path"));
    m.def("load_container_reduced", &load_container_reduced, py::arg("path"), py::arg("w_start"), py::arg("w_count"));
    m.def("save_container", &save_container, py::arg("dataset"), py::arg("path"));
    m.def(
        "synthesize", [](const std::string& json) { return synthesize_los_dataset(synth_config_from_json_text(json)); },
        py::arg("config_json") = "{}", "Synthetic line-of-sight dataset from a JSON description.");
    m.def("subcarrier_average", &subcarrier_average, py::arg("dataset"), py::arg("w_start"), py::arg("w_count"));
    m.def("centre_window_start", &centre_window_start, py::arg("subcarrier_count"), py::arg("w_count"));

    // -- features
    m.def(
        "scaled_r2m", [](const CsiVector& h, double sigma) { return scaled_r2m(h, FeatureConfig{sigma}); },
        py::arg("h"), py::arg("sigma") = 8.0);
    m.def(
        "featurize", [](const ReducedDataset& d, double sigma) { return featurize_dataset(d, FeatureConfig{sigma}); },
        py::arg("reduced"), py::arg("sigma") = 8.0);

    // -- triplets
    m.def(
        "select_time_based",
        [](const std::vector<double>& t, double t_c, std::size_t count, std::uint64_t seed) {
            return to_array(select_time_based(std::span<const double>(t), {t_c, count, seed}));
        },
        py::arg("timestamps"), py::arg("t_c") = 1.5, py::arg("count") = 1'200'000, py::arg("seed") = 0);
    m.def(
        "select_genie",
        [](const Eigen::MatrixXd& x, double d_c, std::size_t count, std::uint64_t seed) {
            return to_array(select_genie(x, {d_c, count, seed}));
        },
        py::arg("positions"), py::arg("d_c") = 1.5, py::arg("count") = 1'200'000, py::arg("seed") = 0);
    m.def(
        "select_sim_trajectory",
        [](const Eigen::MatrixXd& x, std::size_t r, double t_c, std::size_t count, std::uint64_t seed, double speed,
           double corridor) {
            const auto trajs = simulate_trajectories(x, {r, speed, corridor, seed});
            return to_array(
                select_sim_trajectory_triplets(trajs, {t_c, count, derive_seed(seed, Stage::Triplets)}).triplets);
        },
        py::arg("positions"), py::arg("r") = 30'000, py::arg("t_c") = 1.5, py::arg("count") = 1'200'000,
        py::arg("seed") = 0, py::arg("speed") = 1.0, py::arg("corridor") = 0.25);
    m.def(
        "violation_rate",
        [](const py::array_t<std::uint64_t, py::array::c_style | py::array::forcecast>& t, const Eigen::MatrixXd& x) {
            return violation_rate(from_array(t), x);
        },
        py::arg("triplets"), py::arg("positions"));

    // -- network
    py::class_<ChartingNetwork>(m, "ChartingNetwork")
        .def_property_readonly("input_dim", [](const ChartingNetwork& n) { return n.config.input_dim; })
        .def_property_readonly("hidden", [](const ChartingNetwork& n) { return n.config.hidden; })
        .def("forward", [](const ChartingNetwork& n, const FeatureMatrix& f) { return forward_all(n, f); },
             py::arg("features"))
        .def("save", [](const ChartingNetwork& n, const std::filesystem::path& p) { save_weights(n, p); }, py::arg("path"))
        .def("weights_bytes", [](const ChartingNetwork& n) { return py::bytes(serialize_weights(n)); });

    m.def(
        "train",
        [](const FeatureMatrix& features, const py::array_t<std::uint64_t, py::array::c_style | py::array::forcecast>& t,
           std::vector<std::size_t> hidden, std::size_t epochs, std::size_t batch_size, double learning_rate,
           double margin, std::uint64_t seed) {
            NetworkConfig nc;
            nc.input_dim = static_cast<std::size_t>(features.cols());
            nc.hidden = std::move(hidden);
            nc.init_seed = derive_seed(seed, Stage::Network);
            TrainConfig tc;
            tc.epochs = epochs;
            tc.batch_size = batch_size;
            tc.learning_rate = learning_rate;
            tc.margin = margin;
            tc.seed = derive_seed(seed, Stage::Training);
            const auto set = from_array(t);
            TrainResult r;
            {
                py::gil_scoped_release release;
                r = train(features, set, nc, tc);
            }
            return py::make_tuple(r.net, r.epoch_loss);
        },
        py::arg("features"), py::arg("triplets"), py::arg("hidden") = std::vector<std::size_t>{512, 256, 128, 64},
        py::arg("epochs") = 10, py::arg("batch_size") = 512, py::arg("learning_rate") = 1e-3, py::arg("margin") = 1.0,
        py::arg("seed") = 0, "Returns (network, per-epoch mean loss).");
    m.def("load_weights", py::overload_cast<const std::filesystem::path&>(&load_weights), py::arg("path"));

    // -- metrics
    m.def("rank_matrix", &rank_matrix, py::arg("points"));
    m.def("default_neighbourhood", &default_neighbourhood, py::arg("n"));
    m.def("trustworthiness", &trustworthiness, py::arg("truth"), py::arg("chart"), py::arg("k"));
    m.def("continuity", &continuity, py::arg("truth"), py::arg("chart"), py::arg("k"));
    m.def(
        "kruskal_stress",
        [](const Eigen::MatrixXd& x, const Eigen::MatrixXd& z, bool scaled) {
            return kruskal_stress(x, z, scaled ? StressNormalization::Scaled : StressNormalization::GroundTruth);
        },
        py::arg("truth"), py::arg("chart"), py::arg("scaled") = false);
    m.def(
        "evaluate",
        [](const Eigen::MatrixXd& x, const Eigen::MatrixXd& z, std::optional<std::size_t> k,
           std::optional<std::size_t> subsample, std::uint64_t seed) {
            EvaluateOptions o;
            o.k = k;
            o.subsample = subsample;
            o.seed = seed;
            return report_dict(evaluate(x, z, o));
        },
        py::arg("truth"), py::arg("chart"), py::arg("k") = py::none(), py::arg("subsample") = py::none(),
        py::arg("seed") = 0);

    // -- pipeline
    m.def(
        "run",
        [](const std::string& config_json, const std::filesystem::path& base_dir) {
            const RunConfig c = run_config_from_json_text(config_json, base_dir);
            RunOutput out;
            {
                py::gil_scoped_release release;
                out = run_pipeline(c);
            }
            return output_dict(out);
        },
        py::arg("config_json"), py::arg("base_dir") = std::filesystem::path{},
        "Runs the whole pipeline from a JSON configuration.");
    m.def(
        "transfer",
        [](const std::filesystem::path& weights, const std::string& target_json, const std::filesystem::path& base_dir) {
            return output_dict(transfer_evaluate(weights, run_config_from_json_text(target_json, base_dir)));
        },
        py::arg("weights"), py::arg("target_json"), py::arg("base_dir") = std::filesystem::path{});
    m.def("render_plot",
          [](const Eigen::MatrixXd& chart, const Eigen::MatrixXd& truth) {
              ChartResult r;
              r.chart = chart;
              r.truth = truth;
              r.timestamps.assign(static_cast<std::size_t>(chart.rows()), 0.0);
              for (Eigen::Index i = 0; i < chart.rows(); ++i) r.index.push_back(static_cast<std::size_t>(i));
              return render_plot(r);
          },
          py::arg("chart"), py::arg("truth"));
}

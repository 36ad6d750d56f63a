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

#include "binary_io.hpp"
#include "config_json.hpp"

#include "chartkit/error.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <numeric>
#include <random>

namespace chartkit {

namespace {

constexpr double kSpeedOfLight = 299792458.0;
constexpr std::uint64_t kHeaderBytes = 4 + 4 + 8 + 4 + 4 + 4;

struct ContainerHeader {
    std::uint64_t n = 0;
    std::uint32_t b = 0;
    std::uint32_t w = 0;
    std::uint32_t d = 0;

    std::uint64_t record_bytes() const { return 8 + 8ull * d + 8ull * b * w; }
};

ContainerHeader read_header(detail::BinaryReader& in)
{
    in.expect_magic("CCDS");
    in.expect_version(kContainerVersion);
    ContainerHeader h;
    h.n = in.read<std::uint64_t>("record count");
    if (h.n == 0) in.fail(LoadError::Kind::MalformedHeader, 8, "record count is zero");
    h.b = in.read<std::uint32_t>("antenna count");
    if (h.b == 0) in.fail(LoadError::Kind::MalformedHeader, 16, "antenna count is zero");
    h.w = in.read<std::uint32_t>("subcarrier count");
    if (h.w == 0) in.fail(LoadError::Kind::MalformedHeader, 20, "subcarrier count is zero");
    h.d = in.read<std::uint32_t>("position dimension");
    if (h.d != 2 && h.d != 3) in.fail(LoadError::Kind::MalformedHeader, 24, "position dimension must be 2 or 3");
    return h;
}

// Reads every record, handing (timestamp, position, csi) to `sink`. The csi
// buffer holds B*W interleaved values, antenna-major.
void read_records(detail::BinaryReader& in, const ContainerHeader& h,
                  const std::function<void(double, const Position&, std::span<const std::complex<float>>)>& sink)
{
    std::vector<std::complex<float>> csi(static_cast<std::size_t>(h.b) * h.w);
    Position pos(h.d);
    for (std::uint64_t n = 0; n < h.n; ++n) {
        const auto record_start = in.offset();
        const auto t = in.read<double>("timestamp");
        if (!std::isfinite(t)) in.fail(LoadError::Kind::NonFinite, record_start, "non-finite timestamp");
        for (std::uint32_t k = 0; k < h.d; ++k) {
            const auto at = in.offset();
            pos[k] = in.read<double>("position");
            if (!std::isfinite(pos[k])) in.fail(LoadError::Kind::NonFinite, at, "non-finite position");
        }
        const auto csi_start = in.offset();
        in.read_span(std::span<std::complex<float>>(csi), "csi");
        for (std::size_t i = 0; i < csi.size(); ++i) {
            if (!std::isfinite(csi[i].real()))
                in.fail(LoadError::Kind::NonFinite, csi_start + 8 * i, "non-finite csi");
            if (!std::isfinite(csi[i].imag()))
                in.fail(LoadError::Kind::NonFinite, csi_start + 8 * i + 4, "non-finite csi");
        }
        sink(t, pos, csi);
    }
    if (in.remaining() != 0) in.fail(LoadError::Kind::MalformedHeader, in.offset(), "trailing bytes after last record");
}

template <class Point>
void sort_by_timestamp(std::vector<Point>& points)
{
    std::stable_sort(points.begin(), points.end(),
                     [](const Point& a, const Point& b) { return a.timestamp < b.timestamp; });
}

std::size_t reserve_hint(detail::BinaryReader& in, const ContainerHeader& h)
{
    return static_cast<std::size_t>(std::min<std::uint64_t>(h.n, in.remaining() / h.record_bytes() + 1));
}

} // namespace

void validate(const Dataset& dataset)
{
    if (dataset.datapoints.empty()) throw InvalidArgument("dataset must contain at least one datapoint");
    if (dataset.antenna_count == 0 || dataset.subcarrier_count == 0)
        throw InvalidArgument("antenna and subcarrier counts must be positive");
    if (dataset.position_dim != 2 && dataset.position_dim != 3)
        throw InvalidArgument("position dimension must be 2 or 3");
    for (std::size_t n = 0; n < dataset.size(); ++n) {
        const auto& p = dataset.datapoints[n];
        if (p.csi.rows() != dataset.antenna_count || p.csi.cols() != dataset.subcarrier_count)
            throw InvalidArgument("datapoint " + std::to_string(n) + " has a csi matrix of the wrong shape");
        if (p.position.size() != dataset.position_dim)
            throw InvalidArgument("datapoint " + std::to_string(n) + " has a position of the wrong dimension");
        if (!std::isfinite(p.timestamp) || !p.position.allFinite())
            throw InvalidArgument("datapoint " + std::to_string(n) + " has non-finite position or timestamp");
        for (Eigen::Index i = 0; i < p.csi.size(); ++i) {
            const auto v = p.csi.data()[i];
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
                throw InvalidArgument("datapoint " + std::to_string(n) + " has non-finite csi");
        }
    }
}

Eigen::MatrixXd positions(const Dataset& dataset)
{
    Eigen::MatrixXd x(static_cast<Eigen::Index>(dataset.size()), dataset.position_dim);
    for (std::size_t n = 0; n < dataset.size(); ++n) x.row(static_cast<Eigen::Index>(n)) = dataset.datapoints[n].position;
    return x;
}

Eigen::MatrixXd positions(const ReducedDataset& dataset)
{
    Eigen::MatrixXd x(static_cast<Eigen::Index>(dataset.size()), dataset.position_dim);
    for (std::size_t n = 0; n < dataset.size(); ++n) x.row(static_cast<Eigen::Index>(n)) = dataset.datapoints[n].position;
    return x;
}

std::vector<double> timestamps(const Dataset& dataset)
{
    std::vector<double> t(dataset.size());
    for (std::size_t n = 0; n < dataset.size(); ++n) t[n] = dataset.datapoints[n].timestamp;
    return t;
}

ContainerShape read_container_shape(const std::filesystem::path& path)
{
    detail::BinaryReader in(path);
    const auto h = read_header(in);
    return {h.n, h.b, h.w, h.d};
}

Dataset load_container(const std::filesystem::path& path)
{
    detail::BinaryReader in(path);
    const auto h = read_header(in);
    Dataset ds;
    ds.name = path.stem().string();
    ds.antenna_count = h.b;
    ds.subcarrier_count = h.w;
    ds.position_dim = h.d;
    ds.datapoints.reserve(reserve_hint(in, h));
    read_records(in, h, [&](double t, const Position& pos, std::span<const std::complex<float>> csi) {
        CsiDatapoint p;
        p.timestamp = t;
        p.position = pos;
        p.csi = Eigen::Map<const CsiMatrix>(csi.data(), h.b, h.w);
        ds.datapoints.push_back(std::move(p));
    });
    sort_by_timestamp(ds.datapoints);
    return ds;
}

ReducedDataset load_container_reduced(const std::filesystem::path& path, std::uint32_t w_start, std::uint32_t w_count)
{
    detail::BinaryReader in(path);
    const auto h = read_header(in);
    if (w_count == 0 || std::uint64_t{w_start} + w_count > h.w)
        throw InvalidArgument("subcarrier window [" + std::to_string(w_start) + ", " +
                              std::to_string(std::uint64_t{w_start} + w_count) + ") exceeds W = " + std::to_string(h.w));
    ReducedDataset ds;
    ds.name = path.stem().string();
    ds.antenna_count = h.b;
    ds.position_dim = h.d;
    ds.datapoints.reserve(reserve_hint(in, h));
    read_records(in, h, [&](double t, const Position& pos, std::span<const std::complex<float>> csi) {
        ReducedDatapoint p;
        p.timestamp = t;
        p.position = pos;
        p.h.resize(h.b);
        for (std::uint32_t b = 0; b < h.b; ++b) {
            std::complex<double> acc = 0.0;
            for (std::uint32_t w = w_start; w < w_start + w_count; ++w)
                acc += std::complex<double>(csi[static_cast<std::size_t>(b) * h.w + w]);
            p.h[b] = acc / static_cast<double>(w_count);
        }
        ds.datapoints.push_back(std::move(p));
    });
    sort_by_timestamp(ds.datapoints);
    return ds;
}

void save_container(const Dataset& dataset, const std::filesystem::path& path)
{
    validate(dataset);
    detail::write_binary_file(path, [&](detail::BinaryWriter& out) {
    out.magic("CCDS");
    out.write(kContainerVersion);
    out.write(static_cast<std::uint64_t>(dataset.size()));
    out.write(dataset.antenna_count);
    out.write(dataset.subcarrier_count);
    out.write(dataset.position_dim);
    for (const auto& p : dataset.datapoints) {
        out.write(p.timestamp);
        out.write_span(std::span<const double>(p.position.data(), static_cast<std::size_t>(p.position.size())));
        out.write_span(std::span<const std::complex<float>>(p.csi.data(), static_cast<std::size_t>(p.csi.size())));
    }
    });
}

ReducedDataset subcarrier_average(const Dataset& dataset, std::uint32_t w_start, std::uint32_t w_count)
{
    if (w_count == 0 || std::uint64_t{w_start} + w_count > dataset.subcarrier_count)
        throw InvalidArgument("subcarrier window [" + std::to_string(w_start) + ", " +
                              std::to_string(std::uint64_t{w_start} + w_count) +
                              ") exceeds W = " + std::to_string(dataset.subcarrier_count));
    ReducedDataset out;
    out.name = dataset.name;
    out.antenna_count = dataset.antenna_count;
    out.position_dim = dataset.position_dim;
    out.datapoints.reserve(dataset.size());
    for (const auto& p : dataset.datapoints) {
        ReducedDatapoint r;
        r.position = p.position;
        r.timestamp = p.timestamp;
        r.h = p.csi.middleCols(w_start, w_count).cast<std::complex<double>>().rowwise().mean();
        out.datapoints.push_back(std::move(r));
    }
    return out;
}

std::uint32_t centre_window_start(std::uint32_t subcarrier_count, std::uint32_t w_count)
{
    if (w_count >= subcarrier_count) return 0;
    return subcarrier_count / 2 - (w_count + 1) / 2;
}

// -- synthesis ---------------------------------------------------------------

Eigen::MatrixXd antenna_layout(const SynthConfig& config)
{
    if (config.antenna_positions.size() != 0) return config.antenna_positions;
    const Eigen::VectorXd centre = 0.5 * (config.area_min + config.area_max);
    const double radius = 0.5 * (config.area_max - config.area_min).head(2).norm() + config.antenna_ring_margin;
    Eigen::MatrixXd ant(config.antenna_count, config.position_dim);
    for (std::uint32_t b = 0; b < config.antenna_count; ++b) {
        const double phi = 2.0 * std::numbers::pi * (b + 0.5) / config.antenna_count;
        ant.row(b) = centre.transpose();
        ant(b, 0) += radius * std::cos(phi);
        ant(b, 1) += radius * std::sin(phi);
    }
    return ant;
}

namespace {

// Boustrophedon polyline through the first two coordinates of the area.
std::vector<Eigen::Vector2d> meander_vertices(const SynthConfig& c)
{
    std::vector<Eigen::Vector2d> v;
    const double x0 = c.area_min[0], x1 = c.area_max[0];
    const double y0 = c.area_min[1], y1 = c.area_max[1];
    const auto lanes = static_cast<std::size_t>(std::floor((y1 - y0) / c.lane_spacing + 1e-9)) + 1;
    for (std::size_t k = 0; k < lanes; ++k) {
        const double y = y0 + static_cast<double>(k) * c.lane_spacing;
        if (k % 2 == 0) {
            v.emplace_back(x0, y);
            v.emplace_back(x1, y);
        } else {
            v.emplace_back(x1, y);
            v.emplace_back(x0, y);
        }
    }
    return v;
}

double polyline_length(const std::vector<Eigen::Vector2d>& v)
{
    double len = 0.0;
    for (std::size_t i = 1; i < v.size(); ++i) len += (v[i] - v[i - 1]).norm();
    return len;
}

// Point at arclength s, ping-ponging at the ends.
Eigen::Vector2d polyline_point(const std::vector<Eigen::Vector2d>& v, double total, double s)
{
    if (total <= 0.0) return v.front();
    s = std::fmod(s, 2.0 * total);
    if (s > total) s = 2.0 * total - s;
    for (std::size_t i = 1; i < v.size(); ++i) {
        const double seg = (v[i] - v[i - 1]).norm();
        if (s <= seg || i + 1 == v.size()) {
            if (seg == 0.0) return v[i];
            return v[i - 1] + std::min(s / seg, 1.0) * (v[i] - v[i - 1]);
        }
        s -= seg;
    }
    return v.back();
}

std::vector<Eigen::Vector2d> trajectory_xy(const SynthConfig& c, std::mt19937_64& rng, std::vector<double>& times)
{
    std::vector<Eigen::Vector2d> xy(c.n);
    times.resize(c.n);
    if (c.trajectory == TrajectoryStyle::Meander) {
        const auto verts = meander_vertices(c);
        const double total = polyline_length(verts);
        double dt = c.sample_interval;
        if (dt <= 0.0) dt = (c.n > 1 && total > 0.0) ? total / c.speed / static_cast<double>(c.n - 1) : 0.1;
        for (std::size_t n = 0; n < c.n; ++n) {
            times[n] = static_cast<double>(n) * dt;
            xy[n] = polyline_point(verts, total, c.speed * times[n]);
        }
        return xy;
    }
    const double dt = c.sample_interval > 0.0 ? c.sample_interval : 0.1;
    std::uniform_real_distribution<double> ux(c.area_min[0], std::nextafter(c.area_max[0], INFINITY));
    std::uniform_real_distribution<double> uy(c.area_min[1], std::nextafter(c.area_max[1], INFINITY));
    Eigen::Vector2d here(ux(rng), uy(rng));
    Eigen::Vector2d target(ux(rng), uy(rng));
    const double step = c.speed * dt;
    for (std::size_t n = 0; n < c.n; ++n) {
        times[n] = static_cast<double>(n) * dt;
        xy[n] = here;
        double left = step;
        // Walk `step` meters, picking new waypoints as they are reached.
        for (int guard = 0; left > 0.0 && guard < 1000; ++guard) {
            const double dist = (target - here).norm();
            if (dist > left) {
                here += (target - here) * (left / dist);
                left = 0.0;
            } else {
                here = target;
                left -= dist;
                target = Eigen::Vector2d(ux(rng), uy(rng));
            }
        }
    }
    return xy;
}

} // namespace

Dataset synthesize_los_dataset(const SynthConfig& config)
{
    if (config.n == 0) throw InvalidArgument("synthetic dataset needs n >= 1");
    if (config.antenna_count == 0) throw InvalidArgument("synthetic dataset needs at least one antenna");
    if (config.subcarrier_count == 0) throw InvalidArgument("synthetic dataset needs at least one subcarrier");
    if (config.position_dim != 2 && config.position_dim != 3)
        throw InvalidArgument("position dimension must be 2 or 3");
    if (config.area_min.size() != config.position_dim || config.area_max.size() != config.position_dim)
        throw InvalidArgument("area bounds must have one entry per position dimension");
    if ((config.area_max.array() < config.area_min.array()).any()) throw InvalidArgument("area_max < area_min");
    if (!(config.speed > 0.0)) throw InvalidArgument("speed must be positive");
    if (config.trajectory == TrajectoryStyle::Meander && !(config.lane_spacing > 0.0))
        throw InvalidArgument("lane spacing must be positive");

    const Eigen::MatrixXd ant = antenna_layout(config);
    if (ant.rows() != config.antenna_count || ant.cols() != config.position_dim)
        throw InvalidArgument("antenna positions must be B x D");
    for (Eigen::Index a = 0; a < ant.rows(); ++a)
        for (Eigen::Index b = a + 1; b < ant.rows(); ++b)
            if (ant.row(a) == ant.row(b)) throw InvalidArgument("antenna positions must be distinct");

    std::mt19937_64 rng(config.seed);
    std::vector<double> times;
    const auto xy = trajectory_xy(config, rng, times);
    std::normal_distribution<double> noise(0.0, 1.0);

    std::vector<double> freq(config.subcarrier_count);
    for (std::uint32_t w = 0; w < config.subcarrier_count; ++w)
        freq[w] = config.carrier_hz +
                  (static_cast<double>(w) - 0.5 * static_cast<double>(config.subcarrier_count)) *
                      config.subcarrier_spacing_hz;

    Dataset ds;
    ds.name = config.name;
    ds.antenna_count = config.antenna_count;
    ds.subcarrier_count = config.subcarrier_count;
    ds.position_dim = config.position_dim;
    ds.datapoints.reserve(config.n);
    const Eigen::VectorXd centre = 0.5 * (config.area_min + config.area_max);
    for (std::size_t n = 0; n < config.n; ++n) {
        CsiDatapoint p;
        p.timestamp = times[n];
        p.position = centre;
        p.position[0] = xy[n][0];
        p.position[1] = xy[n][1];
        if (config.jitter > 0.0)
            for (std::uint32_t k = 0; k < 2; ++k)
                p.position[k] = std::clamp(p.position[k] + config.jitter * noise(rng), config.area_min[k],
                                           config.area_max[k]);
        p.csi.resize(config.antenna_count, config.subcarrier_count);
        for (std::uint32_t b = 0; b < config.antenna_count; ++b) {
            const double d = (p.position - ant.row(b).transpose()).norm();
            if (d == 0.0)
                throw InvalidArgument("datapoint " + std::to_string(n) + " coincides with antenna " + std::to_string(b));
            const double amp = std::pow(d, -0.5 * config.path_loss_exponent);
            for (std::uint32_t w = 0; w < config.subcarrier_count; ++w) {
                const double phase = -2.0 * std::numbers::pi * freq[w] * d / kSpeedOfLight;
                p.csi(b, w) = std::complex<float>(std::polar(amp, phase));
            }
        }
        ds.datapoints.push_back(std::move(p));
    }
    return ds;
}

namespace detail {

SynthConfig synth_config_from_json(const Json& j)
{
    const std::string where = "synth";
    reject_unknown_keys(j,
                        {"name", "n", "antennas", "subcarriers", "dim", "area_min", "area_max", "antenna_positions",
                         "antenna_ring_margin", "carrier_hz", "subcarrier_spacing_hz", "path_loss_exponent",
                         "trajectory", "speed", "sample_interval", "lane_spacing", "jitter", "seed"},
                        where);
    SynthConfig c;
    get_opt(j, "name", c.name, where);
    get_opt(j, "n", c.n, where);
    get_opt(j, "antennas", c.antenna_count, where);
    get_opt(j, "subcarriers", c.subcarrier_count, where);
    get_opt(j, "dim", c.position_dim, where);
    if (c.position_dim == 3) {
        c.area_min = Eigen::Vector3d(0.0, 0.0, 0.0);
        c.area_max = Eigen::Vector3d(10.0, 10.0, 0.0);
    }
    if (j.contains("area_min")) c.area_min = to_vector(j["area_min"], where + ".area_min");
    if (j.contains("area_max")) c.area_max = to_vector(j["area_max"], where + ".area_max");
    if (j.contains("antenna_positions")) {
        c.antenna_positions = to_matrix(j["antenna_positions"], where + ".antenna_positions");
        if (!j.contains("antennas")) c.antenna_count = static_cast<std::uint32_t>(c.antenna_positions.rows());
    }
    get_opt(j, "antenna_ring_margin", c.antenna_ring_margin, where);
    get_opt(j, "carrier_hz", c.carrier_hz, where);
    get_opt(j, "subcarrier_spacing_hz", c.subcarrier_spacing_hz, where);
    get_opt(j, "path_loss_exponent", c.path_loss_exponent, where);
    if (j.contains("trajectory")) {
        std::string style;
        get_opt(j, "trajectory", style, where);
        if (style == "meander")
            c.trajectory = TrajectoryStyle::Meander;
        else if (style == "random_waypoint")
            c.trajectory = TrajectoryStyle::RandomWaypoint;
        else
            throw ConfigError(where + ".trajectory: expected \"meander\" or \"random_waypoint\"");
    }
    get_opt(j, "speed", c.speed, where);
    get_opt(j, "sample_interval", c.sample_interval, where);
    get_opt(j, "lane_spacing", c.lane_spacing, where);
    get_opt(j, "jitter", c.jitter, where);
    get_opt(j, "seed", c.seed, where);
    return c;
}

Json to_json(const SynthConfig& c)
{
    Json j;
    j["name"] = c.name;
    j["n"] = c.n;
    j["antennas"] = c.antenna_count;
    j["subcarriers"] = c.subcarrier_count;
    j["dim"] = c.position_dim;
    j["area_min"] = from_vector(c.area_min);
    j["area_max"] = from_vector(c.area_max);
    if (c.antenna_positions.size() != 0) j["antenna_positions"] = from_matrix(c.antenna_positions);
    j["antenna_ring_margin"] = c.antenna_ring_margin;
    j["carrier_hz"] = c.carrier_hz;
    j["subcarrier_spacing_hz"] = c.subcarrier_spacing_hz;
    j["path_loss_exponent"] = c.path_loss_exponent;
    j["trajectory"] = c.trajectory == TrajectoryStyle::Meander ? "meander" : "random_waypoint";
    j["speed"] = c.speed;
    j["sample_interval"] = c.sample_interval;
    j["lane_spacing"] = c.lane_spacing;
    j["jitter"] = c.jitter;
    j["seed"] = c.seed;
    return j;
}

} // namespace detail

SynthConfig load_synth_config(const std::filesystem::path& path)
{
    return detail::synth_config_from_json(detail::read_json_file(path));
}

SynthConfig synth_config_from_json_text(const std::string& text)
{
    return detail::synth_config_from_json(detail::parse_json_text(text, "synth config"));
}

} // namespace chartkit

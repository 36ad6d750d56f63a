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

#include "chartkit/chartnet.hpp"

#include "binary_io.hpp"

#include "chartkit/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

namespace chartkit {

namespace {

constexpr std::uint32_t kWeightsVersion = 1;

using MatrixF = Mlp<float>::Matrix;
using MatrixD = Mlp<double>::Matrix;

std::vector<std::size_t> layer_widths(const NetworkConfig& c)
{
    std::vector<std::size_t> w{c.input_dim};
    w.insert(w.end(), c.hidden.begin(), c.hidden.end());
    w.push_back(c.output_dim);
    return w;
}

void check_config(const NetworkConfig& c)
{
    if (c.output_dim != 2) throw InvalidArgument("charting networks map to two dimensions (output_dim must be 2)");
    for (const auto w : layer_widths(c))
        if (w == 0) throw InvalidArgument("network layer widths must be at least 1");
}

// dim x count block of standardised features, columns in the order of `rows`.
template <class Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> gather(const ChartingNetwork& net, const FeatureMatrix& features,
                                                             std::span<const std::size_t> rows)
{
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out(features.cols(), static_cast<Eigen::Index>(rows.size()));
    const auto mean = net.mean.cast<Scalar>();
    const auto scale = net.scale.cast<Scalar>();
    for (std::size_t k = 0; k < rows.size(); ++k)
        out.col(static_cast<Eigen::Index>(k)) =
            (features.row(static_cast<Eigen::Index>(rows[k])).transpose().cast<Scalar>() - mean).cwiseQuotient(scale);
    return out;
}

// Maps a triplet batch onto the distinct datapoints it touches, in first-seen order.
struct BatchColumns {
    std::vector<std::size_t> rows;
    std::vector<ColumnTriplet> triplets;
};

BatchColumns map_batch(std::span<const Triplet> batch, std::vector<std::int64_t>& slot)
{
    BatchColumns out;
    out.triplets.reserve(batch.size());
    auto column = [&](std::size_t row) {
        if (slot[row] < 0) {
            slot[row] = static_cast<std::int64_t>(out.rows.size());
            out.rows.push_back(row);
        }
        return static_cast<Eigen::Index>(slot[row]);
    };
    for (const auto& t : batch) out.triplets.push_back({column(t.anchor), column(t.positive), column(t.negative)});
    for (const auto r : out.rows) slot[r] = -1;
    return out;
}

void check_triplets(std::span<const Triplet> triplets, std::size_t n)
{
    for (std::size_t k = 0; k < triplets.size(); ++k) {
        const auto& t = triplets[k];
        if (t.anchor >= n || t.positive >= n || t.negative >= n)
            throw InvalidArgument("triplet " + std::to_string(k) + " indexes beyond the " + std::to_string(n) +
                                  " feature rows");
    }
}

template <class Scalar, class Fn>
void for_each_parameter(Mlp<Scalar>& m, Fn&& fn)
{
    for (std::size_t l = 0; l < m.layer_count(); ++l) {
        for (Eigen::Index i = 0; i < m.weights[l].size(); ++i) fn(m.weights[l].data()[i], l, true, i);
        for (Eigen::Index i = 0; i < m.biases[l].size(); ++i) fn(m.biases[l].data()[i], l, false, i);
    }
}

} // namespace

ChartingNetwork init_network(const NetworkConfig& config)
{
    check_config(config);
    ChartingNetwork net;
    net.config = config;
    const auto widths = layer_widths(config);
    std::mt19937_64 rng(config.init_seed);
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        const auto in = static_cast<Eigen::Index>(widths[l]);
        const auto out = static_cast<Eigen::Index>(widths[l + 1]);
        const float bound = 1.0f / std::sqrt(static_cast<float>(in));
        std::uniform_real_distribution<float> u(-bound, bound);
        MatrixF w(out, in);
        for (Eigen::Index c = 0; c < in; ++c)
            for (Eigen::Index r = 0; r < out; ++r) w(r, c) = u(rng);
        Mlp<float>::Vector b(out);
        for (Eigen::Index r = 0; r < out; ++r) b[r] = u(rng);
        net.mlp.weights.push_back(std::move(w));
        net.mlp.biases.push_back(std::move(b));
    }
    net.mean = Eigen::VectorXf::Zero(static_cast<Eigen::Index>(config.input_dim));
    net.scale = Eigen::VectorXf::Ones(static_cast<Eigen::Index>(config.input_dim));
    return net;
}

void fit_normalization(ChartingNetwork& net, const FeatureMatrix& features)
{
    if (features.rows() == 0) throw InvalidArgument("cannot fit normalisation on an empty feature matrix");
    if (static_cast<std::size_t>(features.cols()) != net.config.input_dim)
        throw InvalidArgument("feature dimension does not match the network input");
    const Eigen::VectorXd mean = features.cast<double>().colwise().mean().transpose();
    Eigen::VectorXd var = Eigen::VectorXd::Zero(features.cols());
    for (Eigen::Index r = 0; r < features.rows(); ++r)
        var += (features.row(r).transpose().cast<double>() - mean).cwiseAbs2();
    var /= static_cast<double>(features.rows());
    net.mean = mean.cast<float>();
    net.scale = var.cwiseSqrt().unaryExpr([](double s) { return s > 1e-12 ? s : 1.0; }).cast<float>();
}

Eigen::Vector2d forward(const ChartingNetwork& net, const FeatureVector& feature)
{
    if (static_cast<std::size_t>(feature.size()) != net.config.input_dim)
        throw InvalidArgument("feature of length " + std::to_string(feature.size()) + " does not match network input " +
                              std::to_string(net.config.input_dim));
    const MatrixF in = (feature.cast<float>() - net.mean).cwiseQuotient(net.scale);
    return net.mlp.forward(in).col(0).cast<double>();
}

Eigen::MatrixXd forward_all(const ChartingNetwork& net, const FeatureMatrix& features)
{
    if (static_cast<std::size_t>(features.cols()) != net.config.input_dim)
        throw InvalidArgument("feature dimension " + std::to_string(features.cols()) + " does not match network input " +
                              std::to_string(net.config.input_dim));
    const auto n = static_cast<std::size_t>(features.rows());
    Eigen::MatrixXd z(features.rows(), 2);
    constexpr std::size_t kChunk = 4096;
    std::vector<std::size_t> rows;
    for (std::size_t first = 0; first < n; first += kChunk) {
        rows.resize(std::min(kChunk, n - first));
        std::iota(rows.begin(), rows.end(), first);
        const MatrixF out = net.mlp.forward(gather<float>(net, features, rows));
        z.middleRows(static_cast<Eigen::Index>(first), static_cast<Eigen::Index>(rows.size())) =
            out.transpose().cast<double>();
    }
    return z;
}

double triplet_loss(const Eigen::Vector2d& z_anchor, const Eigen::Vector2d& z_positive,
                    const Eigen::Vector2d& z_negative, double margin)
{
    return std::max(0.0, (z_anchor - z_positive).norm() - (z_anchor - z_negative).norm() + margin);
}

TrainResult train(const FeatureMatrix& features, const TripletSet& triplets, const NetworkConfig& net_config,
                  const TrainConfig& tc, const EpochCallback& on_epoch)
{
    if (!(tc.margin > 0.0)) throw InvalidArgument("triplet margin must be positive");
    if (tc.batch_size == 0) throw InvalidArgument("batch size must be at least 1");
    NetworkConfig config = net_config;
    if (config.input_dim == 0) config.input_dim = static_cast<std::size_t>(features.cols());
    if (config.input_dim != static_cast<std::size_t>(features.cols()))
        throw InvalidArgument("feature dimension " + std::to_string(features.cols()) + " does not match network input " +
                              std::to_string(config.input_dim));
    const auto n = static_cast<std::size_t>(features.rows());
    check_triplets(triplets.items, n);

    TrainResult result;
    result.net = init_network(config);
    fit_normalization(result.net, features);
    auto& mlp = result.net.mlp;
    const std::size_t layers = mlp.layer_count();

    // Standardised features, one column per datapoint.
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
    const MatrixF normalized = gather<float>(result.net, features, all);

    Mlp<float>::Gradients m1, m2, grads;
    for (std::size_t l = 0; l < layers; ++l) {
        m1.weights.push_back(MatrixF::Zero(mlp.weights[l].rows(), mlp.weights[l].cols()));
        m1.biases.push_back(Mlp<float>::Vector::Zero(mlp.biases[l].size()));
    }
    m2 = m1;

    std::mt19937_64 rng(tc.seed);
    std::vector<std::size_t> order(triplets.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<std::int64_t> slot(n, -1);
    std::vector<Triplet> batch;
    Mlp<float>::Tape tape;
    MatrixF grad_z;
    const auto lr = static_cast<float>(tc.learning_rate);
    const auto b1 = static_cast<float>(tc.beta1);
    const auto b2 = static_cast<float>(tc.beta2);
    const auto eps = static_cast<float>(tc.adam_epsilon);
    const auto margin = static_cast<float>(tc.margin);
    std::uint64_t step = 0;

    for (std::size_t epoch = 0; epoch < tc.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double loss_sum = 0.0;
        std::size_t batch_index = 0;
        for (std::size_t first = 0; first < order.size(); first += tc.batch_size, ++batch_index) {
            const std::size_t count = std::min(tc.batch_size, order.size() - first);
            batch.resize(count);
            for (std::size_t k = 0; k < count; ++k) batch[k] = triplets.items[order[first + k]];
            const auto cols = map_batch(batch, slot);

            MatrixF input(normalized.rows(), static_cast<Eigen::Index>(cols.rows.size()));
            for (std::size_t k = 0; k < cols.rows.size(); ++k)
                input.col(static_cast<Eigen::Index>(k)) = normalized.col(static_cast<Eigen::Index>(cols.rows[k]));
            const MatrixF& z = mlp.forward(input, tape);
            const float loss = triplet_batch_loss<float>(z, cols.triplets, margin, &grad_z);
            if (!std::isfinite(loss)) throw DivergenceError(epoch, batch_index);
            loss_sum += static_cast<double>(loss) * static_cast<double>(count);
            mlp.backward(tape, grad_z, grads);

            ++step;
            const float c1 = 1.0f / (1.0f - static_cast<float>(std::pow(tc.beta1, static_cast<double>(step))));
            const float c2 = 1.0f / (1.0f - static_cast<float>(std::pow(tc.beta2, static_cast<double>(step))));
            auto adam = [&](auto& param, auto& g, auto& m, auto& v) {
                m = b1 * m + (1.0f - b1) * g;
                v = b2 * v + (1.0f - b2) * g.cwiseAbs2();
                param.array() -= lr * (m.array() * c1) / ((v.array() * c2).sqrt() + eps);
            };
            for (std::size_t l = 0; l < layers; ++l) {
                adam(mlp.weights[l], grads.weights[l], m1.weights[l], m2.weights[l]);
                adam(mlp.biases[l], grads.biases[l], m1.biases[l], m2.biases[l]);
            }
        }
        const double mean_loss = triplets.size() ? loss_sum / static_cast<double>(triplets.size()) : 0.0;
        result.epoch_loss.push_back(mean_loss);
        if (on_epoch) on_epoch(epoch, mean_loss);
    }
    return result;
}

double gradient_check(const ChartingNetwork& net, const FeatureMatrix& features, std::span<const Triplet> batch,
                      double epsilon, double margin)
{
    if (!(epsilon > 0.0)) throw InvalidArgument("epsilon must be positive");
    check_triplets(batch, static_cast<std::size_t>(features.rows()));
    std::vector<std::int64_t> slot(static_cast<std::size_t>(features.rows()), -1);
    const auto cols = map_batch(batch, slot);
    using Wide = long double;
    const auto input = gather<Wide>(net, features, cols.rows);
    Mlp<Wide> m = net.mlp.cast<Wide>();
    const auto wide_margin = static_cast<Wide>(margin);
    const auto step = static_cast<Wide>(epsilon);

    auto loss_at = [&]() { return triplet_batch_loss<Wide>(m.forward(input), cols.triplets, wide_margin, nullptr); };

    Mlp<Wide>::Tape tape;
    Mlp<Wide>::Matrix grad_z;
    m.forward(input, tape);
    triplet_batch_loss<Wide>(tape.activations.back(), cols.triplets, wide_margin, &grad_z);
    Mlp<Wide>::Gradients analytic;
    m.backward(tape, grad_z, analytic);

    std::vector<double> a, numeric;
    for_each_parameter(m, [&](Wide& p, std::size_t l, bool is_weight, Eigen::Index i) {
        const Wide saved = p;
        p = saved + step;
        const Wide up = loss_at();
        p = saved - step;
        const Wide down = loss_at();
        p = saved;
        numeric.push_back(static_cast<double>((up - down) / (2 * step)));
        a.push_back(static_cast<double>(is_weight ? analytic.weights[l].data()[i] : analytic.biases[l].data()[i]));
    });

    double largest = 0.0;
    for (const double g : a) largest = std::max(largest, std::abs(g));
    const double floor = std::max(1e-3 * largest, std::numeric_limits<double>::min());
    double worst = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double diff = std::abs(a[k] - numeric[k]);
        if (diff == 0.0) continue;
        worst = std::max(worst, diff / std::max({std::abs(a[k]), std::abs(numeric[k]), floor}));
    }
    return worst;
}

double kink_distance(const ChartingNetwork& net, const FeatureMatrix& features, std::span<const Triplet> batch,
                     double margin)
{
    check_triplets(batch, static_cast<std::size_t>(features.rows()));
    std::vector<std::int64_t> slot(static_cast<std::size_t>(features.rows()), -1);
    const auto cols = map_batch(batch, slot);
    const Mlp<double> m = net.mlp.cast<double>();
    MatrixD act = gather<double>(net, features, cols.rows);
    double closest = std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l < m.layer_count(); ++l) {
        MatrixD pre = m.weights[l] * act;
        pre.colwise() += m.biases[l];
        if (l + 1 < m.layer_count()) {
            closest = std::min(closest, pre.cwiseAbs().minCoeff());
            act = pre.cwiseMax(0.0);
        } else {
            act = pre;
        }
    }
    for (const auto& t : cols.triplets) {
        const double dp = (act.col(t.anchor) - act.col(t.positive)).norm();
        const double dn = (act.col(t.anchor) - act.col(t.negative)).norm();
        closest = std::min({closest, dp, dn, std::abs(dp - dn + margin)});
    }
    return closest;
}

std::string serialize_weights(const ChartingNetwork& net)
{
    std::ostringstream buf(std::ios::binary);
    detail::BinaryWriter out(buf);
    out.magic("CCNN");
    out.write(kWeightsVersion);
    out.write(static_cast<std::uint32_t>(net.mlp.layer_count()));
    for (std::size_t l = 0; l < net.mlp.layer_count(); ++l) {
        const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> w = net.mlp.weights[l];
        out.write(static_cast<std::uint32_t>(w.rows()));
        out.write(static_cast<std::uint32_t>(w.cols()));
        out.write_span(std::span<const float>(w.data(), static_cast<std::size_t>(w.size())));
        const auto& b = net.mlp.biases[l];
        out.write_span(std::span<const float>(b.data(), static_cast<std::size_t>(b.size())));
    }
    out.write_span(std::span<const float>(net.mean.data(), static_cast<std::size_t>(net.mean.size())));
    out.write_span(std::span<const float>(net.scale.data(), static_cast<std::size_t>(net.scale.size())));
    return std::move(buf).str();
}

void save_weights(const ChartingNetwork& net, const std::filesystem::path& path)
{
    const auto bytes = serialize_weights(net);
    detail::write_binary_file(path, [&](detail::BinaryWriter& out) {
        out.write_span(std::span<const char>(bytes.data(), bytes.size()));
    });
}

ChartingNetwork load_weights(const std::filesystem::path& path)
{
    detail::BinaryReader in(path);
    in.expect_magic("CCNN");
    in.expect_version(kWeightsVersion);
    const auto layers = in.read<std::uint32_t>("layer count");
    if (layers == 0) in.fail(LoadError::Kind::MalformedHeader, 8, "network has no layers");
    ChartingNetwork net;
    net.config.hidden.clear();
    std::uint32_t prev_rows = 0;
    for (std::uint32_t l = 0; l < layers; ++l) {
        const auto at = in.offset();
        const auto rows = in.read<std::uint32_t>("layer rows");
        const auto cols = in.read<std::uint32_t>("layer cols");
        if (rows == 0 || cols == 0) in.fail(LoadError::Kind::MalformedHeader, at, "empty layer");
        if (l > 0 && cols != prev_rows) in.fail(LoadError::Kind::ShapeMismatch, at, "layer shapes do not chain");
        if (in.remaining() < (std::uint64_t{rows} * cols + rows) * sizeof(float))
            in.fail(LoadError::Kind::Truncated, in.offset(), "truncated layer " + std::to_string(l));
        Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> w(rows, cols);
        in.read_span(std::span<float>(w.data(), static_cast<std::size_t>(w.size())), "weights");
        Mlp<float>::Vector b(rows);
        in.read_span(std::span<float>(b.data(), rows), "biases");
        if (!w.allFinite() || !b.allFinite()) in.fail(LoadError::Kind::NonFinite, at, "non-finite parameter in layer");
        if (l == 0) net.config.input_dim = cols;
        else net.config.hidden.push_back(cols);
        net.mlp.weights.emplace_back(w);
        net.mlp.biases.push_back(std::move(b));
        prev_rows = rows;
    }
    net.config.output_dim = prev_rows;
    const auto dim = static_cast<Eigen::Index>(net.config.input_dim);
    net.mean.resize(dim);
    net.scale.resize(dim);
    in.read_span(std::span<float>(net.mean.data(), static_cast<std::size_t>(dim)), "normalisation mean");
    in.read_span(std::span<float>(net.scale.data(), static_cast<std::size_t>(dim)), "normalisation scale");
    if (in.remaining() != 0) in.fail(LoadError::Kind::MalformedHeader, in.offset(), "trailing bytes");
    if (!net.mean.allFinite() || !net.scale.allFinite())
        in.fail(LoadError::Kind::NonFinite, in.offset(), "non-finite normalisation statistics");
    return net;
}

ChartingNetwork load_weights(const std::filesystem::path& path, const NetworkConfig& expected)
{
    auto net = load_weights(path);
    if (!(net.config == expected)) {
        std::string shape = std::to_string(net.config.input_dim);
        for (const auto h : net.config.hidden) shape += "-" + std::to_string(h);
        shape += "-" + std::to_string(net.config.output_dim);
        throw LoadError(LoadError::Kind::ShapeMismatch, 8,
                        path.string() + ": network shape " + shape + " does not match the expected configuration");
    }
    return net;
}

} // namespace chartkit

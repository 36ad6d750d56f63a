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

#include "chartkit/metrics.hpp"

#include "json_util.hpp"

#include "chartkit/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

namespace chartkit {

namespace {

void check_pair(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& chart)
{
    if (truth.rows() != chart.rows())
        throw InvalidArgument("truth has " + std::to_string(truth.rows()) + " points but chart has " +
                              std::to_string(chart.rows()));
    if (truth.rows() < 2) throw InvalidArgument("metrics need at least two points");
}

void check_k(std::size_t n, std::size_t k)
{
    if (k < 1 || 2 * k > n || 3 * k >= 2 * n - 1)
        throw InvalidArgument("neighbourhood size " + std::to_string(k) + " out of range for " + std::to_string(n) +
                              " points");
}

// Reusable buffers for one rank row.
struct RowRanker {
    std::vector<double> dist;
    std::vector<std::int32_t> order;

    void operator()(const Eigen::MatrixXd& p, Eigen::Index i, std::span<std::int32_t> out)
    {
        const auto n = static_cast<std::size_t>(p.rows());
        dist.resize(n);
        order.resize(n - 1);
        for (Eigen::Index j = 0; j < p.rows(); ++j) dist[static_cast<std::size_t>(j)] = (p.row(j) - p.row(i)).squaredNorm();
        std::size_t k = 0;
        for (std::size_t j = 0; j < n; ++j)
            if (static_cast<Eigen::Index>(j) != i) order[k++] = static_cast<std::int32_t>(j);
        std::sort(order.begin(), order.end(), [&](std::int32_t a, std::int32_t b) {
            const double da = dist[static_cast<std::size_t>(a)], db = dist[static_cast<std::size_t>(b)];
            return da < db || (da == db && a < b);
        });
        out[static_cast<std::size_t>(i)] = 0;
        for (std::size_t r = 0; r < order.size(); ++r) out[static_cast<std::size_t>(order[r])] = static_cast<std::int32_t>(r + 1);
    }
};

} // namespace

void rank_row(const Eigen::MatrixXd& points, Eigen::Index i, std::span<std::int32_t> out)
{
    if (out.size() != static_cast<std::size_t>(points.rows())) throw InvalidArgument("rank row buffer has wrong size");
    if (i < 0 || i >= points.rows()) throw InvalidArgument("row index out of range");
    RowRanker ranker;
    ranker(points, i, out);
}

RankMatrix rank_matrix(const Eigen::MatrixXd& points)
{
    if (points.rows() < 2) throw InvalidArgument("rank matrix needs at least two points");
    RankMatrix ranks(points.rows(), points.rows());
    RowRanker ranker;
    for (Eigen::Index i = 0; i < points.rows(); ++i)
        ranker(points, i, std::span<std::int32_t>(ranks.row(i).data(), static_cast<std::size_t>(points.rows())));
    return ranks;
}

std::size_t default_neighbourhood(std::size_t n)
{
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(0.05 * static_cast<double>(n))));
}

namespace {

// Per-row neighbourhood bookkeeping. Points are ordered by (squared distance, index).
struct Key {
    double d;
    std::int32_t j;

    friend bool operator<(const Key& a, const Key& b) { return a.d < b.d || (a.d == b.d && a.j < b.j); }
};

class RowScorer {
public:
    RowScorer(const Eigen::MatrixXd& p, std::size_t k)
        : pts_(p), k_(k), stamp_(static_cast<std::size_t>(p.rows()), 0), dist_(static_cast<std::size_t>(p.rows()))
    {
    }

    // Orders the other points of row i and marks the k nearest with `tag`.
    void prepare(Eigen::Index i, std::uint32_t tag)
    {
        const auto n = pts_.rows();
        Eigen::Map<Eigen::ArrayXd> dist(dist_.data(), n);
        dist = (pts_.col(0).array() - pts_(i, 0)).square();
        for (Eigen::Index c = 1; c < pts_.cols(); ++c) dist += (pts_.col(c).array() - pts_(i, c)).square();

        // k-th smallest distance among the other points, then every key at or below it.
        scratch_.assign(dist_.begin(), dist_.end());
        scratch_[static_cast<std::size_t>(i)] = std::numeric_limits<double>::infinity();
        std::nth_element(scratch_.begin(), scratch_.begin() + static_cast<std::ptrdiff_t>(k_ - 1), scratch_.end());
        const double cut = scratch_[k_ - 1];
        keys_.clear();
        rest_.clear();
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j == i) continue;
            const double d = dist_[static_cast<std::size_t>(j)];
            (d <= cut ? keys_ : rest_).push_back({d, static_cast<std::int32_t>(j)});
        }
        if (keys_.size() > k_) {
            // Ties at the cut: keep the lowest indices.
            std::nth_element(keys_.begin(), keys_.begin() + static_cast<std::ptrdiff_t>(k_ - 1), keys_.end());
            rest_.insert(rest_.end(), keys_.begin() + static_cast<std::ptrdiff_t>(k_), keys_.end());
            keys_.resize(k_);
        }
        for (const auto& key : keys_) stamp_[static_cast<std::size_t>(key.j)] = tag;
    }

    bool near(std::int32_t j, std::uint32_t tag) const { return stamp_[static_cast<std::size_t>(j)] == tag; }
    std::span<const Key> nearest() const { return {keys_.data(), k_}; }

    // Sum of (rank - k) over the points of `other` that fall outside this row's neighbourhood.
    std::int64_t penalty(const RowScorer& other, std::uint32_t tag)
    {
        outside_.clear();
        for (const auto& key : other.nearest())
            if (!near(key.j, tag)) outside_.push_back({dist_[static_cast<std::size_t>(key.j)], key.j});
        if (outside_.empty()) return 0;
        std::sort(outside_.begin(), outside_.end());
        // Every point past the k nearest that precedes some query shifts that query's rank.
        diff_.assign(outside_.size() + 1, 0);
        const Key last = outside_.back();
        for (auto it = rest_.begin(); it != rest_.end(); ++it)
            if (*it < last) ++diff_[static_cast<std::size_t>(std::upper_bound(outside_.begin(), outside_.end(), *it) - outside_.begin())];
        std::int64_t sum = 0, before = 0;
        for (std::size_t q = 0; q < outside_.size(); ++q) {
            before += diff_[q];
            // rank - k = 1 + points past the k nearest that precede the query.
            sum += before + 1;
        }
        return sum;
    }

private:
    const Eigen::MatrixXd& pts_;
    std::size_t k_;
    std::vector<std::uint32_t> stamp_;
    std::vector<double> dist_, scratch_;
    std::vector<Key> keys_, rest_, outside_;
    std::vector<std::int64_t> diff_;
};

} // namespace

NeighbourhoodScores neighbourhood_scores(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& chart, std::size_t k)
{
    check_pair(truth, chart);
    const auto n = static_cast<std::size_t>(truth.rows());
    check_k(n, k);
    RowScorer rx(truth, k), rz(chart, k);
    std::int64_t tw_sum = 0, ct_sum = 0;
    for (Eigen::Index i = 0; i < truth.rows(); ++i) {
        const auto tag = static_cast<std::uint32_t>(i + 1);
        rx.prepare(i, tag);
        rz.prepare(i, tag);
        tw_sum += rx.penalty(rz, tag);
        ct_sum += rz.penalty(rx, tag);
    }
    const double nd = static_cast<double>(n), kd = static_cast<double>(k);
    const double factor = 2.0 / (nd * kd * (2.0 * nd - 3.0 * kd - 1.0));
    return {1.0 - factor * static_cast<double>(tw_sum), 1.0 - factor * static_cast<double>(ct_sum)};
}

double trustworthiness(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& chart, std::size_t k)
{
    return neighbourhood_scores(truth, chart, k).trustworthiness;
}

double continuity(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& chart, std::size_t k)
{
    return neighbourhood_scores(truth, chart, k).continuity;
}

double kruskal_stress(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& chart, StressNormalization normalization)
{
    check_pair(truth, chart);
    const auto n = truth.rows();
    double cross = 0.0, chart_energy = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double d = (truth.row(i) - truth.row(j)).norm();
            const double delta = (chart.row(i) - chart.row(j)).norm();
            cross += d * delta;
            chart_energy += delta * delta;
        }
    if (chart_energy == 0.0) return 1.0;
    const double beta = cross / chart_energy;
    // Residual in a second pass; expanding the square cancels catastrophically near 0.
    double residual = 0.0, truth_energy = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double d = (truth.row(i) - truth.row(j)).norm();
            const double delta = (chart.row(i) - chart.row(j)).norm();
            residual += (d - beta * delta) * (d - beta * delta);
            truth_energy += d * d;
        }
    const double denom = normalization == StressNormalization::GroundTruth ? truth_energy : beta * beta * chart_energy;
    if (denom == 0.0) return residual == 0.0 ? 0.0 : 1.0;
    return std::min(1.0, std::sqrt(residual / denom));
}

MetricsReport evaluate(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& chart, const EvaluateOptions& options)
{
    check_pair(truth, chart);
    const auto n = static_cast<std::size_t>(truth.rows());
    MetricsReport report;
    report.seed = options.seed;
    Eigen::MatrixXd x, z;
    const Eigen::MatrixXd* xs = &truth;
    const Eigen::MatrixXd* zs = &chart;
    if (options.subsample && *options.subsample != n) {
        const auto m = *options.subsample;
        if (m > n)
            throw InvalidArgument("subsample size " + std::to_string(m) + " exceeds " + std::to_string(n) + " points");
        std::vector<std::size_t> idx(n);
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        std::mt19937_64 rng(options.seed);
        for (std::size_t i = 0; i < m; ++i)
            std::swap(idx[i], idx[i + std::uniform_int_distribution<std::size_t>(0, n - 1 - i)(rng)]);
        idx.resize(m);
        std::sort(idx.begin(), idx.end());
        x.resize(static_cast<Eigen::Index>(m), truth.cols());
        z.resize(static_cast<Eigen::Index>(m), chart.cols());
        for (std::size_t i = 0; i < m; ++i) {
            x.row(static_cast<Eigen::Index>(i)) = truth.row(static_cast<Eigen::Index>(idx[i]));
            z.row(static_cast<Eigen::Index>(i)) = chart.row(static_cast<Eigen::Index>(idx[i]));
        }
        xs = &x;
        zs = &z;
    }
    report.n_used = static_cast<std::size_t>(xs->rows());
    report.k_used = options.k ? *options.k : default_neighbourhood(report.n_used);
    const auto scores = neighbourhood_scores(*xs, *zs, report.k_used);
    report.ct = scores.continuity;
    report.tw = scores.trustworthiness;
    report.ks = kruskal_stress(*xs, *zs, options.normalization);
    return report;
}

std::string to_text(const MetricsReport& r)
{
    detail::Json j;
    j["ct"] = r.ct;
    j["tw"] = r.tw;
    j["ks"] = r.ks;
    j["k_used"] = r.k_used;
    j["n_used"] = r.n_used;
    j["seed"] = r.seed;
    return j.dump(2) + "\n";
}

MetricsReport metrics_from_text(const std::string& text)
{
    const auto j = detail::parse_json_text(text, "metrics report");
    detail::reject_unknown_keys(j, {"ct", "tw", "ks", "k_used", "n_used", "seed"}, "metrics");
    for (const char* key : {"ct", "tw", "ks", "k_used", "n_used", "seed"})
        if (!j.contains(key)) throw ConfigError(std::string("metrics report lacks \"") + key + "\"");
    MetricsReport r;
    detail::get_opt(j, "ct", r.ct, "metrics");
    detail::get_opt(j, "tw", r.tw, "metrics");
    detail::get_opt(j, "ks", r.ks, "metrics");
    detail::get_opt(j, "k_used", r.k_used, "metrics");
    detail::get_opt(j, "n_used", r.n_used, "metrics");
    detail::get_opt(j, "seed", r.seed, "metrics");
    return r;
}

} // namespace chartkit

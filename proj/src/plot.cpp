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

#include "chartkit/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>

namespace chartkit {

namespace {

constexpr double kSize = 480.0;
constexpr double kMargin = 30.0;

struct Range {
    double lo = 0.0;
    double hi = 1.0;

    double unit(double v) const { return hi > lo ? (v - lo) / (hi - lo) : 0.5; }
};

Range range_of(const Eigen::VectorXd& v)
{
    return v.size() ? Range{v.minCoeff(), v.maxCoeff()} : Range{};
}

std::string hex_colour(const Eigen::Vector3d& rgb)
{
    auto byte = [](double c) { return static_cast<int>(std::lround(std::clamp(c, 0.0, 1.0) * 255.0)); };
    return fmt::format("#{:02x}{:02x}{:02x}", byte(rgb[0]), byte(rgb[1]), byte(rgb[2]));
}

} // namespace

Eigen::Vector3d position_colour(double u, double v)
{
    u = std::clamp(u, 0.0, 1.0);
    v = std::clamp(v, 0.0, 1.0);
    return {u, v, 1.0 - u};
}

std::string render_plot(const ChartResult& result, PlotSpace space)
{
    if (result.size() == 0) throw InvalidArgument("cannot plot an empty chart");
    const Eigen::MatrixXd& pts = space == PlotSpace::Chart ? result.chart : result.truth;
    const Range px = range_of(pts.col(0)), py = range_of(pts.col(1));
    const Range cx = range_of(result.truth.col(0)), cy = range_of(result.truth.col(1));
    const double span = kSize - 2.0 * kMargin;

    std::string svg = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{0}\" viewBox=\"0 0 {0} {0}\">\n"
        "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        "<text x=\"{1}\" y=\"18\" font-family=\"sans-serif\" font-size=\"12\">{2}</text>\n",
        kSize, kMargin, space == PlotSpace::Chart ? "channel chart (z1, z2)" : "ground truth (x1, x2)");
    for (std::size_t i = 0; i < result.size(); ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        const double x = kMargin + span * px.unit(pts(r, 0));
        const double y = kSize - kMargin - span * py.unit(pts(r, 1));
        const auto colour = position_colour(cx.unit(result.truth(r, 0)), cy.unit(result.truth(r, 1)));
        svg += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"2\" fill=\"{}\"/>\n", x, y, hex_colour(colour));
    }
    svg += "</svg>\n";
    return svg;
}

void emit_plot(const ChartResult& result, const std::filesystem::path& path, PlotSpace space)
{
    const auto svg = render_plot(result, space);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << svg;
    out.close();
    if (!out) throw IoError("write failed: " + path.string());
}

std::string render_sweep_plot(const std::vector<SweepRow>& rows, std::string_view parameter, bool log_x)
{
    constexpr double width = 600.0, height = 360.0, left = 50.0, right = 110.0, top = 20.0, bottom = 40.0;
    auto xval = [&](double v) { return log_x ? std::log10(std::max(v, 1e-12)) : v; };
    Range xr{0.0, 1.0};
    if (!rows.empty()) {
        xr = {xval(rows.front().value), xval(rows.front().value)};
        for (const auto& r : rows) {
            xr.lo = std::min(xr.lo, xval(r.value));
            xr.hi = std::max(xr.hi, xval(r.value));
        }
    }
    auto sx = [&](double v) { return left + (width - left - right) * xr.unit(xval(v)); };
    auto sy = [&](double v) { return height - bottom - (height - top - bottom) * std::clamp(v, 0.0, 1.0); };

    std::string svg = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\">\n"
        "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        "<line x1=\"{2}\" y1=\"{3}\" x2=\"{4}\" y2=\"{3}\" stroke=\"black\"/>\n"
        "<line x1=\"{2}\" y1=\"{5}\" x2=\"{2}\" y2=\"{3}\" stroke=\"black\"/>\n"
        "<text x=\"{6}\" y=\"{7}\" font-family=\"sans-serif\" font-size=\"12\">{8}</text>\n",
        width, height, left, height - bottom, width - right, top, (width - right + left) / 2.0, height - 5.0, parameter);
    for (int t = 0; t <= 4; ++t) {
        const double v = 0.25 * t;
        svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" font-family=\"sans-serif\" font-size=\"10\" "
                           "text-anchor=\"end\">{:.2f}</text>\n",
                           left - 4.0, sy(v) + 3.0, v);
    }
    for (const auto& r : rows)
        svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" font-family=\"sans-serif\" font-size=\"10\" "
                           "text-anchor=\"middle\">{}</text>\n",
                           sx(r.value), height - bottom + 14.0, r.value);

    struct Series {
        const char* name;
        const char* colour;
        double MetricsReport::*field;
    };
    const Series series[] = {{"CT", "#1f77b4", &MetricsReport::ct},
                             {"TW", "#2ca02c", &MetricsReport::tw},
                             {"KS", "#d62728", &MetricsReport::ks}};
    int slot = 0;
    for (const auto& s : series) {
        std::string points;
        for (const auto& r : rows) points += fmt::format("{:.2f},{:.2f} ", sx(r.value), sy(r.metrics.*s.field));
        svg += fmt::format("<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>\n", points,
                           s.colour);
        for (const auto& r : rows)
            svg += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"3\" fill=\"{}\"/>\n", sx(r.value),
                               sy(r.metrics.*s.field), s.colour);
        const double ly = top + 15.0 + 18.0 * slot++;
        svg += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{2:.2f}\" y2=\"{1:.2f}\" stroke=\"{3}\" "
                           "stroke-width=\"2\"/>\n<text x=\"{4:.2f}\" y=\"{5:.2f}\" font-family=\"sans-serif\" "
                           "font-size=\"11\">{6}</text>\n",
                           width - right + 15.0, ly, width - right + 35.0, s.colour, width - right + 40.0, ly + 4.0,
                           s.name);
    }
    svg += "</svg>\n";
    return svg;
}

} // namespace chartkit

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

#include "chartkit/features.hpp"

#include "binary_io.hpp"

#include "chartkit/error.hpp"

#include <cmath>

namespace chartkit {

namespace {
constexpr std::uint32_t kFeatureCacheVersion = 1;

void check_sigma(double sigma)
{
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InvalidArgument("sigma must be a positive finite number");
}
} // namespace

CsiVector scale_csi(const CsiVector& h, double sigma)
{
    check_sigma(sigma);
    if (!h.allFinite()) throw InvalidArgument("csi vector has non-finite entries");
    const double norm = h.norm();
    if (norm == 0.0) return CsiVector::Zero(h.size());
    return h * std::pow(norm, 2.0 / sigma - 1.0);
}

FeatureVector scaled_r2m(const CsiVector& h, const FeatureConfig& config)
{
    const CsiVector hs = scale_csi(h, config.sigma);
    const auto b = hs.size();
    FeatureVector f(b * b);
    for (Eigen::Index r = 0; r < b; ++r)
        for (Eigen::Index c = 0; c < b; ++c) f[r * b + c] = (hs[r] * std::conj(hs[c])).real();
    return f;
}

FeatureMatrix featurize_dataset(const ReducedDataset& reduced, const FeatureConfig& config)
{
    check_sigma(config.sigma);
    const auto b = static_cast<Eigen::Index>(reduced.antenna_count);
    FeatureMatrix out(static_cast<Eigen::Index>(reduced.size()), b * b);
    for (std::size_t n = 0; n < reduced.size(); ++n) {
        const auto& h = reduced.datapoints[n].h;
        if (h.size() != b)
            throw InvalidArgument("datapoint " + std::to_string(n) + " has a csi vector of length " +
                                  std::to_string(h.size()) + ", expected " + std::to_string(b));
        out.row(static_cast<Eigen::Index>(n)) = scaled_r2m(h, config).cast<float>().transpose();
    }
    return out;
}

void save_feature_cache(const FeatureMatrix& features, const std::filesystem::path& path)
{
    detail::write_binary_file(path, [&](detail::BinaryWriter& out) {
    out.magic("CCFT");
    out.write(kFeatureCacheVersion);
    out.write(static_cast<std::uint64_t>(features.rows()));
    out.write(static_cast<std::uint32_t>(features.cols()));
    out.write_span(std::span<const float>(features.data(), static_cast<std::size_t>(features.size())));
    });
}

FeatureMatrix load_feature_cache(const std::filesystem::path& path)
{
    detail::BinaryReader in(path);
    in.expect_magic("CCFT");
    in.expect_version(kFeatureCacheVersion);
    const auto n = in.read<std::uint64_t>("row count");
    const auto dim = in.read<std::uint32_t>("feature dimension");
    if (n == 0 || dim == 0) in.fail(LoadError::Kind::MalformedHeader, 8, "empty feature matrix");
    if (in.remaining() != n * dim * sizeof(float))
        in.fail(in.remaining() < n * dim * sizeof(float) ? LoadError::Kind::Truncated : LoadError::Kind::MalformedHeader,
                in.offset(), "payload size does not match N x dim");
    FeatureMatrix f(static_cast<Eigen::Index>(n), dim);
    in.read_span(std::span<float>(f.data(), static_cast<std::size_t>(f.size())), "features");
    for (Eigen::Index i = 0; i < f.size(); ++i)
        if (!std::isfinite(f.data()[i]))
            in.fail(LoadError::Kind::NonFinite, 20 + 4 * static_cast<std::uint64_t>(i), "non-finite feature");
    return f;
}

} // namespace chartkit

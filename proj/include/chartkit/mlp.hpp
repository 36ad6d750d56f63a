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

// Fully connected rectifier network with a linear output layer, and the batched
// triplet loss that drives it. Templated on the scalar so training runs in f32
// while gradient checks run the same code in f64.

#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace chartkit {

template <class Scalar>
struct Mlp {
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    // weights[l] is out_l x in_l.
    std::vector<Matrix> weights;
    std::vector<Vector> biases;

    // activations[0] is the input, activations[l + 1] the output of layer l.
    struct Tape {
        std::vector<Matrix> activations;
    };

    struct Gradients {
        std::vector<Matrix> weights;
        std::vector<Vector> biases;
    };

    std::size_t layer_count() const noexcept { return weights.size(); }
    Eigen::Index input_dim() const { return weights.front().cols(); }
    Eigen::Index output_dim() const { return weights.back().rows(); }

    std::size_t parameter_count() const
    {
        std::size_t n = 0;
        for (std::size_t l = 0; l < weights.size(); ++l)
            n += static_cast<std::size_t>(weights[l].size() + biases[l].size());
        return n;
    }

    /// Columns of `input` are samples.
    Matrix forward(const Matrix& input) const
    {
        Tape tape;
        forward(input, tape);
        return std::move(tape.activations.back());
    }

    const Matrix& forward(const Matrix& input, Tape& tape) const
    {
        tape.activations.resize(weights.size() + 1);
        tape.activations[0] = input;
        for (std::size_t l = 0; l < weights.size(); ++l) {
            auto& out = tape.activations[l + 1];
            out.noalias() = weights[l] * tape.activations[l];
            out.colwise() += biases[l];
            if (l + 1 < weights.size()) out = out.cwiseMax(Scalar(0));
        }
        return tape.activations.back();
    }

    /// Parameter gradients given d(loss)/d(output). The rectifier's subgradient at 0 is 0.
    void backward(const Tape& tape, const Matrix& grad_output, Gradients& grads) const
    {
        const std::size_t layers = weights.size();
        grads.weights.resize(layers);
        grads.biases.resize(layers);
        Matrix delta = grad_output;
        for (std::size_t l = layers; l-- > 0;) {
            grads.weights[l].noalias() = delta * tape.activations[l].transpose();
            grads.biases[l] = delta.rowwise().sum();
            if (l == 0) break;
            Matrix back = weights[l].transpose() * delta;
            delta = back.cwiseProduct((tape.activations[l].array() > Scalar(0)).template cast<Scalar>().matrix());
        }
    }

    template <class Other>
    Mlp<Other> cast() const
    {
        Mlp<Other> out;
        for (std::size_t l = 0; l < weights.size(); ++l) {
            out.weights.push_back(weights[l].template cast<Other>());
            out.biases.push_back(biases[l].template cast<Other>());
        }
        return out;
    }
};

// A triplet whose members are columns of a chart-point matrix.
struct ColumnTriplet {
    Eigen::Index anchor = 0;
    Eigen::Index positive = 0;
    Eigen::Index negative = 0;
};

/// Mean triplet loss over `batch`, whose members index columns of `z`. When
/// `grad` is non-null it receives d(mean loss)/dz. Subgradients at the hinge
/// and at coincident points are 0.
template <class Scalar>
Scalar triplet_batch_loss(const typename Mlp<Scalar>::Matrix& z, std::span<const ColumnTriplet> batch, Scalar margin,
                          typename Mlp<Scalar>::Matrix* grad)
{
    using Vector = typename Mlp<Scalar>::Vector;
    if (grad) grad->setZero(z.rows(), z.cols());
    if (batch.empty()) return Scalar(0);
    const Scalar inv = Scalar(1) / static_cast<Scalar>(batch.size());
    Scalar total = 0;
    for (const auto& t : batch) {
        const Vector dp = z.col(t.anchor) - z.col(t.positive);
        const Vector dn = z.col(t.anchor) - z.col(t.negative);
        const Scalar np = dp.norm();
        const Scalar nn = dn.norm();
        const Scalar hinge = np - nn + margin;
        if (!(hinge > Scalar(0))) {
            if (!std::isfinite(static_cast<double>(hinge))) total += hinge;
            continue;
        }
        total += hinge;
        if (!grad) continue;
        if (np > Scalar(0)) {
            const Vector g = dp * (inv / np);
            grad->col(t.anchor) += g;
            grad->col(t.positive) -= g;
        }
        if (nn > Scalar(0)) {
            const Vector g = dn * (inv / nn);
            grad->col(t.anchor) -= g;
            grad->col(t.negative) += g;
        }
    }
    return total * inv;
}

} // namespace chartkit

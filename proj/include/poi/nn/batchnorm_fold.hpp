// Copyright (c) 2026 the poi authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>

#include "poi/nn/network.hpp"

namespace poi::nn {

// Folds every batch-norm layer into the conv/FC layer directly before it,
// so protected networks contain only purely linear trainable layers.
// Output channel c: scale = gamma_c / sqrt(var_c + eps), so
//   W' = W * scale,  b' = (b - mean) * scale + beta.
inline std::pair<NetworkSpec, WeightStore> fold_batchnorm(const NetworkSpec& net,
                                                          const WeightStore& weights) {
    net.validate(false);
    weights.validate(net);

    NetworkSpec out_net;
    out_net.input_shape = net.input_shape;
    WeightStore out_ws;

    long last_linear_out = -1;  // index in the output layer list
    for (size_t i = 0; i < net.layers.size(); ++i) {
        const LayerSpec& l = net.layers[i];
        if (const auto* bn = std::get_if<BatchNormSpec>(&l)) {
            if (last_linear_out < 0 ||
                static_cast<size_t>(last_linear_out) != out_net.layers.size() - 1)
                throw std::invalid_argument(
                    "fold_batchnorm: layer " + std::to_string(i) +
                    ": batchnorm must directly follow a conv or fc layer");
            const LayerWeights& bnw = weights.at(i);
            LayerWeights& lin = out_ws.layers.at(static_cast<size_t>(last_linear_out));

            size_t N = bn->channels;
            bool is_conv = lin.weight.rank() == 4;
            size_t out_dim = is_conv ? lin.weight.dim(3) : lin.weight.dim(1);
            if (out_dim != N)
                throw std::invalid_argument("fold_batchnorm: channel count mismatch at layer " +
                                            std::to_string(i));
            for (size_t c = 0; c < N; ++c) {
                float scale = bnw.gamma.data[c] /
                              std::sqrt(bnw.running_var.data[c] + kBnEpsilon);
                if (is_conv) {
                    size_t kkM = lin.weight.size() / N;
                    for (size_t j = 0; j < kkM; ++j) lin.weight.data[j * N + c] *= scale;
                } else {
                    size_t M = lin.weight.dim(0);
                    for (size_t j = 0; j < M; ++j) lin.weight.data[j * N + c] *= scale;
                }
                lin.bias.data[c] = (lin.bias.data[c] - bnw.running_mean.data[c]) * scale +
                                   bnw.beta.data[c];
            }
            last_linear_out = -1;  // a second consecutive batchnorm is an error
            continue;
        }

        size_t new_index = out_net.layers.size();
        out_net.layers.push_back(l);
        if (std::holds_alternative<ConvSpec>(l) || std::holds_alternative<FcSpec>(l)) {
            out_ws.layers[new_index] = weights.at(i);
            last_linear_out = static_cast<long>(new_index);
        } else {
            last_linear_out = -1;
        }
    }
    return {std::move(out_net), std::move(out_ws)};
}

}  // namespace poi::nn

// Copyright (c) 2026 the poi authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "poi/nn/tensor.hpp"

namespace poi::nn {

inline constexpr float kBnEpsilon = 1e-5f;

// Layer kinds.  Convolutions are stride-1 with same-padding; max pooling is
// a fixed 2x2 window.
struct ConvSpec {
    size_t kernel;
    size_t in_channels;
    size_t out_channels;
};
struct FcSpec {
    size_t inputs;
    size_t outputs;
};
struct ReluSpec {};
struct MaxPoolSpec {};
struct BatchNormSpec {
    size_t channels;
};
struct DropoutSpec {
    double rate;
};
struct SoftmaxSpec {};

using LayerSpec =
    std::variant<ConvSpec, FcSpec, ReluSpec, MaxPoolSpec, BatchNormSpec, DropoutSpec, SoftmaxSpec>;

inline std::string layer_kind_name(const LayerSpec& l) {
    struct V {
        std::string operator()(const ConvSpec&) const { return "conv"; }
        std::string operator()(const FcSpec&) const { return "fc"; }
        std::string operator()(const ReluSpec&) const { return "relu"; }
        std::string operator()(const MaxPoolSpec&) const { return "maxpool"; }
        std::string operator()(const BatchNormSpec&) const { return "batchnorm"; }
        std::string operator()(const DropoutSpec&) const { return "dropout"; }
        std::string operator()(const SoftmaxSpec&) const { return "softmax"; }
    };
    return std::visit(V{}, l);
}

struct NetworkSpec {
    std::vector<LayerSpec> layers;
    std::vector<size_t> input_shape;  // [channels, height, width] or [features]

    // Shape-chains the network and returns the per-layer output shapes.
    // With require_classifier the last layer must be a softmax.
    std::vector<std::vector<size_t>> validate(bool require_classifier = true) const {
        std::vector<std::vector<size_t>> shapes;
        std::vector<size_t> cur = input_shape;
        for (size_t i = 0; i < layers.size(); ++i) {
            auto err = [&](const std::string& msg) {
                throw std::invalid_argument("layer " + std::to_string(i) + " (" +
                                            layer_kind_name(layers[i]) + "): " + msg);
            };
            if (const auto* c = std::get_if<ConvSpec>(&layers[i])) {
                if (cur.size() != 3) err("needs a [C,H,W] input");
                if (cur[0] != c->in_channels) err("input channel mismatch");
                cur = {c->out_channels, cur[1], cur[2]};
            } else if (const auto* f = std::get_if<FcSpec>(&layers[i])) {
                size_t flat = Tensor::element_count(cur);
                if (flat != f->inputs) err("expects " + std::to_string(f->inputs) +
                                           " inputs, got " + std::to_string(flat));
                cur = {f->outputs};
            } else if (std::holds_alternative<MaxPoolSpec>(layers[i])) {
                if (cur.size() != 3) err("needs a [C,H,W] input");
                if (cur[1] % 2 != 0 || cur[2] % 2 != 0) err("spatial dims must be even");
                cur = {cur[0], cur[1] / 2, cur[2] / 2};
            } else if (const auto* b = std::get_if<BatchNormSpec>(&layers[i])) {
                if (cur.size() != 3 || cur[0] != b->channels) err("channel mismatch");
            } else if (const auto* d = std::get_if<DropoutSpec>(&layers[i])) {
                if (d->rate < 0.0 || d->rate >= 1.0) err("rate must be in [0,1)");
            } else if (std::holds_alternative<SoftmaxSpec>(layers[i])) {
                if (cur.size() != 1) err("needs a flat input");
            }
            shapes.push_back(cur);
        }
        if (require_classifier) {
            if (layers.empty() || !std::holds_alternative<SoftmaxSpec>(layers.back()))
                throw std::invalid_argument("network must end with a softmax layer");
        }
        return shapes;
    }

    size_t class_count() const {
        auto shapes = validate(true);
        return shapes.back()[0];
    }

    // The two experiment architectures.
    static NetworkSpec mnist_cnn() {
        NetworkSpec n;
        n.input_shape = {1, 28, 28};
        n.layers = {ConvSpec{3, 1, 32}, ReluSpec{}, MaxPoolSpec{},
                    ConvSpec{3, 32, 64}, ReluSpec{}, MaxPoolSpec{},
                    FcSpec{7 * 7 * 64, 10}, SoftmaxSpec{}};
        return n;
    }

    static NetworkSpec cifar_cnn() {
        NetworkSpec n;
        n.input_shape = {3, 32, 32};
        n.layers = {ConvSpec{3, 3, 32},   BatchNormSpec{32}, ReluSpec{},
                    ConvSpec{3, 32, 32},  BatchNormSpec{32}, ReluSpec{},
                    MaxPoolSpec{},
                    ConvSpec{3, 32, 64},  BatchNormSpec{64}, ReluSpec{},
                    ConvSpec{3, 64, 64},  BatchNormSpec{64}, ReluSpec{},
                    MaxPoolSpec{},
                    ConvSpec{3, 64, 128}, BatchNormSpec{128}, ReluSpec{},
                    ConvSpec{3, 128, 128}, BatchNormSpec{128}, ReluSpec{},
                    MaxPoolSpec{},
                    FcSpec{4 * 4 * 128, 128}, ReluSpec{}, DropoutSpec{0.5},
                    FcSpec{128, 10}, SoftmaxSpec{}};
        return n;
    }
};

// Trainable parameters for one layer.  Conv weights are [k,k,M,N], FC
// weights [M,N], biases [N]; batch-norm layers carry their four parameter
// vectors instead.
struct LayerWeights {
    Tensor weight;
    Tensor bias;
    Tensor gamma, beta, running_mean, running_var;

    bool has_weight() const { return !weight.data.empty(); }
    bool has_batchnorm() const { return !gamma.data.empty(); }
};

struct WeightStore {
    std::map<size_t, LayerWeights> layers;  // keyed by layer index

    LayerWeights& at(size_t i) { return layers.at(i); }
    const LayerWeights& at(size_t i) const { return layers.at(i); }

    // Checks shapes against a network.
    void validate(const NetworkSpec& net) const {
        for (size_t i = 0; i < net.layers.size(); ++i) {
            auto err = [&](const std::string& msg) {
                throw std::invalid_argument("layer " + std::to_string(i) + ": " + msg);
            };
            if (const auto* c = std::get_if<ConvSpec>(&net.layers[i])) {
                auto it = layers.find(i);
                if (it == layers.end()) err("missing conv weights");
                const auto& lw = it->second;
                std::vector<size_t> want = {c->kernel, c->kernel, c->in_channels, c->out_channels};
                if (lw.weight.shape != want) err("conv weight shape mismatch");
                if (lw.bias.shape != std::vector<size_t>{c->out_channels}) err("conv bias shape mismatch");
            } else if (const auto* f = std::get_if<FcSpec>(&net.layers[i])) {
                auto it = layers.find(i);
                if (it == layers.end()) err("missing fc weights");
                const auto& lw = it->second;
                if (lw.weight.shape != std::vector<size_t>{f->inputs, f->outputs})
                    err("fc weight shape mismatch");
                if (lw.bias.shape != std::vector<size_t>{f->outputs}) err("fc bias shape mismatch");
            } else if (const auto* b = std::get_if<BatchNormSpec>(&net.layers[i])) {
                auto it = layers.find(i);
                if (it == layers.end()) err("missing batchnorm parameters");
                const auto& lw = it->second;
                std::vector<size_t> want = {b->channels};
                if (lw.gamma.shape != want || lw.beta.shape != want ||
                    lw.running_mean.shape != want || lw.running_var.shape != want)
                    err("batchnorm parameter shape mismatch");
            }
        }
    }
};

}  // namespace poi::nn

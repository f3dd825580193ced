// Copyright (c) 2026 the poi authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <thread>
#include <vector>

#include "poi/nn/dataset.hpp"
#include "poi/nn/network.hpp"

namespace poi::nn {

// ---- layer primitives (stride 1, same padding, 2x2 pooling) --------------

inline Tensor conv_forward(const Tensor& x, const Tensor& w, const Tensor& b) {
    size_t C = x.dim(0), H = x.dim(1), W = x.dim(2);
    size_t k = w.dim(0), M = w.dim(2), N = w.dim(3);
    if (M != C) throw std::invalid_argument("conv_forward: channel mismatch");
    long pad = static_cast<long>(k / 2);
    Tensor y({N, H, W});
    for (size_t ky = 0; ky < k; ++ky) {
        for (size_t kx = 0; kx < k; ++kx) {
            for (size_t ci = 0; ci < C; ++ci) {
                const float* wrow = &w.data[((ky * k + kx) * M + ci) * N];
                for (size_t oy = 0; oy < H; ++oy) {
                    long iy = static_cast<long>(oy + ky) - pad;
                    if (iy < 0 || iy >= static_cast<long>(H)) continue;
                    for (size_t ox = 0; ox < W; ++ox) {
                        long ix = static_cast<long>(ox + kx) - pad;
                        if (ix < 0 || ix >= static_cast<long>(W)) continue;
                        float v = x.data[(ci * H + iy) * W + ix];
                        float* yrow = &y.data[oy * W + ox];
                        for (size_t co = 0; co < N; ++co)
                            yrow[co * H * W] += v * wrow[co];
                    }
                }
            }
        }
    }
    for (size_t co = 0; co < N; ++co) {
        float bv = b.data[co];
        float* yc = &y.data[co * H * W];
        for (size_t i = 0; i < H * W; ++i) yc[i] += bv;
    }
    return y;
}

inline Tensor fc_forward(const Tensor& x, const Tensor& w, const Tensor& b) {
    size_t M = w.dim(0), N = w.dim(1);
    if (x.size() != M) throw std::invalid_argument("fc_forward: input size mismatch");
    Tensor y({N});
    for (size_t i = 0; i < M; ++i) {
        float v = x.data[i];
        if (v == 0.0f) continue;
        const float* wrow = &w.data[i * N];
        for (size_t j = 0; j < N; ++j) y.data[j] += v * wrow[j];
    }
    for (size_t j = 0; j < N; ++j) y.data[j] += b.data[j];
    return y;
}

inline Tensor relu_forward(const Tensor& x) {
    Tensor y = x;
    for (auto& v : y.data) v = std::max(v, 0.0f);
    return y;
}

inline Tensor maxpool_forward(const Tensor& x, std::vector<size_t>* argmax = nullptr) {
    size_t C = x.dim(0), H = x.dim(1), W = x.dim(2);
    Tensor y({C, H / 2, W / 2});
    if (argmax) argmax->assign(y.size(), 0);
    for (size_t c = 0; c < C; ++c)
        for (size_t oy = 0; oy < H / 2; ++oy)
            for (size_t ox = 0; ox < W / 2; ++ox) {
                size_t best_idx = (c * H + 2 * oy) * W + 2 * ox;
                float best = x.data[best_idx];
                for (size_t dy = 0; dy < 2; ++dy)
                    for (size_t dx = 0; dx < 2; ++dx) {
                        size_t idx = (c * H + 2 * oy + dy) * W + 2 * ox + dx;
                        if (x.data[idx] > best) {  // first occurrence wins ties
                            best = x.data[idx];
                            best_idx = idx;
                        }
                    }
                size_t out = (c * (H / 2) + oy) * (W / 2) + ox;
                y.data[out] = best;
                if (argmax) (*argmax)[out] = best_idx;
            }
    return y;
}

inline Tensor batchnorm_inference(const Tensor& x, const LayerWeights& lw) {
    size_t C = x.dim(0), HW = x.dim(1) * x.dim(2);
    Tensor y = x;
    for (size_t c = 0; c < C; ++c) {
        float scale = lw.gamma.data[c] / std::sqrt(lw.running_var.data[c] + kBnEpsilon);
        float shift = lw.beta.data[c] - lw.running_mean.data[c] * scale;
        float* yc = &y.data[c * HW];
        for (size_t i = 0; i < HW; ++i) yc[i] = yc[i] * scale + shift;
    }
    return y;
}

inline Tensor softmax_forward(const Tensor& x) {
    Tensor y = x;
    float mx = *std::max_element(y.data.begin(), y.data.end());
    double sum = 0;
    for (auto& v : y.data) {
        v = std::exp(v - mx);
        sum += v;
    }
    for (auto& v : y.data) v = static_cast<float>(v / sum);
    return y;
}

// ---- whole-network inference ----------------------------------------------

// Dropout is the identity here; batch norm uses running statistics.
inline Tensor forward(const NetworkSpec& net, const WeightStore& weights, const Tensor& input) {
    net.validate(false);
    weights.validate(net);
    if (input.shape != net.input_shape) {
        if (Tensor::element_count(input.shape) != Tensor::element_count(net.input_shape))
            throw std::invalid_argument("forward: input shape mismatch");
    }
    Tensor cur = input;
    cur.shape = net.input_shape;
    for (size_t i = 0; i < net.layers.size(); ++i) {
        const LayerSpec& l = net.layers[i];
        if (std::holds_alternative<ConvSpec>(l)) {
            const auto& lw = weights.at(i);
            cur = conv_forward(cur, lw.weight, lw.bias);
        } else if (const auto* f = std::get_if<FcSpec>(&l)) {
            cur.shape = {f->inputs};
            const auto& lw = weights.at(i);
            cur = fc_forward(cur, lw.weight, lw.bias);
        } else if (std::holds_alternative<ReluSpec>(l)) {
            cur = relu_forward(cur);
        } else if (std::holds_alternative<MaxPoolSpec>(l)) {
            cur = maxpool_forward(cur);
        } else if (std::holds_alternative<BatchNormSpec>(l)) {
            cur = batchnorm_inference(cur, weights.at(i));
        } else if (std::holds_alternative<SoftmaxSpec>(l)) {
            cur = softmax_forward(cur);
        }
        // dropout: identity outside training
    }
    return cur;
}

inline size_t argmax_lowest(const Tensor& probs) {
    size_t best = 0;
    for (size_t j = 1; j < probs.size(); ++j)
        if (probs.data[j] > probs.data[best]) best = j;
    return best;
}

inline size_t worker_thread_count() {
    if (const char* env = std::getenv("POI_THREADS")) {
        long v = std::atol(env);
        if (v >= 1) return static_cast<size_t>(v);
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : hc;
}

// Fraction of test samples whose argmax prediction (lowest class index on
// ties) matches the label.  Per-sample forwards run concurrently.
inline double evaluate_accuracy(const NetworkSpec& net, const WeightStore& weights,
                                const Dataset& data) {
    if (data.size() == 0) throw std::invalid_argument("evaluate_accuracy: empty dataset");
    size_t threads = std::min(worker_thread_count(), data.size());
    std::vector<uint8_t> correct(data.size(), 0);
    auto work = [&](size_t t) {
        for (size_t i = t; i < data.size(); i += threads) {
            Tensor probs = forward(net, weights, data.images[i]);
            correct[i] = argmax_lowest(probs) == static_cast<size_t>(data.labels[i]) ? 1 : 0;
        }
    };
    if (threads == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (size_t t = 0; t < threads; ++t) pool.emplace_back(work, t);
        for (auto& th : pool) th.join();
    }
    size_t hits = 0;
    for (uint8_t c : correct) hits += c;
    return static_cast<double>(hits) / static_cast<double>(data.size());
}

}  // namespace poi::nn

// Copyright (c) 2026 the poi authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "poi/nn/dataset.hpp"
#include "poi/nn/forward.hpp"
#include "poi/nn/network.hpp"

namespace poi::nn {

struct TrainConfig {
    double learning_rate = 1e-3;  // Adam
    size_t epochs = 10;
    size_t batch_size = 32;
    double validation_fraction = 0.0;
    size_t early_stop_patience = 0;  // 0 disables early stopping
    uint64_t seed = 0;

    void validate() const {
        if (learning_rate < 0) throw std::invalid_argument("TrainConfig: negative learning rate");
        if (epochs < 1) throw std::invalid_argument("TrainConfig: epochs must be >= 1");
        if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
        if (validation_fraction < 0 || validation_fraction >= 1)
            throw std::invalid_argument("TrainConfig: validation_fraction must be in [0,1)");
    }
};

struct TrainResult {
    WeightStore weights;
    std::vector<double> train_loss;  // per epoch
    std::vector<double> val_loss;    // per epoch, empty without a validation set
    size_t epochs_run = 0;
    bool stopped_early = false;
};

// Uniform fan-in initialization: U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
inline WeightStore init_weights(const NetworkSpec& net, uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto uniform_fill = [&](Tensor& t, size_t fan_in) {
        double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        std::uniform_real_distribution<double> dist(-bound, bound);
        for (auto& v : t.data) v = static_cast<float>(dist(rng));
    };
    WeightStore ws;
    for (size_t i = 0; i < net.layers.size(); ++i) {
        if (const auto* c = std::get_if<ConvSpec>(&net.layers[i])) {
            LayerWeights lw;
            lw.weight = Tensor({c->kernel, c->kernel, c->in_channels, c->out_channels});
            lw.bias = Tensor({c->out_channels});
            uniform_fill(lw.weight, c->kernel * c->kernel * c->in_channels);
            ws.layers[i] = std::move(lw);
        } else if (const auto* f = std::get_if<FcSpec>(&net.layers[i])) {
            LayerWeights lw;
            lw.weight = Tensor({f->inputs, f->outputs});
            lw.bias = Tensor({f->outputs});
            uniform_fill(lw.weight, f->inputs);
            ws.layers[i] = std::move(lw);
        } else if (const auto* b = std::get_if<BatchNormSpec>(&net.layers[i])) {
            LayerWeights lw;
            lw.gamma = Tensor({b->channels});
            lw.beta = Tensor({b->channels});
            lw.running_mean = Tensor({b->channels});
            lw.running_var = Tensor({b->channels});
            for (auto& v : lw.gamma.data) v = 1.0f;
            for (auto& v : lw.running_var.data) v = 1.0f;
            ws.layers[i] = std::move(lw);
        }
    }
    return ws;
}

namespace detail {

constexpr float kBnMomentum = 0.9f;

struct BnCache {
    std::vector<float> mean, var;          // per channel, this batch
    std::vector<Tensor> xhat;              // per sample
};

struct BatchCache {
    // acts[l][s]: output of layer l for sample s; index 0 holds the inputs.
    std::vector<std::vector<Tensor>> acts;
    std::vector<std::vector<std::vector<size_t>>> pool_argmax;  // [layer][sample]
    std::vector<std::vector<Tensor>> dropout_mask;              // [layer][sample]
    std::vector<BnCache> bn;                                    // [layer]
};

inline void batchnorm_train_forward(const BatchNormSpec& spec, LayerWeights& lw,
                                    std::vector<Tensor>& xs, BnCache& cache) {
    size_t B = xs.size();
    size_t C = spec.channels;
    size_t HW = xs[0].dim(1) * xs[0].dim(2);
    double m = static_cast<double>(B) * HW;
    cache.mean.assign(C, 0.0f);
    cache.var.assign(C, 0.0f);
    for (size_t c = 0; c < C; ++c) {
        double sum = 0;
        for (const Tensor& x : xs) {
            const float* xc = &x.data[c * HW];
            for (size_t i = 0; i < HW; ++i) sum += xc[i];
        }
        float mean = static_cast<float>(sum / m);
        double sq = 0;
        for (const Tensor& x : xs) {
            const float* xc = &x.data[c * HW];
            for (size_t i = 0; i < HW; ++i) {
                double d = xc[i] - mean;
                sq += d * d;
            }
        }
        cache.mean[c] = mean;
        cache.var[c] = static_cast<float>(sq / m);
        lw.running_mean.data[c] =
            kBnMomentum * lw.running_mean.data[c] + (1 - kBnMomentum) * cache.mean[c];
        lw.running_var.data[c] =
            kBnMomentum * lw.running_var.data[c] + (1 - kBnMomentum) * cache.var[c];
    }
    cache.xhat.assign(B, Tensor(xs[0].shape));
    for (size_t s = 0; s < B; ++s) {
        for (size_t c = 0; c < C; ++c) {
            float inv = 1.0f / std::sqrt(cache.var[c] + kBnEpsilon);
            const float* xc = &xs[s].data[c * HW];
            float* hc = &cache.xhat[s].data[c * HW];
            for (size_t i = 0; i < HW; ++i) hc[i] = (xc[i] - cache.mean[c]) * inv;
        }
    }
    for (size_t s = 0; s < B; ++s)
        for (size_t c = 0; c < C; ++c) {
            float* xc = &xs[s].data[c * HW];
            const float* hc = &cache.xhat[s].data[c * HW];
            for (size_t i = 0; i < HW; ++i)
                xc[i] = lw.gamma.data[c] * hc[i] + lw.beta.data[c];
        }
}

inline std::vector<Tensor> batchnorm_backward(const BatchNormSpec& spec, const LayerWeights& lw,
                                              const BnCache& cache,
                                              const std::vector<Tensor>& grads, Tensor& dgamma,
                                              Tensor& dbeta) {
    size_t B = grads.size();
    size_t C = spec.channels;
    size_t HW = grads[0].dim(1) * grads[0].dim(2);
    double m = static_cast<double>(B) * HW;
    std::vector<Tensor> dx(B, Tensor(grads[0].shape));
    for (size_t c = 0; c < C; ++c) {
        double sum_dy = 0, sum_dy_xhat = 0;
        for (size_t s = 0; s < B; ++s) {
            const float* g = &grads[s].data[c * HW];
            const float* h = &cache.xhat[s].data[c * HW];
            for (size_t i = 0; i < HW; ++i) {
                sum_dy += g[i];
                sum_dy_xhat += static_cast<double>(g[i]) * h[i];
            }
        }
        dgamma.data[c] += static_cast<float>(sum_dy_xhat);
        dbeta.data[c] += static_cast<float>(sum_dy);
        float inv = 1.0f / std::sqrt(cache.var[c] + kBnEpsilon);
        float g_scale = lw.gamma.data[c] * inv;
        for (size_t s = 0; s < B; ++s) {
            const float* g = &grads[s].data[c * HW];
            const float* h = &cache.xhat[s].data[c * HW];
            float* d = &dx[s].data[c * HW];
            for (size_t i = 0; i < HW; ++i)
                d[i] = static_cast<float>(
                    g_scale * (g[i] - sum_dy / m - h[i] * sum_dy_xhat / m));
        }
    }
    return dx;
}

inline Tensor conv_backward_input(const Tensor& dy, const Tensor& w, const std::vector<size_t>& xshape) {
    size_t C = xshape[0], H = xshape[1], W = xshape[2];
    size_t k = w.dim(0), M = w.dim(2), N = w.dim(3);
    long pad = static_cast<long>(k / 2);
    Tensor dx({C, H, W});
    for (size_t ky = 0; ky < k; ++ky)
        for (size_t kx = 0; kx < k; ++kx)
            for (size_t ci = 0; ci < M; ++ci) {
                const float* wrow = &w.data[((ky * k + kx) * M + ci) * N];
                for (size_t oy = 0; oy < H; ++oy) {
                    long iy = static_cast<long>(oy + ky) - pad;
                    if (iy < 0 || iy >= static_cast<long>(H)) continue;
                    for (size_t ox = 0; ox < W; ++ox) {
                        long ix = static_cast<long>(ox + kx) - pad;
                        if (ix < 0 || ix >= static_cast<long>(W)) continue;
                        const float* dyrow = &dy.data[oy * W + ox];
                        float acc = 0;
                        for (size_t co = 0; co < N; ++co)
                            acc += dyrow[co * H * W] * wrow[co];
                        dx.data[(ci * H + iy) * W + ix] += acc;
                    }
                }
            }
    return dx;
}

inline void conv_backward_params(const Tensor& x, const Tensor& dy, Tensor& dw, Tensor& db) {
    size_t C = x.dim(0), H = x.dim(1), W = x.dim(2);
    size_t k = dw.dim(0), M = dw.dim(2), N = dw.dim(3);
    long pad = static_cast<long>(k / 2);
    for (size_t ky = 0; ky < k; ++ky)
        for (size_t kx = 0; kx < k; ++kx)
            for (size_t ci = 0; ci < C; ++ci) {
                float* dwrow = &dw.data[((ky * k + kx) * M + ci) * N];
                for (size_t oy = 0; oy < H; ++oy) {
                    long iy = static_cast<long>(oy + ky) - pad;
                    if (iy < 0 || iy >= static_cast<long>(H)) continue;
                    for (size_t ox = 0; ox < W; ++ox) {
                        long ix = static_cast<long>(ox + kx) - pad;
                        if (ix < 0 || ix >= static_cast<long>(W)) continue;
                        float xv = x.data[(ci * H + iy) * W + ix];
                        if (xv == 0.0f) continue;
                        const float* dyrow = &dy.data[oy * W + ox];
                        for (size_t co = 0; co < N; ++co)
                            dwrow[co] += xv * dyrow[co * H * W];
                    }
                }
            }
    size_t HW = H * W;
    for (size_t co = 0; co < N; ++co) {
        const float* dyc = &dy.data[co * HW];
        float acc = 0;
        for (size_t i = 0; i < HW; ++i) acc += dyc[i];
        db.data[co] += acc;
    }
}

struct AdamState {
    std::map<size_t, LayerWeights> m, v;  // same shapes as the weights
    size_t t = 0;
};

inline void adam_init_like(const WeightStore& ws, std::map<size_t, LayerWeights>& out) {
    for (const auto& [i, lw] : ws.layers) {
        LayerWeights z;
        if (lw.has_weight()) {
            z.weight = Tensor(lw.weight.shape);
            z.bias = Tensor(lw.bias.shape);
        }
        if (lw.has_batchnorm()) {
            z.gamma = Tensor(lw.gamma.shape);
            z.beta = Tensor(lw.beta.shape);
        }
        out[i] = std::move(z);
    }
}

inline void adam_update_tensor(Tensor& w, const Tensor& g, Tensor& m, Tensor& v, double lr,
                               size_t t) {
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    double c1 = 1.0 - std::pow(b1, static_cast<double>(t));
    double c2 = 1.0 - std::pow(b2, static_cast<double>(t));
    for (size_t i = 0; i < w.size(); ++i) {
        double gi = g.data[i];
        m.data[i] = static_cast<float>(b1 * m.data[i] + (1 - b1) * gi);
        v.data[i] = static_cast<float>(b2 * v.data[i] + (1 - b2) * gi * gi);
        double mh = m.data[i] / c1;
        double vh = v.data[i] / c2;
        w.data[i] -= static_cast<float>(lr * mh / (std::sqrt(vh) + eps));
    }
}

}  // namespace detail

// Mean categorical cross-entropy of the network on a sample set (inference
// mode: running batch-norm statistics, no dropout).
inline double dataset_loss(const NetworkSpec& net, const WeightStore& ws, const Dataset& data,
                           const std::vector<size_t>& indices) {
    double total = 0;
    for (size_t i : indices) {
        Tensor probs = forward(net, ws, data.images[i]);
        double p = std::max(static_cast<double>(probs.data[data.labels[i]]), 1e-12);
        total += -std::log(p);
    }
    return total / static_cast<double>(indices.size());
}

// Adam training with categorical cross-entropy.  Deterministic for a fixed
// seed; aborts on non-finite loss.
inline TrainResult train_with_history(const NetworkSpec& net, const Dataset& data,
                                      const TrainConfig& cfg) {
    cfg.validate();
    net.validate(true);
    data.check_valid();
    if (data.size() == 0) throw std::invalid_argument("train: empty dataset");

    std::mt19937_64 rng(cfg.seed ^ 0xa5a5a5a5ull);
    std::vector<size_t> order(data.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);

    size_t val_count = static_cast<size_t>(cfg.validation_fraction * data.size());
    std::vector<size_t> val_idx(order.end() - val_count, order.end());
    std::vector<size_t> train_idx(order.begin(), order.end() - val_count);
    if (train_idx.empty()) throw std::invalid_argument("train: no training samples left");

    TrainResult result;
    result.weights = init_weights(net, cfg.seed);
    WeightStore& ws = result.weights;

    detail::AdamState adam;
    detail::adam_init_like(ws, adam.m);
    detail::adam_init_like(ws, adam.v);

    double best_val = std::numeric_limits<double>::infinity();
    size_t stall = 0;

    for (size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(train_idx.begin(), train_idx.end(), rng);
        double epoch_loss = 0;
        size_t seen = 0;

        for (size_t start = 0; start < train_idx.size(); start += cfg.batch_size) {
            size_t B = std::min(cfg.batch_size, train_idx.size() - start);
            std::vector<Tensor> xs(B);
            std::vector<int> ys(B);
            for (size_t s = 0; s < B; ++s) {
                xs[s] = data.images[train_idx[start + s]];
                xs[s].shape = net.input_shape;
                ys[s] = data.labels[train_idx[start + s]];
            }

            // ---- forward with caches
            detail::BatchCache cache;
            cache.acts.resize(net.layers.size() + 1);
            cache.pool_argmax.resize(net.layers.size());
            cache.dropout_mask.resize(net.layers.size());
            cache.bn.resize(net.layers.size());
            cache.acts[0] = xs;

            std::vector<Tensor> cur = std::move(xs);
            for (size_t l = 0; l < net.layers.size(); ++l) {
                const LayerSpec& spec = net.layers[l];
                if (std::holds_alternative<ConvSpec>(spec)) {
                    const auto& lw = ws.at(l);
                    for (auto& t : cur) t = conv_forward(t, lw.weight, lw.bias);
                } else if (const auto* f = std::get_if<FcSpec>(&spec)) {
                    const auto& lw = ws.at(l);
                    for (auto& t : cur) {
                        t.shape = {f->inputs};
                        t = fc_forward(t, lw.weight, lw.bias);
                    }
                } else if (std::holds_alternative<ReluSpec>(spec)) {
                    for (auto& t : cur) t = relu_forward(t);
                } else if (std::holds_alternative<MaxPoolSpec>(spec)) {
                    cache.pool_argmax[l].resize(B);
                    for (size_t s = 0; s < B; ++s)
                        cur[s] = maxpool_forward(cur[s], &cache.pool_argmax[l][s]);
                } else if (const auto* bn = std::get_if<BatchNormSpec>(&spec)) {
                    detail::batchnorm_train_forward(*bn, ws.at(l), cur, cache.bn[l]);
                } else if (const auto* dr = std::get_if<DropoutSpec>(&spec)) {
                    cache.dropout_mask[l].resize(B);
                    std::uniform_real_distribution<double> u(0.0, 1.0);
                    float keep = static_cast<float>(1.0 - dr->rate);
                    for (size_t s = 0; s < B; ++s) {
                        Tensor mask(cur[s].shape);
                        for (size_t i = 0; i < mask.size(); ++i)
                            mask.data[i] = u(rng) < dr->rate ? 0.0f : 1.0f / keep;
                        for (size_t i = 0; i < cur[s].size(); ++i) cur[s].data[i] *= mask.data[i];
                        cache.dropout_mask[l][s] = std::move(mask);
                    }
                } else if (std::holds_alternative<SoftmaxSpec>(spec)) {
                    for (auto& t : cur) t = softmax_forward(t);
                }
                cache.acts[l + 1] = cur;
            }

            // ---- loss and top gradient (softmax + cross-entropy)
            double batch_loss = 0;
            std::vector<Tensor> grad(B);
            for (size_t s = 0; s < B; ++s) {
                const Tensor& probs = cur[s];
                double p = std::max(static_cast<double>(probs.data[ys[s]]), 1e-12);
                batch_loss += -std::log(p);
                grad[s] = probs;
                grad[s].data[ys[s]] -= 1.0f;
                for (auto& g : grad[s].data) g /= static_cast<float>(B);
            }
            batch_loss /= static_cast<double>(B);
            if (!std::isfinite(batch_loss))
                throw std::runtime_error("train: diverged (non-finite loss)");
            epoch_loss += batch_loss * B;
            seen += B;

            // ---- backward
            WeightStore grads;
            for (const auto& [i, lw] : ws.layers) {
                LayerWeights g;
                if (lw.has_weight()) {
                    g.weight = Tensor(lw.weight.shape);
                    g.bias = Tensor(lw.bias.shape);
                }
                if (lw.has_batchnorm()) {
                    g.gamma = Tensor(lw.gamma.shape);
                    g.beta = Tensor(lw.beta.shape);
                }
                grads.layers[i] = std::move(g);
            }

            for (size_t li = net.layers.size(); li-- > 0;) {
                const LayerSpec& spec = net.layers[li];
                const std::vector<Tensor>& x_in = cache.acts[li];
                if (std::holds_alternative<SoftmaxSpec>(spec)) {
                    // combined with the loss gradient above
                } else if (std::holds_alternative<ConvSpec>(spec)) {
                    auto& lw = ws.at(li);
                    auto& g = grads.at(li);
                    std::vector<Tensor> dx(B);
                    for (size_t s = 0; s < B; ++s) {
                        detail::conv_backward_params(x_in[s], grad[s], g.weight, g.bias);
                        dx[s] = detail::conv_backward_input(grad[s], lw.weight, x_in[s].shape);
                    }
                    grad = std::move(dx);
                } else if (const auto* f = std::get_if<FcSpec>(&spec)) {
                    auto& lw = ws.at(li);
                    auto& g = grads.at(li);
                    std::vector<Tensor> dx(B);
                    for (size_t s = 0; s < B; ++s) {
                        Tensor xin = x_in[s];
                        xin.shape = {f->inputs};
                        for (size_t i = 0; i < f->inputs; ++i) {
                            float xv = xin.data[i];
                            const float* gy = grad[s].data.data();
                            float* gw = &g.weight.data[i * f->outputs];
                            float acc = 0;
                            const float* wrow = &lw.weight.data[i * f->outputs];
                            for (size_t j = 0; j < f->outputs; ++j) {
                                gw[j] += xv * gy[j];
                                acc += wrow[j] * gy[j];
                            }
                            xin.data[i] = acc;  // reuse as dx
                        }
                        for (size_t j = 0; j < f->outputs; ++j) g.bias.data[j] += grad[s].data[j];
                        xin.shape = x_in[s].shape;
                        dx[s] = std::move(xin);
                    }
                    grad = std::move(dx);
                } else if (std::holds_alternative<ReluSpec>(spec)) {
                    for (size_t s = 0; s < B; ++s)
                        for (size_t i = 0; i < grad[s].size(); ++i)
                            if (x_in[s].data[i] <= 0.0f) grad[s].data[i] = 0.0f;
                } else if (std::holds_alternative<MaxPoolSpec>(spec)) {
                    for (size_t s = 0; s < B; ++s) {
                        Tensor dx(x_in[s].shape);
                        const auto& amax = cache.pool_argmax[li][s];
                        for (size_t i = 0; i < amax.size(); ++i) dx.data[amax[i]] += grad[s].data[i];
                        grad[s] = std::move(dx);
                    }
                } else if (const auto* bn = std::get_if<BatchNormSpec>(&spec)) {
                    auto& g = grads.at(li);
                    grad = detail::batchnorm_backward(*bn, ws.at(li), cache.bn[li], grad, g.gamma,
                                                      g.beta);
                } else if (std::holds_alternative<DropoutSpec>(spec)) {
                    for (size_t s = 0; s < B; ++s)
                        for (size_t i = 0; i < grad[s].size(); ++i)
                            grad[s].data[i] *= cache.dropout_mask[li][s].data[i];
                }
            }

            // ---- Adam step
            ++adam.t;
            for (auto& [i, lw] : ws.layers) {
                auto& g = grads.at(i);
                auto& m = adam.m.at(i);
                auto& v = adam.v.at(i);
                if (lw.has_weight()) {
                    detail::adam_update_tensor(lw.weight, g.weight, m.weight, v.weight,
                                               cfg.learning_rate, adam.t);
                    detail::adam_update_tensor(lw.bias, g.bias, m.bias, v.bias, cfg.learning_rate,
                                               adam.t);
                }
                if (lw.has_batchnorm()) {
                    detail::adam_update_tensor(lw.gamma, g.gamma, m.gamma, v.gamma,
                                               cfg.learning_rate, adam.t);
                    detail::adam_update_tensor(lw.beta, g.beta, m.beta, v.beta, cfg.learning_rate,
                                               adam.t);
                }
            }
        }

        result.train_loss.push_back(epoch_loss / static_cast<double>(seen));
        result.epochs_run = epoch + 1;

        if (!val_idx.empty()) {
            double vl = dataset_loss(net, ws, data, val_idx);
            result.val_loss.push_back(vl);
            if (cfg.early_stop_patience > 0) {
                if (vl < best_val - 1e-9) {
                    best_val = vl;
                    stall = 0;
                } else if (++stall > cfg.early_stop_patience) {
                    result.stopped_early = true;
                    break;
                }
            }
        }
    }
    return result;
}

inline WeightStore train(const NetworkSpec& net, const Dataset& data, const TrainConfig& cfg) {
    return train_with_history(net, data, cfg).weights;
}

}  // namespace poi::nn

// Copyright (c) 2026 the poi authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "poi/nn/network.hpp"

namespace poi::leak {

// How a layer's weights are grouped into polynomials for packing.  Weights
// sharing a group are revealed or hidden together.
enum class GroupScheme {
    fc_naive_rows,   // one group per output neuron (N groups of M)
    fc_diagonal,     // generalized diagonals (M groups of N)
    fc_hybrid_rows,  // hybrid packing, same row grouping as naive
    conv_per_filter, // one group per output filter (N groups of k*k*M)
    conv_per_kernel, // one group per (filter, input channel) kernel (M*N groups of k*k)
};

inline std::string scheme_name(GroupScheme s) {
    switch (s) {
        case GroupScheme::fc_naive_rows: return "fc_naive_rows";
        case GroupScheme::fc_diagonal: return "fc_diagonal";
        case GroupScheme::fc_hybrid_rows: return "fc_hybrid_rows";
        case GroupScheme::conv_per_filter: return "conv_per_filter";
        case GroupScheme::conv_per_kernel: return "conv_per_kernel";
    }
    throw std::logic_error("scheme_name: unknown scheme");
}

inline GroupScheme scheme_from_name(const std::string& name) {
    if (name == "fc_naive_rows") return GroupScheme::fc_naive_rows;
    if (name == "fc_diagonal") return GroupScheme::fc_diagonal;
    if (name == "fc_hybrid_rows") return GroupScheme::fc_hybrid_rows;
    if (name == "conv_per_filter") return GroupScheme::conv_per_filter;
    if (name == "conv_per_kernel") return GroupScheme::conv_per_kernel;
    throw std::invalid_argument("unknown group scheme '" + name + "'");
}

// Exact partition of a weight tensor into ordered groups of flat indices.
inline std::vector<std::vector<size_t>> group_indices(const std::vector<size_t>& shape,
                                                      GroupScheme scheme) {
    std::vector<std::vector<size_t>> groups;
    switch (scheme) {
        case GroupScheme::fc_naive_rows:
        case GroupScheme::fc_hybrid_rows: {
            if (shape.size() != 2) throw std::invalid_argument("fc scheme on non-fc weights");
            size_t M = shape[0], N = shape[1];
            groups.assign(N, {});
            for (size_t j = 0; j < N; ++j) {
                groups[j].reserve(M);
                for (size_t i = 0; i < M; ++i) groups[j].push_back(i * N + j);
            }
            break;
        }
        case GroupScheme::fc_diagonal: {
            if (shape.size() != 2) throw std::invalid_argument("fc scheme on non-fc weights");
            size_t M = shape[0], N = shape[1];
            groups.assign(M, {});
            for (size_t d = 0; d < M; ++d) {
                groups[d].reserve(N);
                for (size_t j = 0; j < N; ++j) groups[d].push_back(((d + j) % M) * N + j);
            }
            break;
        }
        case GroupScheme::conv_per_filter: {
            if (shape.size() != 4) throw std::invalid_argument("conv scheme on non-conv weights");
            size_t k = shape[0], M = shape[2], N = shape[3];
            groups.assign(N, {});
            for (size_t f = 0; f < N; ++f) {
                groups[f].reserve(k * k * M);
                for (size_t ky = 0; ky < k; ++ky)
                    for (size_t kx = 0; kx < k; ++kx)
                        for (size_t c = 0; c < M; ++c)
                            groups[f].push_back(((ky * k + kx) * M + c) * N + f);
            }
            break;
        }
        case GroupScheme::conv_per_kernel: {
            if (shape.size() != 4) throw std::invalid_argument("conv scheme on non-conv weights");
            size_t k = shape[0], M = shape[2], N = shape[3];
            groups.assign(N * M, {});
            for (size_t f = 0; f < N; ++f)
                for (size_t c = 0; c < M; ++c) {
                    auto& g = groups[f * M + c];
                    g.reserve(k * k);
                    for (size_t ky = 0; ky < k; ++ky)
                        for (size_t kx = 0; kx < k; ++kx)
                            g.push_back(((ky * k + kx) * M + c) * N + f);
                }
            break;
        }
    }
    return groups;
}

inline std::vector<std::vector<float>> group_weights(const nn::Tensor& w, GroupScheme scheme) {
    auto idx = group_indices(w.shape, scheme);
    std::vector<std::vector<float>> out(idx.size());
    for (size_t g = 0; g < idx.size(); ++g) {
        out[g].reserve(idx[g].size());
        for (size_t i : idx[g]) out[g].push_back(w.data[i]);
    }
    return out;
}

// Ranking score for maximum-weight selection: mean absolute value.  Any
// fixed positive normalizer produces the same ranking.
inline double group_score(const std::vector<float>& group) {
    if (group.empty()) throw std::invalid_argument("group_score: empty group");
    double sum = 0;
    for (float v : group) sum += std::abs(v);
    return sum / static_cast<double>(group.size());
}

enum class SelectionStrategy { random, max_weight };

inline std::string strategy_name(SelectionStrategy s) {
    return s == SelectionStrategy::random ? "random" : "max_weight";
}

inline SelectionStrategy strategy_from_name(const std::string& name) {
    if (name == "random") return SelectionStrategy::random;
    if (name == "max_weight" || name == "max-weight") return SelectionStrategy::max_weight;
    throw std::invalid_argument("unknown selection strategy '" + name + "'");
}

struct LayerPlan {
    size_t layer = 0;
    GroupScheme scheme = GroupScheme::fc_naive_rows;
    size_t group_count = 0;
    std::vector<size_t> hidden;  // sorted, unique
    bool bias_hidden = true;
};

struct LeakagePlan {
    double p = 0.0;
    SelectionStrategy strategy = SelectionStrategy::random;
    bool hide_biases = true;
    uint64_t seed = 0;
    std::vector<LayerPlan> layers;

    const LayerPlan* find(size_t layer) const {
        for (const auto& lp : layers)
            if (lp.layer == layer) return &lp;
        return nullptr;
    }
};

inline size_t hidden_quota(double p, size_t group_count) {
    return static_cast<size_t>(std::floor(p * static_cast<double>(group_count) + 1e-9));
}

// Selects floor(p*G) groups per layer for encryption.  Random selection is
// a seeded uniform draw; max-weight hides the highest mean-|w| groups with
// ties broken toward the lowest index.
inline LeakagePlan plan_leakage(const nn::WeightStore& weights,
                                const std::map<size_t, GroupScheme>& schemes, double p,
                                SelectionStrategy strategy, bool hide_biases, uint64_t seed) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("plan_leakage: p must be in [0,1]");
    LeakagePlan plan;
    plan.p = p;
    plan.strategy = strategy;
    plan.hide_biases = hide_biases;
    plan.seed = seed;
    std::mt19937_64 rng(seed);
    for (const auto& [layer, scheme] : schemes) {
        const auto& lw = weights.at(layer);
        if (!lw.has_weight())
            throw std::invalid_argument("plan_leakage: layer " + std::to_string(layer) +
                                        " has no trainable weights");
        bool is_fc = lw.weight.rank() == 2;
        bool fc_scheme = scheme == GroupScheme::fc_naive_rows ||
                         scheme == GroupScheme::fc_diagonal ||
                         scheme == GroupScheme::fc_hybrid_rows;
        if (is_fc != fc_scheme)
            throw std::invalid_argument("plan_leakage: scheme does not match layer " +
                                        std::to_string(layer));

        auto groups = group_weights(lw.weight, scheme);
        size_t G = groups.size();
        size_t quota = hidden_quota(p, G);

        LayerPlan lp;
        lp.layer = layer;
        lp.scheme = scheme;
        lp.group_count = G;
        lp.bias_hidden = hide_biases;

        std::vector<size_t> order(G);
        for (size_t i = 0; i < G; ++i) order[i] = i;
        if (strategy == SelectionStrategy::random) {
            for (size_t i = 0; i < quota; ++i) {
                std::uniform_int_distribution<size_t> d(i, G - 1);
                std::swap(order[i], order[d(rng)]);
            }
        } else {
            std::vector<double> scores(G);
            for (size_t g = 0; g < G; ++g) scores[g] = group_score(groups[g]);
            std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
                if (scores[a] != scores[b]) return scores[a] > scores[b];
                return a < b;
            });
        }
        lp.hidden.assign(order.begin(), order.begin() + quota);
        std::sort(lp.hidden.begin(), lp.hidden.end());
        plan.layers.push_back(std::move(lp));
    }
    return plan;
}

// Report-style validation: quota, bounds, duplicates.
inline std::vector<std::string> validate_plan(const LeakagePlan& plan,
                                              const nn::WeightStore& weights) {
    std::vector<std::string> violations;
    for (const auto& lp : plan.layers) {
        std::string where = "layer " + std::to_string(lp.layer) + ": ";
        auto it = weights.layers.find(lp.layer);
        if (it == weights.layers.end() || !it->second.has_weight()) {
            violations.push_back(where + "no such weight-bearing layer");
            continue;
        }
        size_t G = group_indices(it->second.weight.shape, lp.scheme).size();
        if (G != lp.group_count)
            violations.push_back(where + "group count " + std::to_string(lp.group_count) +
                                 " does not match layout (" + std::to_string(G) + ")");
        size_t quota = hidden_quota(plan.p, G);
        if (lp.hidden.size() != quota)
            violations.push_back(where + "hidden set size " + std::to_string(lp.hidden.size()) +
                                 " != quota " + std::to_string(quota));
        std::vector<size_t> sorted = lp.hidden;
        std::sort(sorted.begin(), sorted.end());
        for (size_t i = 0; i < sorted.size(); ++i) {
            if (sorted[i] >= G) {
                violations.push_back(where + "hidden index " + std::to_string(sorted[i]) +
                                     " out of range");
                break;
            }
            if (i > 0 && sorted[i] == sorted[i - 1]) {
                violations.push_back(where + "duplicated hidden index " +
                                     std::to_string(sorted[i]));
                break;
            }
        }
    }
    return violations;
}

// ---- human-readable serialization (stable key order) -----------------------

inline std::string serialize_plan(const LeakagePlan& plan) {
    std::ostringstream os;
    os << "poi-leakage-plan v1\n";
    os << "p " << plan.p << "\n";
    os << "strategy " << strategy_name(plan.strategy) << "\n";
    os << "hide_biases " << (plan.hide_biases ? 1 : 0) << "\n";
    os << "seed " << plan.seed << "\n";
    for (const auto& lp : plan.layers) {
        os << "layer " << lp.layer << " scheme " << scheme_name(lp.scheme) << " groups "
           << lp.group_count << " bias_hidden " << (lp.bias_hidden ? 1 : 0) << " hidden ";
        for (size_t i = 0; i < lp.hidden.size(); ++i) {
            if (i) os << ",";
            os << lp.hidden[i];
        }
        os << "\n";
    }
    return os.str();
}

inline LeakagePlan parse_plan(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "poi-leakage-plan v1")
        throw std::invalid_argument("parse_plan: bad header");
    LeakagePlan plan;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "p") ls >> plan.p;
        else if (key == "strategy") {
            std::string s;
            ls >> s;
            plan.strategy = strategy_from_name(s);
        } else if (key == "hide_biases") {
            int v;
            ls >> v;
            plan.hide_biases = v != 0;
        } else if (key == "seed") ls >> plan.seed;
        else if (key == "layer") {
            LayerPlan lp;
            std::string tag, scheme, hidden_list;
            ls >> lp.layer >> tag >> scheme;
            if (tag != "scheme") throw std::invalid_argument("parse_plan: malformed layer line");
            lp.scheme = scheme_from_name(scheme);
            ls >> tag >> lp.group_count;
            if (tag != "groups") throw std::invalid_argument("parse_plan: malformed layer line");
            int bias;
            ls >> tag >> bias;
            if (tag != "bias_hidden") throw std::invalid_argument("parse_plan: malformed layer line");
            lp.bias_hidden = bias != 0;
            ls >> tag;
            if (tag != "hidden") throw std::invalid_argument("parse_plan: malformed layer line");
            if (ls >> hidden_list) {
                std::istringstream hs(hidden_list);
                std::string tok;
                while (std::getline(hs, tok, ',')) lp.hidden.push_back(std::stoul(tok));
            }
            plan.layers.push_back(std::move(lp));
        } else {
            throw std::invalid_argument("parse_plan: unknown key '" + key + "'");
        }
    }
    return plan;
}

// Default schemes for a network's weight-bearing layers.
inline std::map<size_t, GroupScheme> default_schemes(
    const nn::NetworkSpec& net, GroupScheme fc_scheme = GroupScheme::fc_naive_rows,
    GroupScheme conv_scheme = GroupScheme::conv_per_filter) {
    std::map<size_t, GroupScheme> schemes;
    for (size_t i = 0; i < net.layers.size(); ++i) {
        if (std::holds_alternative<nn::ConvSpec>(net.layers[i])) schemes[i] = conv_scheme;
        else if (std::holds_alternative<nn::FcSpec>(net.layers[i])) schemes[i] = fc_scheme;
    }
    return schemes;
}

}  // namespace poi::leak

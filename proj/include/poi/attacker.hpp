// Copyright (c) 2026 the poi authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "poi/leakage.hpp"
#include "poi/nn/dataset.hpp"
#include "poi/nn/forward.hpp"
#include "poi/nn/network.hpp"

namespace poi::attack {

// Honest-but-curious weight estimation policies.  The attacker knows which
// weight groups are hidden, never their values.
struct AttackPolicy {
    enum class Kind { constant, mean, std_normal, fitted_normal };
    Kind kind = Kind::constant;
    double constant = 0.0;

    static AttackPolicy Const(double c) { return {Kind::constant, c}; }
    static AttackPolicy Mean() { return {Kind::mean, 0.0}; }
    static AttackPolicy StdNormal() { return {Kind::std_normal, 0.0}; }
    static AttackPolicy FittedNormal() { return {Kind::fitted_normal, 0.0}; }

    std::string name() const {
        switch (kind) {
            case Kind::constant: return "const";
            case Kind::mean: return "mean";
            case Kind::std_normal: return "std_normal";
            case Kind::fitted_normal: return "fitted_normal";
        }
        return "?";
    }

    static AttackPolicy from_name(const std::string& n) {
        if (n == "const" || n == "const0" || n == "constant") return Const(0.0);
        if (n == "mean") return Mean();
        if (n == "std_normal" || n == "normal") return StdNormal();
        if (n == "fitted_normal" || n == "fitted") return FittedNormal();
        throw std::invalid_argument("unknown attack policy '" + n + "'");
    }
};

namespace detail {

inline double gaussian(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(std::nextafter(0.0, 1.0), 1.0);
    double r = std::sqrt(-2.0 * std::log(u(rng)));
    double t = 2.0 * M_PI * u(rng);
    return r * std::cos(t);
}

}  // namespace detail

// Rebuilds the weights an attacker can assemble from a leakage plan:
// revealed entries are copied exactly, hidden entries filled per policy.
// Mean / fitted-normal statistics come from the revealed entries of the
// same layer only; a layer with no revealed entries falls back to the
// constant policy (with fewer than two known values the fitted-normal
// deviation is undefined, so that also falls back).
inline nn::WeightStore reconstruct(const nn::WeightStore& weights, const leak::LeakagePlan& plan,
                                   const AttackPolicy& policy, uint64_t seed) {
    nn::WeightStore out = weights;  // revealed entries: exact copies
    std::mt19937_64 rng(seed);

    for (const auto& lp : plan.layers) {
        const nn::LayerWeights& src = weights.at(lp.layer);
        nn::LayerWeights& dst = out.layers.at(lp.layer);
        auto groups = leak::group_indices(src.weight.shape, lp.scheme);
        if (lp.group_count != groups.size())
            throw std::invalid_argument("reconstruct: plan does not match layer " +
                                        std::to_string(lp.layer));

        std::vector<bool> hidden_group(groups.size(), false);
        for (size_t g : lp.hidden) {
            if (g >= groups.size())
                throw std::invalid_argument("reconstruct: hidden index out of range");
            hidden_group[g] = true;
        }

        // statistics over the revealed entries of this layer
        double sum = 0, sq = 0;
        size_t known = 0;
        for (size_t g = 0; g < groups.size(); ++g) {
            if (hidden_group[g]) continue;
            for (size_t i : groups[g]) {
                sum += src.weight.data[i];
                sq += static_cast<double>(src.weight.data[i]) * src.weight.data[i];
                ++known;
            }
        }
        if (!lp.bias_hidden) {
            for (float v : src.bias.data) {
                sum += v;
                sq += static_cast<double>(v) * v;
                ++known;
            }
        }
        double mu = known > 0 ? sum / static_cast<double>(known) : 0.0;
        double sigma = 0.0;
        bool have_sigma = known >= 2;
        if (have_sigma) {
            double var = (sq - static_cast<double>(known) * mu * mu) /
                         static_cast<double>(known - 1);
            sigma = var > 0 ? std::sqrt(var) : 0.0;
        }

        auto fill = [&](float& slot) {
            switch (policy.kind) {
                case AttackPolicy::Kind::constant:
                    slot = static_cast<float>(policy.constant);
                    break;
                case AttackPolicy::Kind::mean:
                    slot = known > 0 ? static_cast<float>(mu)
                                     : static_cast<float>(policy.constant);
                    break;
                case AttackPolicy::Kind::std_normal:
                    slot = static_cast<float>(detail::gaussian(rng));
                    break;
                case AttackPolicy::Kind::fitted_normal:
                    slot = (known > 0 && have_sigma)
                               ? static_cast<float>(mu + sigma * detail::gaussian(rng))
                               : static_cast<float>(policy.constant);
                    break;
            }
        };

        for (size_t g = 0; g < groups.size(); ++g) {
            if (!hidden_group[g]) continue;
            for (size_t i : groups[g]) fill(dst.weight.data[i]);
        }
        if (lp.bias_hidden)
            for (float& v : dst.bias.data) fill(v);
    }
    return out;
}

// One experiment cell: attacker advantage statistics for a fixed
// (p, strategy, policy) combination over repeated runs.
struct AdvantageReport {
    double p = 0.0;
    leak::SelectionStrategy strategy = leak::SelectionStrategy::random;
    std::string policy;
    bool biases_hidden = true;
    size_t runs = 0;

    double acc_full = 0.0;      // accuracy of the original model
    double acc_baseline = 0.0;  // mean accuracy of the all-hidden model
    std::vector<double> acc_attacked;       // per run
    std::vector<double> acc_baseline_runs;  // per run
    std::vector<double> adv_runs;           // per run
    double adv_mean = 0.0;
    double adv_std = 0.0;
};

inline uint64_t run_seed(uint64_t base, size_t run) {
    uint64_t x = base + 0x9e3779b97f4a7c15ull * (run + 1);
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ull;
    x ^= x >> 27;
    return x;
}

// Runs the encode/decode simulation: per run, draw a plan, reconstruct,
// and measure accuracy; the baseline reconstructs the all-hidden (p=1)
// model under the same policy and seed sequence.
inline AdvantageReport attacker_advantage(const nn::NetworkSpec& net,
                                          const nn::WeightStore& weights,
                                          const std::map<size_t, leak::GroupScheme>& schemes,
                                          double p, leak::SelectionStrategy strategy,
                                          const AttackPolicy& policy, bool hide_biases,
                                          const nn::Dataset& testset, size_t runs,
                                          uint64_t base_seed) {
    if (testset.size() == 0) throw std::invalid_argument("attacker_advantage: empty test set");
    if (runs < 1) throw std::invalid_argument("attacker_advantage: runs must be >= 1");

    AdvantageReport rep;
    rep.p = p;
    rep.strategy = strategy;
    rep.policy = policy.name();
    rep.biases_hidden = hide_biases;
    rep.runs = runs;
    rep.acc_full = nn::evaluate_accuracy(net, weights, testset);

    for (size_t r = 0; r < runs; ++r) {
        uint64_t seed = run_seed(base_seed, r);
        leak::LeakagePlan plan = leak::plan_leakage(weights, schemes, p, strategy, hide_biases, seed);
        nn::WeightStore attacked = reconstruct(weights, plan, policy, seed);
        double acc = nn::evaluate_accuracy(net, attacked, testset);

        leak::LeakagePlan all_hidden =
            leak::plan_leakage(weights, schemes, 1.0, strategy, true, seed);
        nn::WeightStore base = reconstruct(weights, all_hidden, policy, seed);
        double acc_base = nn::evaluate_accuracy(net, base, testset);

        rep.acc_attacked.push_back(acc);
        rep.acc_baseline_runs.push_back(acc_base);
        rep.adv_runs.push_back(acc - acc_base);
    }

    double mean = 0, base_mean = 0;
    for (size_t r = 0; r < runs; ++r) {
        mean += rep.adv_runs[r];
        base_mean += rep.acc_baseline_runs[r];
    }
    mean /= static_cast<double>(runs);
    base_mean /= static_cast<double>(runs);
    double var = 0;
    for (double a : rep.adv_runs) var += (a - mean) * (a - mean);
    rep.adv_mean = mean;
    rep.adv_std = runs > 1 ? std::sqrt(var / static_cast<double>(runs - 1)) : 0.0;
    rep.acc_baseline = base_mean;
    return rep;
}

// Closed bound: the leak is acceptable when the advantage does not exceed lambda.
inline bool is_lambda_secure(const AdvantageReport& rep, double lambda) {
    return rep.adv_mean <= lambda;
}

// Per-p maximum of the per-run advantage across reports (e.g. across
// policies), for worst-case plots.
inline std::vector<std::pair<double, double>> worst_case_advantage(
    const std::vector<std::vector<AdvantageReport>>& reports_by_policy) {
    if (reports_by_policy.empty()) return {};
    const auto& first = reports_by_policy.front();
    std::vector<std::pair<double, double>> out;
    for (const auto& cell : first) out.emplace_back(cell.p, -1.0);
    for (const auto& series : reports_by_policy) {
        if (series.size() != out.size())
            throw std::invalid_argument("worst_case_advantage: mismatched p grids");
        for (size_t i = 0; i < series.size(); ++i) {
            if (series[i].p != out[i].first)
                throw std::invalid_argument("worst_case_advantage: mismatched p grids");
            for (double a : series[i].adv_runs) out[i].second = std::max(out[i].second, a);
        }
    }
    return out;
}

}  // namespace poi::attack

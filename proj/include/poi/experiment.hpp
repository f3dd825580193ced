// Copyright (c) 2026 the poi authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0
//
// Experiment configuration (strict JSON schema, fail-fast on unknown keys)
// and the end-to-end grid runners shared by the CLI and the test suites.

#pragma once

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

#include "poi/attacker.hpp"
#include "poi/costbench.hpp"
#include "poi/he/cost_backend.hpp"
#include "poi/leakage.hpp"
#include "poi/nn/batchnorm_fold.hpp"
#include "poi/nn/dataset.hpp"
#include "poi/nn/train.hpp"
#include "poi/nn/weights_io.hpp"
#include "poi/packing.hpp"
#include "poi/reportio.hpp"

namespace poi::exp {

using json = nlohmann::json;

struct CostLayerConfig {
    std::string type;  // "fc" | "conv"
    size_t M = 0, N = 0;                       // fc dims
    std::string kind = "naive";                // fc packing kind
    size_t kernel = 3, in_ch = 0, out_ch = 0;  // conv dims
    size_t height = 0, width = 0;
    std::string granularity = "per_filter";
};

struct ExperimentConfig {
    // dataset
    std::string dataset_kind = "idx";  // "idx" | "cifar"
    std::string train_images, train_labels, test_images, test_labels;
    std::vector<std::string> train_bins, test_bins;
    std::string dataset_name = "dataset";
    size_t subset_train = 0, subset_test = 0;  // 0 = use everything

    // model / training
    std::string architecture = "mnist-cnn";  // "mnist-cnn" | "cifar-cnn" | "custom"
    std::string architecture_file;           // network JSON when architecture == "custom"
    nn::TrainConfig train;

    // leakage / attack grid
    std::vector<double> p_grid = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    std::vector<std::string> strategies = {"random"};
    std::vector<std::string> policies = {"const"};
    bool hide_biases = true;
    size_t runs = 10;
    bool retrain_per_experiment = false;

    // HE evaluation
    std::string backend = "exact";             // "exact" | "cost-model"
    std::string ckks_preset = "accuracy-8192"; // "4096" | "8192" | "16384" | "accuracy-8192"
    std::string fc_packing = "naive";
    std::string conv_granularity = "per_filter";
    std::string mode = "relin-only";  // "relin-only" | "rescale-all"

    // costbench
    size_t bench_repetitions = 50;
    std::string cost_table = "paper-default";  // or path to a bench CSV
    std::vector<CostLayerConfig> cost_layers;

    uint64_t seed = 42;

    std::string canonical;  // canonical JSON (sorted keys)
    std::string hash;       // over canonical + seed

    void refresh_hash() { hash = report::hash_hex(report::fnv1a64(canonical + ":" + std::to_string(seed))); }
};

namespace detail {

inline void check_keys(const json& j, const std::vector<std::string>& allowed,
                       const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const auto& k : allowed)
            if (it.key() == k) { ok = true; break; }
        if (!ok)
            throw std::invalid_argument("config: unknown key '" + it.key() + "' in " + where);
    }
}

}  // namespace detail

inline ExperimentConfig parse_config(const json& j) {
    ExperimentConfig cfg;
    detail::check_keys(j, {"dataset", "architecture", "architecture_file", "train", "p_grid",
                           "strategies", "policies", "hide_biases", "runs",
                           "retrain_per_experiment", "backend", "ckks_preset", "fc_packing",
                           "conv_granularity", "mode", "bench", "cost_layers", "cost_table",
                           "seed"},
                       "top level");

    if (j.contains("dataset")) {
        const json& d = j.at("dataset");
        detail::check_keys(d, {"kind", "name", "train_images", "train_labels", "test_images",
                               "test_labels", "train_bins", "test_bins", "subset_train",
                               "subset_test"},
                           "dataset");
        cfg.dataset_kind = d.value("kind", cfg.dataset_kind);
        cfg.dataset_name = d.value("name", cfg.dataset_name);
        cfg.train_images = d.value("train_images", "");
        cfg.train_labels = d.value("train_labels", "");
        cfg.test_images = d.value("test_images", "");
        cfg.test_labels = d.value("test_labels", "");
        cfg.train_bins = d.value("train_bins", std::vector<std::string>{});
        cfg.test_bins = d.value("test_bins", std::vector<std::string>{});
        cfg.subset_train = d.value("subset_train", size_t{0});
        cfg.subset_test = d.value("subset_test", size_t{0});
        if (cfg.dataset_kind != "idx" && cfg.dataset_kind != "cifar")
            throw std::invalid_argument("config: dataset.kind must be 'idx' or 'cifar'");
    }
    cfg.architecture = j.value("architecture", cfg.architecture);
    cfg.architecture_file = j.value("architecture_file", "");
    if (cfg.architecture != "mnist-cnn" && cfg.architecture != "cifar-cnn" &&
        cfg.architecture != "custom")
        throw std::invalid_argument("config: unknown architecture '" + cfg.architecture + "'");
    if (cfg.architecture == "custom" && cfg.architecture_file.empty())
        throw std::invalid_argument("config: architecture 'custom' needs architecture_file");

    if (j.contains("train")) {
        const json& t = j.at("train");
        detail::check_keys(t, {"learning_rate", "epochs", "batch_size", "validation_fraction",
                               "early_stop_patience"},
                           "train");
        cfg.train.learning_rate = t.value("learning_rate", cfg.train.learning_rate);
        cfg.train.epochs = t.value("epochs", cfg.train.epochs);
        cfg.train.batch_size = t.value("batch_size", cfg.train.batch_size);
        cfg.train.validation_fraction =
            t.value("validation_fraction", cfg.train.validation_fraction);
        cfg.train.early_stop_patience =
            t.value("early_stop_patience", cfg.train.early_stop_patience);
    }

    cfg.p_grid = j.value("p_grid", cfg.p_grid);
    for (double p : cfg.p_grid)
        if (p < 0.0 || p > 1.0) throw std::invalid_argument("config: p_grid values must be in [0,1]");
    cfg.strategies = j.value("strategies", cfg.strategies);
    cfg.policies = j.value("policies", cfg.policies);
    cfg.hide_biases = j.value("hide_biases", cfg.hide_biases);
    cfg.runs = j.value("runs", cfg.runs);
    if (cfg.runs < 1) throw std::invalid_argument("config: runs must be >= 1");
    cfg.retrain_per_experiment = j.value("retrain_per_experiment", cfg.retrain_per_experiment);
    cfg.backend = j.value("backend", cfg.backend);
    if (cfg.backend != "exact" && cfg.backend != "cost-model")
        throw std::invalid_argument("config: backend must be 'exact' or 'cost-model'");
    cfg.ckks_preset = j.value("ckks_preset", cfg.ckks_preset);
    cfg.fc_packing = j.value("fc_packing", cfg.fc_packing);
    cfg.conv_granularity = j.value("conv_granularity", cfg.conv_granularity);
    cfg.mode = j.value("mode", cfg.mode);
    if (cfg.mode != "relin-only" && cfg.mode != "rescale-all")
        throw std::invalid_argument("config: mode must be 'relin-only' or 'rescale-all'");

    if (j.contains("bench")) {
        const json& b = j.at("bench");
        detail::check_keys(b, {"repetitions"}, "bench");
        cfg.bench_repetitions = b.value("repetitions", cfg.bench_repetitions);
    }
    cfg.cost_table = j.value("cost_table", cfg.cost_table);
    if (j.contains("cost_layers")) {
        for (const json& cl : j.at("cost_layers")) {
            detail::check_keys(cl, {"type", "M", "N", "kind", "kernel", "in_channels",
                                    "out_channels", "height", "width", "granularity"},
                               "cost_layers");
            CostLayerConfig c;
            c.type = cl.at("type");
            if (c.type == "fc") {
                c.M = cl.at("M");
                c.N = cl.at("N");
                c.kind = cl.value("kind", c.kind);
            } else if (c.type == "conv") {
                c.kernel = cl.value("kernel", c.kernel);
                c.in_ch = cl.at("in_channels");
                c.out_ch = cl.at("out_channels");
                c.height = cl.at("height");
                c.width = cl.at("width");
                c.granularity = cl.value("granularity", c.granularity);
            } else {
                throw std::invalid_argument("config: cost layer type must be 'fc' or 'conv'");
            }
            cfg.cost_layers.push_back(std::move(c));
        }
    }
    cfg.seed = j.value("seed", cfg.seed);

    cfg.canonical = j.dump();
    cfg.refresh_hash();
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path,
                                    std::optional<uint64_t> seed_override = std::nullopt) {
    json j;
    try {
        j = json::parse(report::read_file(path));
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(path + ": " + e.what());
    }
    ExperimentConfig cfg = parse_config(j);
    if (seed_override) {
        cfg.seed = *seed_override;
        cfg.refresh_hash();
    }
    return cfg;
}

// ---- dataset / model plumbing --------------------------------------------------

// Network description file: {"input_shape": [...], "layers": [{"kind": ...}, ...]}.
inline nn::NetworkSpec parse_network_json(const json& j) {
    detail::check_keys(j, {"input_shape", "layers"}, "network");
    nn::NetworkSpec net;
    net.input_shape = j.at("input_shape").get<std::vector<size_t>>();
    for (const json& l : j.at("layers")) {
        detail::check_keys(l, {"kind", "kernel", "in_channels", "out_channels", "inputs",
                               "outputs", "channels", "rate"},
                           "network layer");
        std::string kind = l.at("kind");
        if (kind == "conv")
            net.layers.push_back(nn::ConvSpec{l.value("kernel", size_t{3}), l.at("in_channels"),
                                              l.at("out_channels")});
        else if (kind == "fc")
            net.layers.push_back(nn::FcSpec{l.at("inputs"), l.at("outputs")});
        else if (kind == "relu")
            net.layers.push_back(nn::ReluSpec{});
        else if (kind == "maxpool")
            net.layers.push_back(nn::MaxPoolSpec{});
        else if (kind == "batchnorm")
            net.layers.push_back(nn::BatchNormSpec{l.at("channels")});
        else if (kind == "dropout")
            net.layers.push_back(nn::DropoutSpec{l.at("rate")});
        else if (kind == "softmax")
            net.layers.push_back(nn::SoftmaxSpec{});
        else
            throw std::invalid_argument("network: unknown layer kind '" + kind + "'");
    }
    net.validate(false);
    return net;
}

inline nn::NetworkSpec architecture(const ExperimentConfig& cfg) {
    if (cfg.architecture == "mnist-cnn") return nn::NetworkSpec::mnist_cnn();
    if (cfg.architecture == "cifar-cnn") return nn::NetworkSpec::cifar_cnn();
    json j;
    try {
        j = json::parse(report::read_file(cfg.architecture_file));
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(cfg.architecture_file + ": " + e.what());
    }
    return parse_network_json(j);
}

inline nn::Dataset load_split(const ExperimentConfig& cfg, bool train_split) {
    nn::Dataset d;
    if (cfg.dataset_kind == "idx") {
        const std::string& imgs = train_split ? cfg.train_images : cfg.test_images;
        const std::string& labels = train_split ? cfg.train_labels : cfg.test_labels;
        if (imgs.empty() || labels.empty())
            throw std::invalid_argument("config: dataset paths missing for the requested split");
        d = nn::load_dataset_idx(imgs, labels, train_split ? "train" : "test");
    } else {
        const auto& bins = train_split ? cfg.train_bins : cfg.test_bins;
        if (bins.empty())
            throw std::invalid_argument("config: dataset bins missing for the requested split");
        d = nn::load_dataset_cifar(bins, train_split ? "train" : "test");
    }
    size_t want = train_split ? cfg.subset_train : cfg.subset_test;
    if (want > 0 && want < d.size()) d = nn::take_subset(d, want, cfg.seed + (train_split ? 1 : 2));
    return d;
}

inline he::CkksParams ckks_params(const ExperimentConfig& cfg) {
    if (cfg.ckks_preset == "4096") return he::CkksParams::preset_4096();
    if (cfg.ckks_preset == "8192") return he::CkksParams::preset_8192();
    if (cfg.ckks_preset == "16384") return he::CkksParams::preset_16384();
    if (cfg.ckks_preset == "accuracy-8192") return he::CkksParams::accuracy_8192();
    throw std::invalid_argument("config: unknown ckks_preset '" + cfg.ckks_preset + "'");
}

inline he::CostTable default_cost_table(const ExperimentConfig& cfg) {
    if (cfg.ckks_preset == "8192" || cfg.ckks_preset == "accuracy-8192")
        return he::CostTable::paper_default_8192();
    if (cfg.ckks_preset == "16384") return he::CostTable::paper_default_16384();
    return he::CostTable::paper_default_4096();
}

// Parses one row layout of a bench CSV produced by cost_table_csv.
inline he::CostTable cost_table_from_csv(const std::string& text) {
    he::CostTable t;
    std::istringstream in(report::csv_body(text));
    std::string line;
    std::getline(in, line);  // column header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string op, cost, prov;
        std::getline(ls, op, ',');
        std::getline(ls, cost, ',');
        std::getline(ls, prov);
        double v = std::stod(cost);
        if (op == "plain_mult") t.plain_mult = v;
        else if (op == "ciph_mult") t.ciph_mult = v;
        else if (op == "rescale") t.rescale = v;
        else if (op == "relinearization") t.relinearization = v;
        t.provenance = prov;
    }
    t.validate();
    return t;
}

// The linear layers the leakage planner sees: batch norm folded away.
inline std::pair<nn::NetworkSpec, nn::WeightStore> folded_model(const ExperimentConfig& cfg,
                                                                const nn::WeightStore& weights) {
    return nn::fold_batchnorm(architecture(cfg), weights);
}

// ---- attack grid ----------------------------------------------------------------

struct AttackGrid {
    std::vector<attack::AdvantageReport> cells;
};

inline AttackGrid run_attack_grid(const ExperimentConfig& cfg, const nn::NetworkSpec& net,
                                  const nn::WeightStore& weights, const nn::Dataset& testset,
                                  const nn::Dataset* trainset = nullptr) {
    AttackGrid grid;
    auto schemes = leak::default_schemes(
        net, leak::scheme_from_name("fc_" + (cfg.fc_packing == "diagonal"
                                                 ? std::string("diagonal")
                                                 : cfg.fc_packing == "hybrid"
                                                       ? std::string("hybrid_rows")
                                                       : std::string("naive_rows"))),
        cfg.conv_granularity == "per_kernel" ? leak::GroupScheme::conv_per_kernel
                                             : leak::GroupScheme::conv_per_filter);
    size_t cell_index = 0;
    for (const auto& strategy_name : cfg.strategies) {
        auto strategy = leak::strategy_from_name(strategy_name);
        for (const auto& policy_name : cfg.policies) {
            auto policy = attack::AttackPolicy::from_name(policy_name);
            for (double p : cfg.p_grid) {
                const nn::NetworkSpec* cell_net = &net;
                const nn::WeightStore* cell_weights = &weights;
                nn::NetworkSpec retrained_net;
                nn::WeightStore retrained_ws;
                if (cfg.retrain_per_experiment) {
                    if (!trainset)
                        throw std::invalid_argument(
                            "retrain_per_experiment requires the training split");
                    nn::TrainConfig tc = cfg.train;
                    tc.seed = attack::run_seed(cfg.seed, 1000 + cell_index);
                    nn::WeightStore raw = nn::train(architecture(cfg), *trainset, tc);
                    auto folded = nn::fold_batchnorm(architecture(cfg), raw);
                    retrained_net = std::move(folded.first);
                    retrained_ws = std::move(folded.second);
                    cell_net = &retrained_net;
                    cell_weights = &retrained_ws;
                }
                grid.cells.push_back(attack::attacker_advantage(
                    *cell_net, *cell_weights, schemes, p, strategy, policy, cfg.hide_biases,
                    testset, cfg.runs, cfg.seed + 7919 * cell_index));
                ++cell_index;
            }
        }
    }
    return grid;
}

// ---- cost grid ------------------------------------------------------------------

inline std::vector<bench::OverheadReport> run_cost_grid(const ExperimentConfig& cfg,
                                                        const he::CostTable& table) {
    pack::EvalMode mode =
        cfg.mode == "relin-only" ? pack::EvalMode::relin_only : pack::EvalMode::rescale_all;
    std::vector<bench::OverheadReport> reports;
    for (const auto& cl : cfg.cost_layers) {
        if (cl.type == "fc") {
            reports.push_back(bench::overhead_factor_fc(cl.M, cl.N, pack::fc_kind_from_name(cl.kind),
                                                        cfg.p_grid, table, mode));
        } else {
            pack::ConvDims dims{cl.kernel, cl.in_ch, cl.out_ch, cl.height, cl.width};
            auto gran = cl.granularity == "per_kernel" ? leak::GroupScheme::conv_per_kernel
                                                       : leak::GroupScheme::conv_per_filter;
            reports.push_back(bench::overhead_factor_conv(dims, gran, cfg.p_grid, table, mode));
        }
    }
    return reports;
}

}  // namespace poi::exp

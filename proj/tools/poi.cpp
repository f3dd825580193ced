// Copyright (c) 2026 the poi authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0
//
// poi: partially oblivious inference experiments.
//   train   train a network and write its weights
//   plan    write leakage plans for the configured grid
//   attack  run the model-stealing grid and write advantage CSVs
//   bench   calibrate HE operation costs on this host
//   cost    produce overhead-factor grids from a cost table
//   report  verify and render CSV outputs as text tables

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "poi/experiment.hpp"
#include "poi/he/backend.hpp"

namespace fs = std::filesystem;
using namespace poi;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir = ".";
    std::optional<uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool need_out = true) {
    cmd->add_option("--config", args.config_path, "experiment config (JSON)")->required();
    cmd->add_option("--seed", args.seed, "override the config seed");
    if (need_out) cmd->add_option("--out", args.out_dir, "output directory");
}

exp::ExperimentConfig load(const CommonArgs& args) {
    return exp::load_config(args.config_path, args.seed);
}

std::string out_path(const CommonArgs& args, const std::string& name) {
    fs::create_directories(args.out_dir);
    return (fs::path(args.out_dir) / name).string();
}

int cmd_train(const CommonArgs& args) {
    exp::ExperimentConfig cfg = load(args);
    nn::NetworkSpec net = exp::architecture(cfg);
    nn::Dataset train = exp::load_split(cfg, true);
    nn::TrainConfig tc = cfg.train;
    tc.seed = cfg.seed;
    nn::TrainResult result = nn::train_with_history(net, train, tc);
    std::string weights_path = out_path(args, "weights.pow1");
    nn::save_weights(weights_path, result.weights);
    std::cout << "trained " << cfg.architecture << " on " << train.size() << " samples for "
              << result.epochs_run << " epochs (final loss " << result.train_loss.back() << ")\n";
    if (!cfg.test_images.empty() || !cfg.test_bins.empty()) {
        nn::Dataset test = exp::load_split(cfg, false);
        std::cout << "test accuracy: " << nn::evaluate_accuracy(net, result.weights, test) << "\n";
    }
    std::cout << "weights written to " << weights_path << "\n";
    return 0;
}

int cmd_plan(const CommonArgs& args, const std::string& weights_path) {
    exp::ExperimentConfig cfg = load(args);
    nn::WeightStore raw = nn::load_weights(weights_path);
    auto [net, weights] = exp::folded_model(cfg, raw);
    auto schemes = leak::default_schemes(net);
    for (const auto& strategy_name : cfg.strategies) {
        auto strategy = leak::strategy_from_name(strategy_name);
        for (double p : cfg.p_grid) {
            auto plan = leak::plan_leakage(weights, schemes, p, strategy, cfg.hide_biases, cfg.seed);
            auto violations = leak::validate_plan(plan, weights);
            if (!violations.empty())
                throw std::runtime_error("generated plan failed validation: " + violations[0]);
            std::ostringstream name;
            name << "plan_" << strategy_name << "_p" << p << ".txt";
            report::write_file(out_path(args, name.str()), leak::serialize_plan(plan));
        }
    }
    std::cout << "wrote " << cfg.strategies.size() * cfg.p_grid.size() << " plan files to "
              << args.out_dir << "\n";
    return 0;
}

int cmd_attack(const CommonArgs& args, const std::string& weights_path) {
    exp::ExperimentConfig cfg = load(args);
    nn::WeightStore raw = nn::load_weights(weights_path);
    auto [net, weights] = exp::folded_model(cfg, raw);
    nn::Dataset test = exp::load_split(cfg, false);
    std::optional<nn::Dataset> train;
    if (cfg.retrain_per_experiment) train = exp::load_split(cfg, true);

    exp::AttackGrid grid =
        exp::run_attack_grid(cfg, net, weights, test, train ? &*train : nullptr);
    std::string header = report::csv_header("attack", cfg.hash, cfg.seed);
    report::write_file(out_path(args, "attack_runs.csv"),
                       header + report::attack_runs_csv(cfg.dataset_name, grid.cells));
    report::write_file(out_path(args, "attack_aggregate.csv"),
                       header + report::attack_aggregate_csv(cfg.dataset_name, grid.cells));
    std::cout << report::render_advantage_table(grid.cells);
    std::cout << "wrote attack_runs.csv and attack_aggregate.csv to " << args.out_dir << "\n";
    return 0;
}

int cmd_bench(const CommonArgs& args) {
    exp::ExperimentConfig cfg = load(args);
    he::ExactBackend backend(exp::ckks_params(cfg), cfg.seed);
    he::CostTable table = bench::calibrate(backend, cfg.bench_repetitions);
    std::string header = report::csv_header("bench", cfg.hash, cfg.seed);
    report::write_file(out_path(args, "cost_table.csv"), header + bench::cost_table_csv(table));
    std::cout << "measured units (plain=1): ciph=" << table.ciph_mult
              << " rescale=" << table.rescale << " relin=" << table.relinearization << "\n";
    std::cout << "wrote cost_table.csv to " << args.out_dir << "\n";
    return 0;
}

int cmd_cost(const CommonArgs& args) {
    exp::ExperimentConfig cfg = load(args);
    if (cfg.cost_layers.empty())
        throw std::invalid_argument("config: cost_layers must name at least one layer");
    he::CostTable table = cfg.cost_table == "paper-default"
                              ? exp::default_cost_table(cfg)
                              : exp::cost_table_from_csv(report::read_file(cfg.cost_table));
    auto reports = exp::run_cost_grid(cfg, table);
    std::string header = report::csv_header("cost", cfg.hash, cfg.seed);
    for (size_t i = 0; i < reports.size(); ++i) {
        std::ostringstream name;
        name << "overhead_" << i << ".csv";
        report::write_file(out_path(args, name.str()), header + bench::overhead_csv(reports[i]));
        std::cout << report::render_overhead_table(reports[i]);
    }
    std::cout << "wrote " << reports.size() << " overhead CSVs to " << args.out_dir << "\n";
    return 0;
}

int cmd_report(const CommonArgs& args, const std::vector<std::string>& csvs) {
    exp::ExperimentConfig cfg = load(args);
    for (const auto& path : csvs) {
        std::string text = report::read_file(path);
        std::string embedded = report::header_field(text, "config_hash");
        if (embedded.empty())
            throw std::runtime_error(path + ": missing config_hash header");
        if (embedded != cfg.hash)
            throw std::runtime_error(path + ": config hash mismatch (config was modified since "
                                            "this CSV was produced)");
        std::string body = report::csv_body(text);
        std::istringstream in(body);
        std::string columns;
        std::getline(in, columns);
        if (columns.rfind("dataset,p,strategy,policy,biases_hidden,runs", 0) == 0) {
            std::cout << report::render_advantage_table(report::parse_aggregate_csv(body));
        } else if (columns.rfind("layer,mode,p", 0) == 0) {
            for (const auto& rep : report::parse_overhead_csv(body))
                std::cout << report::render_overhead_table(rep);
        } else if (columns.rfind("operation,unit_cost", 0) == 0) {
            std::cout << text;
        } else {
            throw std::runtime_error(path + ": unrecognized CSV schema");
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"partially oblivious inference experiments"};
    app.require_subcommand(1);

    CommonArgs targs, pargs, aargs, bargs, cargs, rargs;
    std::string weights_path = "weights.pow1";
    std::string attack_weights = "weights.pow1";
    std::vector<std::string> report_csvs;

    CLI::App* train = app.add_subcommand("train", "train a network and save weights");
    add_common(train, targs);

    CLI::App* plan = app.add_subcommand("plan", "write leakage plans");
    add_common(plan, pargs);
    plan->add_option("--weights", weights_path, "weight file (POW1)");

    CLI::App* attack = app.add_subcommand("attack", "run the model-stealing grid");
    add_common(attack, aargs);
    attack->add_option("--weights", attack_weights, "weight file (POW1)");

    CLI::App* bench_cmd = app.add_subcommand("bench", "calibrate HE operation costs");
    add_common(bench_cmd, bargs);

    CLI::App* cost = app.add_subcommand("cost", "produce overhead-factor grids");
    add_common(cost, cargs);

    CLI::App* rep = app.add_subcommand("report", "verify and render CSVs");
    add_common(rep, rargs, false);
    rep->add_option("csvs", report_csvs, "CSV files to render")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (train->parsed()) return cmd_train(targs);
        if (plan->parsed()) return cmd_plan(pargs, weights_path);
        if (attack->parsed()) return cmd_attack(aargs, attack_weights);
        if (bench_cmd->parsed()) return cmd_bench(bargs);
        if (cost->parsed()) return cmd_cost(cargs);
        if (rep->parsed()) return cmd_report(rargs, report_csvs);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

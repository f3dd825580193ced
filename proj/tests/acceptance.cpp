// Copyright (c) 2026 the poi authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite: runs every gate criterion end to end and prints one
// PASS/FAIL line per criterion.  Exit code is the number of failures.
//
//  C1  op-count equivalence between evaluation and prediction (exact)
//  C2  HE evaluation matches the plaintext layers within 1e-2
//  C3  noise behavior: addition bound, monotone budget, depth guard
//  C4  overhead factors on this host fall in the published bands
//  C5  cost-model default: ciphertext mult + relin in plain-mult units
//  C6  desk-scale security pipeline (train, attack grid trends)
//  C7  zero-network baseline is exactly the class prior
//  C8  bilinear example ledgers
//  C9  selection-strategy properties
//  C10 full-scale import path (optional; skipped without external files)

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "poi/attacker.hpp"
#include "poi/costbench.hpp"
#include "poi/experiment.hpp"
#include "poi/he/backend.hpp"
#include "poi/he/cost_backend.hpp"
#include "poi/leakage.hpp"
#include "poi/nn/batchnorm_fold.hpp"
#include "poi/nn/train.hpp"
#include "poi/nn/weights_io.hpp"
#include "poi/packing.hpp"
#include "support/oracles.hpp"

using namespace poi;
namespace fs = std::filesystem;

namespace {

struct Criterion {
    std::string name;
    std::function<std::string()> run;  // returns "" on pass, detail on failure
};

std::vector<double> grid11() {
    return {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
}

leak::LayerPlan make_plan(leak::GroupScheme scheme, size_t groups, double p, uint64_t seed) {
    leak::LayerPlan lp;
    lp.scheme = scheme;
    lp.group_count = groups;
    lp.bias_hidden = true;
    std::vector<size_t> order(groups);
    for (size_t i = 0; i < groups; ++i) order[i] = i;
    std::mt19937_64 rng(seed);
    size_t quota = leak::hidden_quota(p, groups);
    for (size_t i = 0; i < quota; ++i) {
        std::uniform_int_distribution<size_t> d(i, groups - 1);
        std::swap(order[i], order[d(rng)]);
    }
    lp.hidden.assign(order.begin(), order.begin() + quota);
    std::sort(lp.hidden.begin(), lp.hidden.end());
    return lp;
}

he::ExactBackend& wide_backend() {
    static he::ExactBackend be(he::CkksParams::accuracy_8192(), 20260809);
    return be;
}

// ---------------------------------------------------------------- criterion 1

std::string check_fc_counts(he::ExactBackend& be, size_t M, size_t N, pack::FcPackingKind kind,
                            const nn::Tensor& w, const nn::Tensor& b) {
    auto input = pack::pack_fc_input(be, std::vector<double>(M, 0.01), kind);
    for (double p : grid11()) {
        size_t groups = pack::layout_polynomial_count(M, N, kind);
        auto plan = make_plan(pack::fc_kind_scheme(kind), groups, p,
                              static_cast<uint64_t>(p * 1000) + 17);
        auto packed = pack::pack_fc(be, w, b, kind, plan, pack::EvalMode::relin_only);
        auto result = pack::eval_fc_he(be, packed, input);
        auto predicted = pack::predicted_fc_ops(M, N, kind, p, pack::EvalMode::relin_only, true);
        size_t quota = leak::hidden_quota(p, groups);
        if (!result.ops.counters_equal(predicted) || result.ops.ciph_mults != quota ||
            result.ops.plain_mults != groups - quota || result.ops.relins != result.ops.ciph_mults) {
            std::ostringstream os;
            os << pack::fc_kind_name(kind) << " FC(" << M << "," << N << ") p=" << p
               << ": measured {" << result.ops.to_string() << "} predicted {"
               << predicted.to_string() << "}";
            return os.str();
        }
    }
    return "";
}

std::string criterion1() {
    he::ExactBackend& be = wide_backend();
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
    auto tensor = [&](std::vector<size_t> shape) {
        nn::Tensor t(std::move(shape));
        for (auto& v : t.data) v = dist(rng);
        return t;
    };

    if (auto err = check_fc_counts(be, 128, 10, pack::FcPackingKind::naive, tensor({128, 10}),
                                   tensor({10}));
        !err.empty())
        return err;
    if (auto err = check_fc_counts(be, 128, 10, pack::FcPackingKind::diagonal, tensor({128, 10}),
                                   tensor({10}));
        !err.empty())
        return err;
    if (auto err = check_fc_counts(be, 2048, 128, pack::FcPackingKind::naive, tensor({2048, 128}),
                                   tensor({128}));
        !err.empty())
        return err;
    if (auto err = check_fc_counts(be, 2048, 128, pack::FcPackingKind::diagonal,
                                   tensor({2048, 128}), tensor({128}));
        !err.empty())
        return err;

    // conv 3x3 over a 32x32x3 input, per-filter groups
    pack::ConvDims dims{3, 3, 10, 32, 32};
    nn::Tensor w = tensor({3, 3, 3, 10});
    nn::Tensor b = tensor({10});
    nn::Tensor img = tensor({3, 32, 32});
    pack::ConvGeometry geom = pack::ConvGeometry::make(dims);
    auto input = pack::pack_conv_input(be, img, geom);
    for (double p : grid11()) {
        auto plan = make_plan(leak::GroupScheme::conv_per_filter, dims.out_channels, p, 29);
        auto packed = pack::pack_conv(be, w, b, leak::GroupScheme::conv_per_filter, plan,
                                      pack::EvalMode::relin_only, 32, 32);
        auto result = pack::eval_conv_he(be, packed, input);
        auto predicted = pack::predicted_conv_ops(dims, leak::GroupScheme::conv_per_filter, p,
                                                  pack::EvalMode::relin_only, true);
        size_t h = leak::hidden_quota(p, dims.out_channels);
        if (!result.ops.counters_equal(predicted) || result.ops.ciph_mults != 9 * h ||
            result.ops.relins != result.ops.ciph_mults) {
            std::ostringstream os;
            os << "conv3x3(32x32x3) p=" << p << ": measured {" << result.ops.to_string()
               << "} predicted {" << predicted.to_string() << "}";
            return os.str();
        }
    }
    return "";
}

// ---------------------------------------------------------------- criterion 2

std::string criterion2() {
    he::ExactBackend& be = wide_backend();
    std::mt19937_64 rng(202);
    std::uniform_real_distribution<double> val(-10.0, 10.0);
    int instance = 0;

    // 20 FC instances across the three packings
    for (int i = 0; i < 20; ++i, ++instance) {
        size_t M = size_t(8) << (i % 3);  // 8, 16, 32
        size_t N = 2 + (i % 5);
        pack::FcPackingKind kind = i % 3 == 0 ? pack::FcPackingKind::naive
                                   : i % 3 == 1 ? pack::FcPackingKind::diagonal
                                                : pack::FcPackingKind::hybrid;
        nn::Tensor w({M, N});
        nn::Tensor b({N});
        for (auto& v : w.data) v = static_cast<float>(val(rng));
        for (auto& v : b.data) v = static_cast<float>(val(rng));
        std::vector<double> x(M);
        for (auto& v : x) v = val(rng);

        size_t groups = pack::layout_polynomial_count(M, N, kind);
        auto plan = make_plan(pack::fc_kind_scheme(kind), groups, (i % 11) / 10.0, 300 + i);
        auto packed = pack::pack_fc(be, w, b, kind, plan, pack::EvalMode::relin_only);
        auto result = pack::eval_fc_he(be, packed, pack::pack_fc_input(be, x, kind));
        auto out = pack::decrypt_fc_output(be, packed, result);

        std::vector<std::vector<double>> cols(N, std::vector<double>(M));
        for (size_t j = 0; j < N; ++j)
            for (size_t mi = 0; mi < M; ++mi) cols[j][mi] = w.data[mi * N + j];
        auto expect = testing::oracle_fc(cols, std::vector<double>(b.data.begin(), b.data.end()), x);
        for (size_t j = 0; j < N; ++j)
            if (std::abs(out[j] - expect[j]) > 1e-2) {
                std::ostringstream os;
                os << "fc instance " << instance << " (" << pack::fc_kind_name(kind)
                   << "): |" << out[j] << " - " << expect[j] << "| > 1e-2";
                return os.str();
            }
    }

    // 30 conv instances
    for (int i = 0; i < 30; ++i, ++instance) {
        pack::ConvDims dims{3, 1 + size_t(i % 3), 1 + size_t(i % 4), 4 + size_t(i % 5),
                            4 + size_t((i + 2) % 5)};
        auto gran = i % 2 == 0 ? leak::GroupScheme::conv_per_filter
                               : leak::GroupScheme::conv_per_kernel;
        nn::Tensor w({3, 3, dims.in_channels, dims.out_channels});
        nn::Tensor b({dims.out_channels});
        nn::Tensor img({dims.in_channels, dims.height, dims.width});
        for (auto& v : w.data) v = static_cast<float>(val(rng));
        for (auto& v : b.data) v = static_cast<float>(val(rng));
        for (auto& v : img.data) v = static_cast<float>(val(rng));

        size_t G = gran == leak::GroupScheme::conv_per_filter
                       ? dims.out_channels
                       : dims.out_channels * dims.in_channels;
        auto plan = make_plan(gran, G, (i % 11) / 10.0, 400 + i);
        auto packed =
            pack::pack_conv(be, w, b, gran, plan, pack::EvalMode::relin_only, dims.height, dims.width);
        auto result = pack::eval_conv_he(be, packed, pack::pack_conv_input(be, img, packed.geom));
        auto maps = pack::decrypt_conv_output(be, packed, result);

        std::vector<double> image(img.data.begin(), img.data.end());
        std::vector<double> wd(w.data.begin(), w.data.end());
        auto expect = testing::oracle_conv(image, dims.in_channels, dims.height, dims.width, wd, 3,
                                           dims.out_channels,
                                           std::vector<double>(b.data.begin(), b.data.end()));
        for (size_t f = 0; f < dims.out_channels; ++f)
            for (size_t px = 0; px < dims.height * dims.width; ++px)
                if (std::abs(maps[f].data[px] - expect[f][px]) > 1e-2) {
                    std::ostringstream os;
                    os << "conv instance " << instance << ": |" << maps[f].data[px] << " - "
                       << expect[f][px] << "| > 1e-2";
                    return os.str();
                }
    }
    return "";
}

// ---------------------------------------------------------------- criterion 3

std::string criterion3() {
    he::ExactBackend& be = wide_backend();
    const he::CkksEngine& eng = be.engine();
    std::mt19937_64 rng(303);
    std::uniform_real_distribution<double> val(-5.0, 5.0);
    std::mt19937_64 enc_rng(99);

    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> va(16), vb(16);
        for (auto& v : va) v = val(rng);
        for (auto& v : vb) v = val(rng);
        auto a = eng.encrypt(eng.encode(va, eng.top_level(), eng.default_scale()), enc_rng);
        auto b = eng.encrypt(eng.encode(vb, eng.top_level(), eng.default_scale()), enc_rng);

        long double na = eng.measured_noise(a), nb = eng.measured_noise(b);
        long double ns = eng.measured_noise(eng.add_ct(a, b));
        if (ns > 2.0L * (na + nb))  // one bit of slack over the sum
            return "add_ct noise exceeded the sum bound on trial " + std::to_string(trial);

        double before = eng.noise_budget(a);
        auto prod = eng.rescale(eng.relinearize(eng.mul_ct(a, b)));
        double after = eng.noise_budget(prod);
        if (!(after < before))
            return "budget did not decrease across mul+relin+rescale on trial " +
                   std::to_string(trial);

        if (trial < 5) {  // depth guard: the (depth+1)-th rescale must fail
            auto ones = eng.encode(std::vector<double>(16, 1.0), prod.level, eng.default_scale());
            auto lower = eng.rescale(eng.mul_pt(prod, ones));  // second rescale, level 0
            auto last = eng.mul_pt(lower, eng.encode({1.0}, 0, eng.default_scale()));
            try {
                eng.rescale(last);
                return "third rescale at depth 2 unexpectedly succeeded";
            } catch (const std::runtime_error&) {
            }
        }
    }
    return "";
}

// ---------------------------------------------------------------- criterion 4

std::string criterion4() {
    // measured cost tables on this host, mirroring the published columns
    he::ExactBackend small(he::CkksParams::preset_4096(), 4040);
    he::CostTable fc_table = bench::calibrate(small, 40);
    auto fc = bench::overhead_factor_fc(128, 10, pack::FcPackingKind::naive, grid11(), fc_table,
                                        pack::EvalMode::relin_only);
    double fc_factor = fc.factor_at(1.0);
    if (fc_factor < 10.0 || fc_factor > 40.0) {
        std::ostringstream os;
        os << "naive FC(128,10) factor at p=1.0 is " << fc_factor << ", outside [10,40]"
           << " (measured units: ciph=" << fc_table.ciph_mult
           << " relin=" << fc_table.relinearization << ")";
        return os.str();
    }
    for (size_t i = 1; i < fc.points.size(); ++i)
        if (!(fc.points[i].factor > fc.points[i - 1].factor))
            return "FC overhead factor is not strictly increasing in p";

    he::ExactBackend large(he::CkksParams::preset_16384(), 4041);
    he::CostTable conv_table = bench::calibrate(large, 30);
    pack::ConvDims dims{3, 3, 10, 32, 32};
    auto conv = bench::overhead_factor_conv(dims, leak::GroupScheme::conv_per_filter, grid11(),
                                            conv_table, pack::EvalMode::relin_only);
    double conv_factor = conv.factor_at(1.0);
    if (conv_factor < 18.0 || conv_factor > 70.0) {
        std::ostringstream os;
        os << "conv 3x3 factor at p=1.0 is " << conv_factor << ", outside [18,70]"
           << " (measured units: ciph=" << conv_table.ciph_mult
           << " relin=" << conv_table.relinearization << ")";
        return os.str();
    }
    for (size_t i = 1; i < conv.points.size(); ++i)
        if (!(conv.points[i].factor > conv.points[i - 1].factor))
            return "conv overhead factor is not strictly increasing in p";

    double speedup = bench::speedup_summary(conv, 1.0, 0.2);
    if (speedup < 3.0) {
        std::ostringstream os;
        os << "conv speedup(1.0 vs 0.2) is " << speedup << ", below 3";
        return os.str();
    }
    return "";
}

// ---------------------------------------------------------------- criterion 5

std::string criterion5() {
    // Published defaults for (2^12, depth 2): ciph 2.7, relin 16.1; one
    // ciphertext multiplication plus its relinearization, exact arithmetic.
    // The source text rounds the relinearization unit to 16 when quoting the
    // pair (2.7 + 16 = 18.7, "almost 19 times"); on the exact table entries
    // the sum is 18.8 and that value is asserted here with zero tolerance.
    he::CostBackend be(he::CkksParams::preset_4096(), he::CostTable::paper_default_4096());
    auto pt = be.encode({1.0}, be.top_level(), be.default_scale());
    auto a = be.encrypt(pt);
    auto b = be.encrypt(pt);
    be.relinearize(be.mul_ct(a, b));
    double t = be.ledger().estimated_time;
    if (t != 2.7 + 16.1) {
        std::ostringstream os;
        os << "ciph mult + relin cost " << t << " plain-mult units, expected 18.8 exactly";
        return os.str();
    }
    if (!(t >= 18.5 && t < 19.0)) return "cost is not 'almost 19 times' a plain mult";
    return "";
}

// ------------------------------------------------------- criteria 6 and 7

struct DeskModel {
    nn::NetworkSpec net;
    nn::WeightStore weights;
    nn::Dataset test;
    double test_accuracy = 0.0;
};

DeskModel& desk_model() {
    static DeskModel model = [] {
        DeskModel m;
        fs::path dir = fs::temp_directory_path() / "poi_acceptance_data";
        fs::create_directories(dir);
        nn::Dataset train = testing::synth_digits(200, 606, "train");   // 2,000
        nn::Dataset test = testing::synth_digits(100, 707, "test");     // 1,000
        nn::save_idx_images((dir / "train_images.idx").string(), train.images);
        nn::save_idx_labels((dir / "train_labels.idx").string(), train.labels);
        nn::save_idx_images((dir / "test_images.idx").string(), test.images);
        nn::save_idx_labels((dir / "test_labels.idx").string(), test.labels);

        nn::Dataset train_loaded = nn::load_dataset_idx((dir / "train_images.idx").string(),
                                                        (dir / "train_labels.idx").string(),
                                                        "train");
        m.test = nn::load_dataset_idx((dir / "test_images.idx").string(),
                                      (dir / "test_labels.idx").string(), "test");

        m.net = nn::NetworkSpec::mnist_cnn();
        nn::TrainConfig cfg;
        cfg.epochs = 10;
        cfg.batch_size = 32;
        cfg.seed = 1234;
        m.weights = nn::train(m.net, train_loaded, cfg);
        m.test_accuracy = nn::evaluate_accuracy(m.net, m.weights, m.test);
        return m;
    }();
    return model;
}

std::string criterion6() {
    DeskModel& m = desk_model();
    if (m.test_accuracy < 0.95) {
        std::ostringstream os;
        os << "trained test accuracy " << m.test_accuracy << " < 0.95";
        return os.str();
    }
    auto schemes = leak::default_schemes(m.net);
    auto policy = attack::AttackPolicy::Const(0.0);
    auto cell = [&](double p) {
        return attack::attacker_advantage(m.net, m.weights, schemes, p,
                                          leak::SelectionStrategy::random, policy, true, m.test,
                                          10, 881);
    };
    attack::AdvantageReport at0 = cell(0.0), at08 = cell(0.8), at1 = cell(1.0);

    if (at1.adv_mean != 0.0 || at1.adv_std != 0.0) {
        std::ostringstream os;
        os << "adv at p=1.0 is " << at1.adv_mean << " (" << at1.adv_std << "), expected exactly 0";
        return os.str();
    }
    double reference = 0.5 * (at0.acc_full - at0.acc_baseline);
    if (at0.adv_mean < reference) {
        std::ostringstream os;
        os << "adv at p=0.0 is " << at0.adv_mean << " < 0.5*(acc_full - acc_baseline) = "
           << reference;
        return os.str();
    }
    if (at08.adv_mean > 0.25 * at0.adv_mean) {
        std::ostringstream os;
        os << "adv at p=0.8 is " << at08.adv_mean << " > 0.25 * " << at0.adv_mean;
        return os.str();
    }
    return "";
}

std::string criterion7() {
    DeskModel& m = desk_model();
    nn::Dataset balanced = nn::balanced_subset(m.test, 100);
    auto schemes = leak::default_schemes(m.net);
    auto plan = leak::plan_leakage(m.weights, schemes, 1.0, leak::SelectionStrategy::random, true,
                                   9001);
    nn::WeightStore rec = attack::reconstruct(m.weights, plan, attack::AttackPolicy::Const(0.0),
                                              9001);
    double acc = nn::evaluate_accuracy(m.net, rec, balanced);
    if (acc != 0.1) {
        std::ostringstream os;
        os << "zero-network accuracy on the balanced set is " << acc << ", expected exactly 0.1";
        return os.str();
    }
    return "";
}

// ---------------------------------------------------------------- criterion 8

std::string criterion8() {
    using bench::BilinearInput;
    auto l0 = bench::count_bilinear({});
    if (l0.ciph_mults != 2 || l0.ct_adds != 1 || l0.plain_mults != 0 || l0.pt_adds != 0)
        return "empty leak set: " + l0.to_string();
    auto l1 = bench::count_bilinear({BilinearInput::x, BilinearInput::y});
    if (l1.ciph_mults != 1 || l1.pt_adds != 1 || l1.plain_mults != 0 || l1.ct_adds != 0)
        return "{x,y}: " + l1.to_string();
    auto l2 = bench::count_bilinear({BilinearInput::x, BilinearInput::z});
    if (l2.plain_mults != 2 || l2.ct_adds != 1 || l2.ciph_mults != 0 || l2.pt_adds != 0)
        return "{x,z}: " + l2.to_string();

    std::vector<std::set<BilinearInput>> pairs = {
        {BilinearInput::x, BilinearInput::y}, {BilinearInput::x, BilinearInput::z},
        {BilinearInput::x, BilinearInput::w}, {BilinearInput::y, BilinearInput::z},
        {BilinearInput::y, BilinearInput::w}, {BilinearInput::z, BilinearInput::w}};
    std::set<std::string> classes;
    for (const auto& s : pairs) classes.insert(bench::count_bilinear(s).to_string());
    if (classes.size() != 2)
        return "two-element leak sets formed " + std::to_string(classes.size()) +
               " ledger classes, expected 2";
    return "";
}

// ---------------------------------------------------------------- criterion 9

std::string criterion9() {
    std::map<size_t, leak::GroupScheme> schemes{{0, leak::GroupScheme::fc_naive_rows}};
    std::mt19937_64 rng(909);
    std::uniform_real_distribution<float> wdist(-1.0f, 1.0f);
    std::uniform_real_distribution<double> sdist(0.01, 100.0);

    // max-weight invariance under positive scaling, 100 trials
    for (int trial = 0; trial < 100; ++trial) {
        nn::WeightStore ws;
        nn::LayerWeights lw;
        lw.weight = nn::Tensor({12, 9});
        lw.bias = nn::Tensor({9});
        for (auto& v : lw.weight.data) v = wdist(rng);
        ws.layers[0] = std::move(lw);
        auto base =
            leak::plan_leakage(ws, schemes, 0.4, leak::SelectionStrategy::max_weight, true, 0);
        nn::WeightStore scaled = ws;
        float c = static_cast<float>(sdist(rng));
        for (auto& v : scaled.at(0).weight.data) v *= c;
        auto after =
            leak::plan_leakage(scaled, schemes, 0.4, leak::SelectionStrategy::max_weight, true, 0);
        if (base.layers[0].hidden != after.layers[0].hidden)
            return "max-weight selection changed under positive scaling on trial " +
                   std::to_string(trial);
    }

    // chi-squared uniformity of random selection over 1,000 draws (df 9)
    nn::WeightStore ws;
    nn::LayerWeights lw;
    lw.weight = nn::Tensor({4, 10});
    lw.bias = nn::Tensor({10});
    for (auto& v : lw.weight.data) v = wdist(rng);
    ws.layers[0] = std::move(lw);
    std::vector<double> counts(10, 0.0);
    for (int s = 0; s < 1000; ++s) {
        auto plan = leak::plan_leakage(ws, schemes, 0.1, leak::SelectionStrategy::random, true,
                                       static_cast<uint64_t>(s));
        counts[plan.layers[0].hidden[0]] += 1.0;
    }
    double chi2 = 0;
    for (double c : counts) chi2 += (c - 100.0) * (c - 100.0) / 100.0;
    if (chi2 >= testing::kChi2Crit9df01) {
        std::ostringstream os;
        os << "chi-squared statistic " << chi2 << " >= " << testing::kChi2Crit9df01;
        return os.str();
    }

    // quota exactness across the grid for two group counts
    for (size_t G : {10u, 7u}) {
        nn::WeightStore t;
        nn::LayerWeights tl;
        tl.weight = nn::Tensor({8, G});
        tl.bias = nn::Tensor({G});
        for (auto& v : tl.weight.data) v = wdist(rng);
        t.layers[0] = std::move(tl);
        for (double p : grid11()) {
            auto plan = leak::plan_leakage(t, schemes, p, leak::SelectionStrategy::random, true, 3);
            if (plan.layers[0].hidden.size() != leak::hidden_quota(p, G))
                return "quota mismatch at p=" + std::to_string(p);
        }
    }
    return "";
}

// --------------------------------------------------------------- criterion 10

std::string criterion10(bool& skipped) {
    const char* weights_path = std::getenv("POI_FULL_MNIST_WEIGHTS");
    const char* test_images = std::getenv("POI_FULL_MNIST_TEST_IMAGES");
    const char* test_labels = std::getenv("POI_FULL_MNIST_TEST_LABELS");
    if (!weights_path || !test_images || !test_labels) {
        skipped = true;
        return "";
    }
    nn::WeightStore raw = nn::load_weights(weights_path);
    nn::NetworkSpec net = nn::NetworkSpec::mnist_cnn();
    nn::Dataset test = nn::load_dataset_idx(test_images, test_labels, "test");
    auto schemes = leak::default_schemes(net);
    auto policy = attack::AttackPolicy::Const(0.0);
    // published MNIST const column (x100): p=0 -> 89.1, p=0.5 -> 72.0, p=1 -> 0.0
    struct Ref { double p, adv; } refs[] = {{0.0, 0.891}, {0.5, 0.720}, {1.0, 0.0}};
    for (const Ref& r : refs) {
        auto rep = attack::attacker_advantage(net, raw, schemes, r.p,
                                              leak::SelectionStrategy::random, policy, true, test,
                                              10, 4242);
        if (std::abs(rep.adv_mean - r.adv) > 0.05) {
            std::ostringstream os;
            os << "imported-model advantage at p=" << r.p << " is " << rep.adv_mean
               << ", more than 5 points from " << r.adv;
            return os.str();
        }
    }
    return "";
}

}  // namespace

int main() {
    std::vector<Criterion> criteria = {
        {"C1 op-count oracle equivalence (exact, full p grid)", criterion1},
        {"C2 HE correctness within 1e-2 (50 random instances)", criterion2},
        {"C3 noise properties (bound, monotone budget, depth guard)", criterion3},
        {"C4 overhead-factor bands on this host", criterion4},
        {"C5 cost-model default: ciph mult + relin in plain units", criterion5},
        {"C6 security pipeline at desk scale", criterion6},
        {"C7 zero-network baseline equals the class prior", criterion7},
        {"C8 bilinear example ledgers", criterion8},
        {"C9 selection-strategy properties", criterion9},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        auto t0 = std::chrono::steady_clock::now();
        std::string detail;
        try {
            detail = c.run();
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (detail.empty()) {
            std::cout << "[PASS] " << c.name << " (" << std::fixed << std::setprecision(1) << secs
                      << "s)\n";
        } else {
            ++failures;
            std::cout << "[FAIL] " << c.name << ": " << detail << "\n";
        }
        std::cout.flush();
    }

    bool skipped = false;
    std::string detail;
    try {
        detail = criterion10(skipped);
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
    }
    if (skipped) {
        std::cout << "[SKIP] C10 full-scale import path (set POI_FULL_MNIST_WEIGHTS, "
                     "POI_FULL_MNIST_TEST_IMAGES, POI_FULL_MNIST_TEST_LABELS to enable; "
                     "optional, not gating)\n";
    } else if (detail.empty()) {
        std::cout << "[PASS] C10 full-scale import path\n";
    } else {
        ++failures;
        std::cout << "[FAIL] C10 full-scale import path: " << detail << "\n";
    }

    if (failures == 0)
        std::cout << "acceptance: all criteria passed\n";
    else
        std::cout << "acceptance: " << failures << " criteria FAILED\n";
    return failures;
}

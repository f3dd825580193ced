// Copyright (c) 2026 the poi authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "poi/nn/batchnorm_fold.hpp"
#include "poi/nn/forward.hpp"
#include "poi/nn/network.hpp"
#include "poi/nn/train.hpp"
#include "support/oracles.hpp"

using namespace poi;

TEST_CASE("network validation chains shapes") {
    nn::NetworkSpec net = nn::NetworkSpec::mnist_cnn();
    auto shapes = net.validate();
    REQUIRE(shapes.back() == std::vector<size_t>{10});

    nn::NetworkSpec cifar = nn::NetworkSpec::cifar_cnn();
    REQUIRE(cifar.validate().back() == std::vector<size_t>{10});

    SECTION("mismatched fc input is rejected with the layer index") {
        nn::NetworkSpec bad;
        bad.input_shape = {1, 4, 4};
        bad.layers = {nn::FcSpec{17, 3}, nn::SoftmaxSpec{}};
        REQUIRE_THROWS_WITH(bad.validate(), Catch::Matchers::ContainsSubstring("layer 0"));
    }
}

TEST_CASE("identity FC returns its input as logits") {
    nn::NetworkSpec net;
    net.input_shape = {2};
    net.layers = {nn::FcSpec{2, 2}};
    nn::WeightStore ws;
    nn::LayerWeights lw;
    lw.weight = nn::Tensor({2, 2}, {1, 0, 0, 1});
    lw.bias = nn::Tensor({2});
    ws.layers[0] = lw;

    nn::Tensor in({2}, {3.0f, -1.0f});
    nn::Tensor out = nn::forward(net, ws, in);
    CHECK(out.data[0] == Catch::Approx(3.0));
    CHECK(out.data[1] == Catch::Approx(-1.0));
}

TEST_CASE("zero network: equal logits, argmax is the lowest class") {
    nn::NetworkSpec net = nn::NetworkSpec::mnist_cnn();
    nn::WeightStore ws = nn::init_weights(net, 1);
    for (auto& [i, lw] : ws.layers) {
        for (auto& v : lw.weight.data) v = 0;
        for (auto& v : lw.bias.data) v = 0;
    }
    nn::Tensor in({1, 28, 28});
    for (size_t i = 0; i < in.size(); ++i) in.data[i] = static_cast<float>((i % 7) / 7.0);
    nn::Tensor probs = nn::forward(net, ws, in);
    for (size_t j = 1; j < 10; ++j) CHECK(probs.data[j] == Catch::Approx(probs.data[0]));
    CHECK(nn::argmax_lowest(probs) == 0);

    double sum = 0;
    for (float v : probs.data) sum += v;
    CHECK(sum == Catch::Approx(1.0).margin(1e-6));
}

TEST_CASE("forward matches the independent oracle on a trained-style net") {
    nn::NetworkSpec net = nn::NetworkSpec::mnist_cnn();
    nn::WeightStore ws = nn::init_weights(net, 99);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<float> dist(0.0f, 1.0f);
    for (int trial = 0; trial < 3; ++trial) {
        nn::Tensor in({1, 28, 28});
        for (auto& v : in.data) v = dist(rng);
        nn::Tensor probs = nn::forward(net, ws, in);
        auto ref = testing::oracle_forward(net, ws, in);
        for (size_t j = 0; j < 10; ++j)
            REQUIRE(std::abs(probs.data[j] - ref[j]) < 1e-5);
    }
}

TEST_CASE("forward determinism") {
    nn::NetworkSpec net = nn::NetworkSpec::mnist_cnn();
    nn::WeightStore ws = nn::init_weights(net, 7);
    nn::Tensor in({1, 28, 28});
    for (size_t i = 0; i < in.size(); ++i) in.data[i] = static_cast<float>((i * 37 % 255) / 255.0);
    nn::Tensor a = nn::forward(net, ws, in);
    nn::Tensor b = nn::forward(net, ws, in);
    REQUIRE(a.data == b.data);
}

TEST_CASE("evaluate_accuracy") {
    nn::NetworkSpec net;
    net.input_shape = {10};
    net.layers = {nn::FcSpec{10, 10}, nn::SoftmaxSpec{}};

    nn::Dataset data;
    data.classes = 10;
    data.split = "test";
    for (int c = 0; c < 10; ++c)
        for (int rep = 0; rep < 3; ++rep) {
            nn::Tensor t({10});
            t.data[c] = 1.0f;
            data.images.push_back(t);
            data.labels.push_back(c);
        }

    SECTION("identity weights give a perfect one-hot predictor") {
        nn::WeightStore ws;
        nn::LayerWeights lw;
        lw.weight = nn::Tensor({10, 10});
        for (size_t i = 0; i < 10; ++i) lw.weight.data[i * 10 + i] = 5.0f;
        lw.bias = nn::Tensor({10});
        ws.layers[0] = lw;
        REQUIRE(nn::evaluate_accuracy(net, ws, data) == 1.0);
    }

    SECTION("zero network on balanced data scores exactly the class prior") {
        nn::WeightStore ws;
        nn::LayerWeights lw;
        lw.weight = nn::Tensor({10, 10});
        lw.bias = nn::Tensor({10});
        ws.layers[0] = lw;
        REQUIRE(nn::evaluate_accuracy(net, ws, data) == 0.1);
    }

    SECTION("label permutation of a perfect predictor on balanced data scores the prior") {
        // brute-force expectation: a fixed class permutation relabels
        // predictions; exactly one class in ten still lines up per cycle
        // structure; with a full-cycle permutation accuracy collapses to 0,
        // with identity it is 1; the random-relabel average equals 0.1.
        nn::WeightStore ws;
        nn::LayerWeights lw;
        lw.weight = nn::Tensor({10, 10});
        for (size_t i = 0; i < 10; ++i) lw.weight.data[i * 10 + i] = 5.0f;
        lw.bias = nn::Tensor({10});
        ws.layers[0] = lw;

        std::mt19937_64 rng(123);
        double total = 0;
        const int trials = 200;
        for (int t = 0; t < trials; ++t) {
            std::vector<int> perm(10);
            for (int i = 0; i < 10; ++i) perm[i] = i;
            std::shuffle(perm.begin(), perm.end(), rng);
            nn::Dataset relabeled = data;
            for (auto& l : relabeled.labels) l = perm[l];
            total += nn::evaluate_accuracy(net, ws, relabeled);
        }
        REQUIRE(total / trials == Catch::Approx(0.1).margin(0.035));
    }

    SECTION("empty dataset is an error") {
        nn::Dataset empty;
        empty.classes = 10;
        nn::WeightStore ws;
        nn::LayerWeights lw;
        lw.weight = nn::Tensor({10, 10});
        lw.bias = nn::Tensor({10});
        ws.layers[0] = lw;
        REQUIRE_THROWS_AS(nn::evaluate_accuracy(net, ws, empty), std::invalid_argument);
    }
}

TEST_CASE("batch evaluation is order-independent across worker threads") {
    nn::NetworkSpec net;
    net.input_shape = {6};
    net.layers = {nn::FcSpec{6, 3}, nn::SoftmaxSpec{}};
    nn::WeightStore ws = nn::init_weights(net, 12);
    nn::Dataset data;
    data.classes = 3;
    data.split = "test";
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<float> dist(0.0f, 1.0f);
    for (int i = 0; i < 31; ++i) {
        nn::Tensor t({6});
        for (auto& v : t.data) v = dist(rng);
        data.images.push_back(t);
        data.labels.push_back(i % 3);
    }
    setenv("POI_THREADS", "1", 1);
    double single = nn::evaluate_accuracy(net, ws, data);
    setenv("POI_THREADS", "4", 1);
    double threaded = nn::evaluate_accuracy(net, ws, data);
    unsetenv("POI_THREADS");
    REQUIRE(single == threaded);
}

TEST_CASE("fold_batchnorm") {
    nn::NetworkSpec net;
    net.input_shape = {2, 4, 4};
    net.layers = {nn::ConvSpec{3, 2, 3}, nn::BatchNormSpec{3}, nn::ReluSpec{},
                  nn::FcSpec{3 * 4 * 4, 4}, nn::SoftmaxSpec{}};
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
    nn::WeightStore ws = nn::init_weights(net, 3);

    SECTION("identity batchnorm leaves weights unchanged (up to the epsilon guard)") {
        auto [net2, ws2] = nn::fold_batchnorm(net, ws);
        REQUIRE(net2.layers.size() == net.layers.size() - 1);
        for (size_t i = 0; i < ws.at(0).weight.size(); ++i)
            REQUIRE(ws2.at(0).weight.data[i] ==
                    Catch::Approx(ws.at(0).weight.data[i]).margin(1e-5));
        for (size_t i = 0; i < ws.at(0).bias.size(); ++i)
            REQUIRE(ws2.at(0).bias.data[i] == Catch::Approx(ws.at(0).bias.data[i]).margin(1e-5));
    }

    SECTION("gamma=2 doubles the folded kernel") {
        for (auto& v : ws.at(1).gamma.data) v = 2.0f;
        auto [net2, ws2] = nn::fold_batchnorm(net, ws);
        for (size_t i = 0; i < ws.at(0).weight.size(); ++i)
            REQUIRE(ws2.at(0).weight.data[i] ==
                    Catch::Approx(2.0f * ws.at(0).weight.data[i]).margin(1e-5));
    }

    SECTION("random parameters: outputs preserved within 1e-5 over 100 probes") {
        auto& bn = ws.at(1);
        for (auto& v : bn.gamma.data) v = 0.5f + std::abs(dist(rng));
        for (auto& v : bn.beta.data) v = dist(rng);
        for (auto& v : bn.running_mean.data) v = dist(rng);
        for (auto& v : bn.running_var.data) v = 0.2f + std::abs(dist(rng));
        auto [net2, ws2] = nn::fold_batchnorm(net, ws);
        REQUIRE(net2.validate().back() == std::vector<size_t>{4});
        for (int probe = 0; probe < 100; ++probe) {
            nn::Tensor in({2, 4, 4});
            for (auto& v : in.data) v = dist(rng);
            nn::Tensor a = nn::forward(net, ws, in);
            nn::Tensor b = nn::forward(net2, ws2, in);
            for (size_t j = 0; j < a.size(); ++j)
                REQUIRE(std::abs(a.data[j] - b.data[j]) < 1e-5);
        }
    }

    SECTION("batchnorm without a preceding linear layer is an error") {
        nn::NetworkSpec bad;
        bad.input_shape = {2, 4, 4};
        bad.layers = {nn::BatchNormSpec{2}, nn::SoftmaxSpec{}};
        nn::WeightStore ws2 = nn::init_weights(bad, 0);
        REQUIRE_THROWS_AS(nn::fold_batchnorm(bad, ws2), std::invalid_argument);
    }
}

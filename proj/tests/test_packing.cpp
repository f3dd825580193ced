// Copyright (c) 2026 the poi authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "poi/he/cost_backend.hpp"
#include "poi/packing.hpp"
#include "support/oracles.hpp"

using namespace poi;
using pack::EvalMode;
using pack::FcPackingKind;

namespace {

nn::Tensor random_tensor(std::vector<size_t> shape, std::mt19937_64& rng, double lo, double hi) {
    nn::Tensor t(std::move(shape));
    std::uniform_real_distribution<double> dist(lo, hi);
    for (auto& v : t.data) v = static_cast<float>(dist(rng));
    return t;
}

leak::LayerPlan plan_for(leak::GroupScheme scheme, size_t groups, double p, bool bias_hidden,
                         uint64_t seed) {
    leak::LayerPlan lp;
    lp.layer = 0;
    lp.scheme = scheme;
    lp.group_count = groups;
    lp.bias_hidden = bias_hidden;
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

he::ExactBackend& fast_backend() {
    static he::ExactBackend be(he::CkksParams::preset_4096(), 404);
    return be;
}

he::ExactBackend& accurate_backend() {
    static he::ExactBackend be(he::CkksParams::accuracy_8192(), 505);
    return be;
}

}  // namespace

TEST_CASE("predicted_fc_ops reproduces the published count rules") {
    SECTION("naive FC(128,10), p=1.0: 10 ciphertext mults, 10 relins, 0 plain") {
        auto l = pack::predicted_fc_ops(128, 10, FcPackingKind::naive, 1.0, EvalMode::relin_only);
        CHECK(l.ciph_mults == 10);
        CHECK(l.relins == 10);
        CHECK(l.plain_mults == 0);
    }
    SECTION("naive FC(128,10), p=0.2: 8 plain, 2 ciph, 2 relins (floor rule)") {
        auto l = pack::predicted_fc_ops(128, 10, FcPackingKind::naive, 0.2, EvalMode::relin_only);
        CHECK(l.plain_mults == 8);
        CHECK(l.ciph_mults == 2);
        CHECK(l.relins == 2);
    }
    SECTION("diagonal FC(2048,128), p=0.5: 1024 plain + 1024 ciph") {
        auto l =
            pack::predicted_fc_ops(2048, 128, FcPackingKind::diagonal, 0.5, EvalMode::relin_only);
        CHECK(l.plain_mults == 1024);
        CHECK(l.ciph_mults == 1024);
    }
    SECTION("diagonal FC(128,10), p=0: 128 plain, 0 ciph") {
        auto l =
            pack::predicted_fc_ops(128, 10, FcPackingKind::diagonal, 0.0, EvalMode::relin_only);
        CHECK(l.plain_mults == 128);
        CHECK(l.ciph_mults == 0);
    }
    SECTION("hybrid matches naive mult counts at every p") {
        for (int pi = 0; pi <= 10; ++pi) {
            double p = pi / 10.0;
            auto n = pack::predicted_fc_ops(2048, 128, FcPackingKind::naive, p, EvalMode::relin_only);
            auto h = pack::predicted_fc_ops(2048, 128, FcPackingKind::hybrid, p, EvalMode::relin_only);
            CHECK(n.plain_mults == h.plain_mults);
            CHECK(n.ciph_mults == h.ciph_mults);
            CHECK(n.relins == h.relins);
        }
    }
    SECTION("rescale-all mode pairs a rescale with every multiplication") {
        auto l = pack::predicted_fc_ops(128, 10, FcPackingKind::naive, 0.3, EvalMode::rescale_all);
        CHECK(l.rescales == 10);
        auto d =
            pack::predicted_fc_ops(128, 10, FcPackingKind::diagonal, 0.3, EvalMode::rescale_all);
        CHECK(d.rescales == 128);
    }
}

TEST_CASE("predicted_conv_ops follows the 9-mults-per-filter rule") {
    pack::ConvDims dims{3, 3, 1, 32, 32};
    SECTION("one hidden filter: 9 ciph mults + 9 relins") {
        auto l = pack::predicted_conv_ops(dims, leak::GroupScheme::conv_per_filter, 1.0,
                                          EvalMode::relin_only);
        CHECK(l.ciph_mults == 9);
        CHECK(l.relins == 9);
        CHECK(l.plain_mults == 0);
    }
    SECTION("one revealed filter: 9 plain mults, 0 relins") {
        auto l = pack::predicted_conv_ops(dims, leak::GroupScheme::conv_per_filter, 0.0,
                                          EvalMode::relin_only);
        CHECK(l.plain_mults == 9);
        CHECK(l.relins == 0);
    }
    SECTION("2 filters at p=0.5: 9 plain + 9 ciph") {
        pack::ConvDims two{3, 3, 2, 32, 32};
        auto l = pack::predicted_conv_ops(two, leak::GroupScheme::conv_per_filter, 0.5,
                                          EvalMode::relin_only);
        CHECK(l.plain_mults == 9);
        CHECK(l.ciph_mults == 9);
    }
}

TEST_CASE("measured ledger equals predicted ledger exactly (small dims, full grid)") {
    he::ExactBackend& be = fast_backend();
    std::mt19937_64 rng(7);
    const size_t M = 16, N = 6;
    nn::Tensor w = random_tensor({M, N}, rng, -1, 1);
    nn::Tensor b = random_tensor({N}, rng, -1, 1);

    for (auto mode : {EvalMode::relin_only, EvalMode::rescale_all}) {
        for (auto kind : {FcPackingKind::naive, FcPackingKind::diagonal, FcPackingKind::hybrid}) {
            for (int pi = 0; pi <= 10; ++pi) {
                double p = pi / 10.0;
                size_t groups = pack::layout_polynomial_count(M, N, kind);
                auto plan = plan_for(pack::fc_kind_scheme(kind), groups, p, true, 31 * pi + 1);
                auto packed = pack::pack_fc(be, w, b, kind, plan, mode);
                auto input = pack::pack_fc_input(
                    be, std::vector<double>(M, 0.25), kind);
                auto result = pack::eval_fc_he(be, packed, input);
                auto predicted = pack::predicted_fc_ops(M, N, kind, p, mode, true);
                INFO("kind=" << pack::fc_kind_name(kind) << " p=" << p
                             << " mode=" << (mode == EvalMode::relin_only ? "relin" : "rescale"));
                INFO("measured:  " << result.ops.to_string());
                INFO("predicted: " << predicted.to_string());
                REQUIRE(result.ops.counters_equal(predicted));
                REQUIRE(result.ops.plain_mults + result.ops.ciph_mults == groups);
            }
        }
    }
}

TEST_CASE("conv measured ledger equals predicted (both granularities)") {
    he::ExactBackend& be = fast_backend();
    std::mt19937_64 rng(11);
    pack::ConvDims dims{3, 2, 5, 6, 6};
    nn::Tensor w = random_tensor({3, 3, 2, 5}, rng, -1, 1);
    nn::Tensor b = random_tensor({5}, rng, -1, 1);
    nn::Tensor img = random_tensor({2, 6, 6}, rng, -1, 1);

    for (auto mode : {EvalMode::relin_only, EvalMode::rescale_all}) {
        for (auto gran :
             {leak::GroupScheme::conv_per_filter, leak::GroupScheme::conv_per_kernel}) {
            size_t G = gran == leak::GroupScheme::conv_per_filter ? dims.out_channels
                                                                  : dims.out_channels * dims.in_channels;
            for (int pi = 0; pi <= 10; pi += 2) {
                double p = pi / 10.0;
                auto plan = plan_for(gran, G, p, true, 7 * pi + 3);
                auto packed = pack::pack_conv(be, w, b, gran, plan, mode, dims.height, dims.width);
                auto input = pack::pack_conv_input(be, img, packed.geom);
                auto result = pack::eval_conv_he(be, packed, input);
                auto predicted = pack::predicted_conv_ops(dims, gran, p, mode, true);
                INFO("gran=" << leak::scheme_name(gran) << " p=" << p);
                INFO("measured:  " << result.ops.to_string());
                INFO("predicted: " << predicted.to_string());
                REQUIRE(result.ops.counters_equal(predicted));
                REQUIRE(result.ops.plain_mults + result.ops.ciph_mults ==
                        pack::layout_polynomial_count(dims, gran));
            }
        }
    }
}

TEST_CASE("rotations and additions do not depend on p") {
    for (auto kind : {FcPackingKind::naive, FcPackingKind::diagonal}) {
        auto base = pack::predicted_fc_ops(64, 12, kind, 0.0, EvalMode::relin_only);
        for (int pi = 1; pi <= 10; ++pi) {
            auto l = pack::predicted_fc_ops(64, 12, kind, pi / 10.0, EvalMode::relin_only);
            REQUIRE(l.rotations == base.rotations);
            REQUIRE(l.ct_adds == base.ct_adds);
            REQUIRE(l.pt_adds == base.pt_adds);
        }
    }
}

TEST_CASE("oracle equivalence: decrypted FC evaluation matches the dense layer") {
    he::ExactBackend& be = accurate_backend();
    std::mt19937_64 rng(23);
    const size_t M = 16, N = 6;

    for (auto kind : {FcPackingKind::naive, FcPackingKind::diagonal, FcPackingKind::hybrid}) {
        for (double p : {0.0, 0.5, 1.0}) {
            nn::Tensor w = random_tensor({M, N}, rng, -10, 10);
            nn::Tensor b = random_tensor({N}, rng, -10, 10);
            std::vector<double> v(M);
            std::uniform_real_distribution<double> dist(-10, 10);
            for (auto& x : v) x = dist(rng);

            size_t groups = pack::layout_polynomial_count(M, N, kind);
            auto plan = plan_for(pack::fc_kind_scheme(kind), groups, p, true, 97);
            auto packed = pack::pack_fc(be, w, b, kind, plan, EvalMode::relin_only);
            auto input = pack::pack_fc_input(be, v, kind);
            auto result = pack::eval_fc_he(be, packed, input);
            auto out = pack::decrypt_fc_output(be, packed, result);

            std::vector<std::vector<double>> cols(N, std::vector<double>(M));
            for (size_t j = 0; j < N; ++j)
                for (size_t i = 0; i < M; ++i) cols[j][i] = w.data[i * N + j];
            std::vector<double> bias(b.data.begin(), b.data.end());
            auto expect = testing::oracle_fc(cols, bias, v);
            INFO("kind=" << pack::fc_kind_name(kind) << " p=" << p);
            for (size_t j = 0; j < N; ++j)
                REQUIRE(std::abs(out[j] - expect[j]) < 1e-2);
        }
    }

    SECTION("rescale-all mode is numerically equivalent too") {
        nn::Tensor w = random_tensor({M, N}, rng, -10, 10);
        nn::Tensor b = random_tensor({N}, rng, -10, 10);
        std::vector<double> v(M, 1.5);
        auto plan = plan_for(leak::GroupScheme::fc_naive_rows, N, 0.5, true, 3);
        auto packed = pack::pack_fc(be, w, b, FcPackingKind::naive, plan, EvalMode::rescale_all);
        auto input = pack::pack_fc_input(be, v, FcPackingKind::naive);
        auto result = pack::eval_fc_he(be, packed, input);
        auto out = pack::decrypt_fc_output(be, packed, result);
        std::vector<std::vector<double>> cols(N, std::vector<double>(M));
        for (size_t j = 0; j < N; ++j)
            for (size_t i = 0; i < M; ++i) cols[j][i] = w.data[i * N + j];
        auto expect = testing::oracle_fc(cols, std::vector<double>(b.data.begin(), b.data.end()), v);
        for (size_t j = 0; j < N; ++j) REQUIRE(std::abs(out[j] - expect[j]) < 1e-2);
    }
}

TEST_CASE("oracle equivalence: decrypted conv evaluation matches direct convolution") {
    he::ExactBackend& be = accurate_backend();
    std::mt19937_64 rng(29);
    pack::ConvDims dims{3, 2, 3, 6, 6};

    for (auto gran : {leak::GroupScheme::conv_per_filter, leak::GroupScheme::conv_per_kernel}) {
        for (double p : {0.0, 0.5, 1.0}) {
            nn::Tensor w = random_tensor({3, 3, 2, 3}, rng, -10, 10);
            nn::Tensor b = random_tensor({3}, rng, -10, 10);
            nn::Tensor img = random_tensor({2, 6, 6}, rng, -10, 10);
            size_t G = gran == leak::GroupScheme::conv_per_filter ? 3 : 6;
            auto plan = plan_for(gran, G, p, true, 13);
            auto packed = pack::pack_conv(be, w, b, gran, plan, EvalMode::relin_only, 6, 6);
            auto input = pack::pack_conv_input(be, img, packed.geom);
            auto result = pack::eval_conv_he(be, packed, input);
            auto maps = pack::decrypt_conv_output(be, packed, result);

            std::vector<double> image(img.data.begin(), img.data.end());
            std::vector<double> wd(w.data.begin(), w.data.end());
            std::vector<double> bd(b.data.begin(), b.data.end());
            auto expect = testing::oracle_conv(image, 2, 6, 6, wd, 3, 3, bd);
            INFO("gran=" << leak::scheme_name(gran) << " p=" << p);
            for (size_t f = 0; f < 3; ++f)
                for (size_t i = 0; i < 36; ++i)
                    REQUIRE(std::abs(maps[f].data[i] - expect[f][i]) < 1e-2);
        }
    }
}

TEST_CASE("payload tagging matches the plan") {
    he::ExactBackend& be = fast_backend();
    std::mt19937_64 rng(31);
    nn::Tensor w = random_tensor({8, 4}, rng, -1, 1);
    nn::Tensor b = random_tensor({4}, rng, -1, 1);

    SECTION("p=0 packs an all-plaintext layer") {
        auto plan = plan_for(leak::GroupScheme::fc_naive_rows, 4, 0.0, false, 1);
        auto packed = pack::pack_fc(be, w, b, FcPackingKind::naive, plan, EvalMode::relin_only);
        for (const auto& g : packed.groups) {
            REQUIRE_FALSE(g.hidden);
            REQUIRE(g.pt.has_value());
        }
        for (const auto& g : packed.bias) REQUIRE_FALSE(g.hidden);
    }
    SECTION("p=1 packs an all-ciphertext layer") {
        auto plan = plan_for(leak::GroupScheme::fc_naive_rows, 4, 1.0, true, 1);
        auto packed = pack::pack_fc(be, w, b, FcPackingKind::naive, plan, EvalMode::relin_only);
        for (const auto& g : packed.groups) {
            REQUIRE(g.hidden);
            REQUIRE(g.ct.has_value());
        }
    }
    SECTION("plan referencing a nonexistent group is rejected") {
        leak::LayerPlan bad;
        bad.scheme = leak::GroupScheme::fc_naive_rows;
        bad.group_count = 4;
        bad.hidden = {7};
        REQUIRE_THROWS_WITH(
            pack::pack_fc(be, w, b, FcPackingKind::naive, bad, EvalMode::relin_only),
            Catch::Matchers::ContainsSubstring("group"));
    }
    SECTION("oversized image is rejected") {
        nn::Tensor cw = random_tensor({3, 3, 4, 1}, rng, -1, 1);
        nn::Tensor cb = random_tensor({1}, rng, -1, 1);
        leak::LayerPlan plan = plan_for(leak::GroupScheme::conv_per_filter, 1, 0.0, true, 1);
        REQUIRE_THROWS_WITH(
            pack::pack_conv(be, cw, cb, leak::GroupScheme::conv_per_filter, plan,
                            EvalMode::relin_only, 64, 64),
            Catch::Matchers::ContainsSubstring("too large"));
    }
}

TEST_CASE("exact and cost backends produce identical ledgers for the same plan") {
    he::ExactBackend& exact = fast_backend();
    he::CostBackend cost(he::CkksParams::preset_4096(), he::CostTable::paper_default_4096());

    std::mt19937_64 rng(37);
    const size_t M = 32, N = 5;
    nn::Tensor w = random_tensor({M, N}, rng, -1, 1);
    nn::Tensor b = random_tensor({N}, rng, -1, 1);

    for (auto kind : {FcPackingKind::naive, FcPackingKind::diagonal}) {
        for (double p : {0.0, 0.4, 1.0}) {
            size_t groups = pack::layout_polynomial_count(M, N, kind);
            auto plan = plan_for(pack::fc_kind_scheme(kind), groups, p, true, 5);

            auto packed_e = pack::pack_fc(exact, w, b, kind, plan, EvalMode::relin_only);
            auto in_e = pack::pack_fc_input(exact, std::vector<double>(M, 0.5), kind);
            auto r_e = pack::eval_fc_he(exact, packed_e, in_e);

            auto packed_c = pack::pack_fc(cost, w, b, kind, plan, EvalMode::relin_only);
            auto in_c = pack::pack_fc_input(cost, std::vector<double>(M, 0.5), kind);
            auto r_c = pack::eval_fc_he(cost, packed_c, in_c);

            INFO("kind=" << pack::fc_kind_name(kind) << " p=" << p);
            REQUIRE(r_e.ops.counters_equal(r_c.ops));
            REQUIRE(r_c.ops.estimated_time > 0.0);
        }
    }
}

TEST_CASE("cost backend estimated time is strictly increasing in p") {
    he::CostBackend cost(he::CkksParams::preset_4096(), he::CostTable::paper_default_4096());
    std::mt19937_64 rng(41);
    nn::Tensor w = random_tensor({64, 10}, rng, -1, 1);
    nn::Tensor b = random_tensor({10}, rng, -1, 1);
    double last = -1.0;
    for (int pi = 0; pi <= 10; ++pi) {
        auto plan = plan_for(leak::GroupScheme::fc_naive_rows, 10, pi / 10.0, true, 2);
        cost.reset_ledger();
        auto packed = pack::pack_fc(cost, w, b, FcPackingKind::naive, plan, EvalMode::relin_only);
        auto in = pack::pack_fc_input(cost, std::vector<double>(64, 1.0), FcPackingKind::naive);
        auto r = pack::eval_fc_he(cost, packed, in);
        REQUIRE(r.ops.estimated_time > last);
        last = r.ops.estimated_time;
    }
}

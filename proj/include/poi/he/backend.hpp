// Copyright (c) 2026 the poi authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <concepts>
#include <cstdint>
#include <random>
#include <vector>

#include "poi/he/ckks.hpp"
#include "poi/he/ledger.hpp"

namespace poi::he {

// Contract shared by the exact CKKS backend and its cost-model twin: the
// packed-layer evaluator is written once against this surface.
template <typename B>
concept HeBackend = requires(B b, const typename B::Pt& pt, const typename B::Ct& ct,
                             std::vector<double> v, size_t lvl, double sc, size_t step) {
    { b.slot_count() } -> std::convertible_to<size_t>;
    { b.top_level() } -> std::convertible_to<size_t>;
    { b.default_scale() } -> std::convertible_to<double>;
    { b.scale_after_mul_rescale() } -> std::convertible_to<double>;
    { b.encode(v, lvl, sc) } -> std::same_as<typename B::Pt>;
    { b.encode_broadcast(0.0, lvl, sc) } -> std::same_as<typename B::Pt>;
    { b.encrypt(pt) } -> std::same_as<typename B::Ct>;
    { b.add_pt(ct, pt) } -> std::same_as<typename B::Ct>;
    { b.add_ct(ct, ct) } -> std::same_as<typename B::Ct>;
    { b.mul_pt(ct, pt) } -> std::same_as<typename B::Ct>;
    { b.mul_ct(ct, ct) } -> std::same_as<typename B::Ct>;
    { b.relinearize(ct) } -> std::same_as<typename B::Ct>;
    { b.rescale(ct) } -> std::same_as<typename B::Ct>;
    { b.rotate(ct, step) } -> std::same_as<typename B::Ct>;
    { b.ensure_rotation_keys(std::vector<size_t>{}) };
    { b.decrypt_values(ct) } -> std::same_as<std::vector<double>>;
    { b.ledger() } -> std::convertible_to<const OpLedger&>;
};

// Exact arithmetic backend: wraps the CKKS engine, counts every evaluation
// operation in a ledger, and owns the encryption randomness stream.
class ExactBackend {
public:
    using Ct = Ciphertext;
    using Pt = Plaintext;

    ExactBackend(const CkksParams& params, uint64_t seed)
        : engine_(params, seed), enc_rng_(seed ^ 0x9e3779b97f4a7c15ull) {}

    size_t slot_count() const { return engine_.slot_count(); }
    size_t top_level() const { return engine_.top_level(); }
    double default_scale() const { return engine_.default_scale(); }
    // Scale of a product after one rescale from the top level.
    double scale_after_mul_rescale() const {
        const auto& params = engine_.params();
        if (params.depth == 0) throw std::logic_error("scale_after_mul_rescale: depth 0");
        return params.scale * params.scale /
               static_cast<double>(params.modulus_chain[params.depth]);
    }
    const CkksEngine& engine() const { return engine_; }

    Pt encode(const std::vector<double>& v, size_t level, double scale) const {
        return engine_.encode(v, level, scale);
    }
    Pt encode_broadcast(double v, size_t level, double scale) const {
        return engine_.encode_broadcast(v, level, scale);
    }
    Ct encrypt(const Pt& pt) { return engine_.encrypt(pt, enc_rng_); }
    std::vector<double> decrypt_values(const Ct& ct) const { return engine_.decrypt_values(ct); }

    Ct add_pt(const Ct& ct, const Pt& pt) {
        ++ledger_.pt_adds;
        return engine_.add_pt(ct, pt);
    }
    Ct add_ct(const Ct& a, const Ct& b) {
        ++ledger_.ct_adds;
        return engine_.add_ct(a, b);
    }
    Ct mul_pt(const Ct& ct, const Pt& pt) {
        ++ledger_.plain_mults;
        return engine_.mul_pt(ct, pt);
    }
    Ct mul_ct(const Ct& a, const Ct& b) {
        ++ledger_.ciph_mults;
        return engine_.mul_ct(a, b);
    }
    Ct relinearize(const Ct& ct) {
        ++ledger_.relins;
        return engine_.relinearize(ct);
    }
    Ct rescale(const Ct& ct) {
        ++ledger_.rescales;
        return engine_.rescale(ct);
    }
    Ct rotate(const Ct& ct, size_t step) {
        if (step % slot_count() == 0) return ct;
        ++ledger_.rotations;
        return engine_.rotate(ct, step);
    }
    Ct refresh(const Ct& ct) {
        ++ledger_.refreshes;
        return engine_.refresh(ct, enc_rng_);
    }

    double noise_budget(const Ct& ct) const { return engine_.noise_budget(ct); }
    void ensure_rotation_keys(const std::vector<size_t>& steps) {
        engine_.ensure_rotation_keys(steps);
    }

    OpLedger& ledger() { return ledger_; }
    const OpLedger& ledger() const { return ledger_; }
    void reset_ledger() { ledger_ = OpLedger{}; }

private:
    CkksEngine engine_;
    std::mt19937_64 enc_rng_;
    OpLedger ledger_;
};

static_assert(HeBackend<ExactBackend>);

}  // namespace poi::he

// Copyright (c) 2026 the poi authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "poi/he/backend.hpp"
#include "poi/he/cost_table.hpp"
#include "poi/he/ledger.hpp"
#include "poi/he/params.hpp"

namespace poi::he {

// Symbolic twin of the exact backend: no arithmetic, only ledger counting
// and accumulated time in plain-multiplication units.  Ciphertexts carry
// just enough state (level, scale, size) to enforce the same preconditions
// the exact backend enforces.
class CostBackend {
public:
    struct Pt {
        size_t level = 0;
        double scale = 0.0;
    };
    struct Ct {
        size_t level = 0;
        double scale = 0.0;
        size_t size = 2;
    };

    CostBackend(const CkksParams& params, CostTable table)
        : params_(params), table_(std::move(table)) {
        params_.validate();
        table_.validate();
    }

    size_t slot_count() const { return params_.slot_count(); }
    size_t top_level() const { return params_.depth; }
    double default_scale() const { return params_.scale; }
    double scale_after_mul_rescale() const {
        if (params_.depth == 0) throw std::logic_error("scale_after_mul_rescale: depth 0");
        return params_.scale * params_.scale /
               static_cast<double>(params_.modulus_chain[params_.depth]);
    }
    const CostTable& table() const { return table_; }

    Pt encode(const std::vector<double>& v, size_t level, double scale) const {
        if (v.size() > slot_count()) throw std::invalid_argument("encode: too many values");
        return {level, scale};
    }
    Pt encode_broadcast(double, size_t level, double scale) const { return {level, scale}; }
    Ct encrypt(const Pt& pt) { return {pt.level, pt.scale, 2}; }

    // The cost twin has nothing to decrypt; evaluations are compared by ledger.
    std::vector<double> decrypt_values(const Ct&) const { return {}; }

    Ct add_pt(const Ct& ct, const Pt& pt) {
        require(ct.size == 2, "add_pt: size 2 required");
        require(ct.level == pt.level, "add_pt: level mismatch");
        ++ledger_.pt_adds;
        return ct;
    }
    Ct add_ct(const Ct& a, const Ct& b) {
        require(a.size == 2 && b.size == 2, "add_ct: size 2 required");
        require(a.level == b.level, "add_ct: level mismatch");
        ++ledger_.ct_adds;
        return a;
    }
    Ct mul_pt(const Ct& ct, const Pt& pt) {
        require(ct.size == 2, "mul_pt: size 2 required");
        require(ct.level == pt.level, "mul_pt: level mismatch");
        ++ledger_.plain_mults;
        ledger_.estimated_time += table_.plain_mult;
        return {ct.level, ct.scale * pt.scale, 2};
    }
    Ct mul_ct(const Ct& a, const Ct& b) {
        require(a.size == 2 && b.size == 2, "mul_ct: size 2 required");
        require(a.level == b.level, "mul_ct: level mismatch");
        ++ledger_.ciph_mults;
        ledger_.estimated_time += table_.ciph_mult;
        return {a.level, a.scale * b.scale, 3};
    }
    Ct relinearize(const Ct& ct) {
        require(ct.size == 3, "relinearize: size 3 required");
        ++ledger_.relins;
        ledger_.estimated_time += table_.relinearization;
        return {ct.level, ct.scale, 2};
    }
    Ct rescale(const Ct& ct) {
        require(ct.size == 2, "rescale: size 2 required");
        if (ct.level == 0) throw std::runtime_error("rescale: level 0 reached");
        ++ledger_.rescales;
        ledger_.estimated_time += table_.rescale;
        double dropped = static_cast<double>(params_.modulus_chain[ct.level]);
        return {ct.level - 1, ct.scale / dropped, 2};
    }
    Ct rotate(const Ct& ct, size_t step) {
        require(ct.size == 2, "rotate: size 2 required");
        if (step % slot_count() == 0) return ct;
        ++ledger_.rotations;
        return ct;
    }
    Ct refresh(const Ct& ct) {
        ++ledger_.refreshes;
        return {top_level(), default_scale(), 2};
    }

    void ensure_rotation_keys(const std::vector<size_t>&) {}
    double noise_budget(const Ct&) const { return 1.0; }

    OpLedger& ledger() { return ledger_; }
    const OpLedger& ledger() const { return ledger_; }
    void reset_ledger() { ledger_ = OpLedger{}; }

private:
    static void require(bool ok, const char* msg) {
        if (!ok) throw std::logic_error(msg);
    }

    CkksParams params_;
    CostTable table_;
    OpLedger ledger_;
};

static_assert(HeBackend<CostBackend>);

}  // namespace poi::he

// Copyright (c) 2026 the poi authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0
//
// Host calibration of the relative CKKS operation costs, overhead-factor
// grids for partially encrypted layers, and the four-input bilinear cost
// fixture.

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "poi/he/backend.hpp"
#include "poi/he/cost_table.hpp"
#include "poi/packing.hpp"

namespace poi::bench {

// Multiplication-phase time of a ledger in plain-mult units.
inline double estimated_time(const he::OpLedger& l, const he::CostTable& t) {
    return static_cast<double>(l.plain_mults) * t.plain_mult +
           static_cast<double>(l.ciph_mults) * t.ciph_mult +
           static_cast<double>(l.relins) * t.relinearization +
           static_cast<double>(l.rescales) * t.rescale;
}

// Measures the four multiplication-related operations on this host and
// normalizes them to the plaintext multiplication.  Median of `repetitions`
// timings, warm-up discarded.
inline he::CostTable calibrate(he::ExactBackend& backend, size_t repetitions) {
    if (repetitions < 30)
        throw std::invalid_argument("calibrate: at least 30 repetitions required");

    using Clock = std::chrono::steady_clock;
    size_t top = backend.top_level();
    double scale = backend.default_scale();
    std::vector<double> values(backend.slot_count(), 1.25);
    auto pt = backend.encode(values, top, scale);
    auto ct = backend.encrypt(pt);
    auto ct2 = backend.encrypt(pt);
    auto ct3 = backend.mul_ct(ct, ct2);  // size-3 relinearization input
    auto product = backend.mul_pt(ct, pt);  // rescalable input

    auto median_time = [&](auto&& op) {
        for (int warm = 0; warm < 3; ++warm) op();
        std::vector<double> times(repetitions);
        for (size_t r = 0; r < repetitions; ++r) {
            auto t0 = Clock::now();
            op();
            times[r] = std::chrono::duration<double>(Clock::now() - t0).count();
        }
        std::nth_element(times.begin(), times.begin() + repetitions / 2, times.end());
        return times[repetitions / 2];
    };

    double plain = median_time([&] { backend.mul_pt(ct, pt); });
    double ciph = median_time([&] { backend.mul_ct(ct, ct2); });
    double relin = median_time([&] { backend.relinearize(ct3); });
    double rescale = median_time([&] { backend.rescale(product); });
    backend.reset_ledger();  // calibration ops are not part of any evaluation

    // steady_clock tick estimate
    double tick = 1e9;
    for (int i = 0; i < 64; ++i) {
        auto t0 = Clock::now();
        Clock::time_point t1;
        do { t1 = Clock::now(); } while (t1 == t0);
        tick = std::min(tick, std::chrono::duration<double>(t1 - t0).count());
    }
    if (plain < 10.0 * tick)
        throw std::runtime_error("calibrate: timer resolution too coarse for this ring degree");

    he::CostTable table;
    table.plain_mult = 1.0;
    table.ciph_mult = ciph / plain;
    table.rescale = rescale / plain;
    table.relinearization = relin / plain;
    std::time_t now = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    table.provenance = "measured(n_ring=" + std::to_string(2 * backend.slot_count()) + "," +
                       buf + ")";
    table.validate();
    return table;
}

// ---- overhead factors --------------------------------------------------------

struct OverheadPoint {
    double p = 0.0;
    he::OpLedger ops;
    double factor = 1.0;
};

struct OverheadReport {
    std::string layer;
    pack::EvalMode mode = pack::EvalMode::relin_only;
    he::CostTable table;
    std::vector<OverheadPoint> points;

    double factor_at(double p) const {
        for (const auto& pt : points)
            if (std::abs(pt.p - p) < 1e-9) return pt.factor;
        throw std::invalid_argument("factor_at: p not on the report grid");
    }
};

inline OverheadReport overhead_factor_fc(size_t M, size_t N, pack::FcPackingKind kind,
                                         const std::vector<double>& grid,
                                         const he::CostTable& table, pack::EvalMode mode) {
    table.validate();
    OverheadReport rep;
    rep.layer = pack::fc_kind_name(kind) + "_fc(" + std::to_string(M) + "x" + std::to_string(N) + ")";
    rep.mode = mode;
    rep.table = table;
    double base = estimated_time(pack::predicted_fc_ops(M, N, kind, 0.0, mode), table);
    for (double p : grid) {
        if (p < 0.0 || p > 1.0) throw std::invalid_argument("overhead_factor: p outside [0,1]");
        OverheadPoint pt;
        pt.p = p;
        pt.ops = pack::predicted_fc_ops(M, N, kind, p, mode);
        pt.factor = estimated_time(pt.ops, table) / base;
        rep.points.push_back(pt);
    }
    return rep;
}

inline OverheadReport overhead_factor_conv(const pack::ConvDims& dims, leak::GroupScheme gran,
                                           const std::vector<double>& grid,
                                           const he::CostTable& table, pack::EvalMode mode) {
    table.validate();
    OverheadReport rep;
    rep.layer = "conv" + std::to_string(dims.kernel) + "x" + std::to_string(dims.kernel) + "(" +
                std::to_string(dims.in_channels) + "ch_" + std::to_string(dims.out_channels) +
                "f_" + std::to_string(dims.height) + "x" + std::to_string(dims.width) + ")";
    rep.mode = mode;
    rep.table = table;
    double base = estimated_time(pack::predicted_conv_ops(dims, gran, 0.0, mode), table);
    for (double p : grid) {
        if (p < 0.0 || p > 1.0) throw std::invalid_argument("overhead_factor: p outside [0,1]");
        OverheadPoint pt;
        pt.p = p;
        pt.ops = pack::predicted_conv_ops(dims, gran, p, mode);
        pt.factor = estimated_time(pt.ops, table) / base;
        rep.points.push_back(pt);
    }
    return rep;
}

// Ratio of the overhead factors at two grid points.
inline double speedup_summary(const OverheadReport& rep, double p_high, double p_low) {
    return rep.factor_at(p_high) / rep.factor_at(p_low);
}

// ---- the bilinear example f(x,y,z,w) = x*y + z*w ------------------------------

enum class BilinearInput { x, y, z, w };

// HE evaluation operations needed when the `leaked` inputs are plaintexts.
// Counts the evaluation-operation classes only (a plaintext-plaintext
// product is free, and no relinearization bookkeeping is included).
inline he::OpLedger count_bilinear(const std::set<BilinearInput>& leaked) {
    auto is_leaked = [&](BilinearInput i) { return leaked.count(i) > 0; };
    he::OpLedger l;
    // term kind: 0 = plaintext value, 1 = ciphertext product
    auto term = [&](BilinearInput a, BilinearInput b) {
        int known = (is_leaked(a) ? 1 : 0) + (is_leaked(b) ? 1 : 0);
        if (known == 2) return 0;  // free plaintext product
        if (known == 1)
            ++l.plain_mults;
        else
            ++l.ciph_mults;
        return 1;
    };
    int t1 = term(BilinearInput::x, BilinearInput::y);
    int t2 = term(BilinearInput::z, BilinearInput::w);
    if (t1 == 1 && t2 == 1)
        ++l.ct_adds;
    else if (t1 == 1 || t2 == 1)
        ++l.pt_adds;
    return l;
}

// ---- CSV ----------------------------------------------------------------------

inline std::string cost_table_csv(const he::CostTable& t) {
    std::ostringstream os;
    os << "operation,unit_cost,provenance\n";
    os << "plain_mult," << t.plain_mult << "," << t.provenance << "\n";
    os << "ciph_mult," << t.ciph_mult << "," << t.provenance << "\n";
    os << "rescale," << t.rescale << "," << t.provenance << "\n";
    os << "relinearization," << t.relinearization << "," << t.provenance << "\n";
    return os.str();
}

inline std::string overhead_csv(const OverheadReport& rep) {
    std::ostringstream os;
    os << "layer,mode,p,plain_mults,ciph_mults,relins,rescales,factor\n";
    for (const auto& pt : rep.points) {
        os << rep.layer << "," << (rep.mode == pack::EvalMode::relin_only ? "relin-only" : "rescale-all")
           << "," << pt.p << "," << pt.ops.plain_mults << "," << pt.ops.ciph_mults << ","
           << pt.ops.relins << "," << pt.ops.rescales << "," << pt.factor << "\n";
    }
    return os.str();
}

}  // namespace poi::bench

// Copyright (c) 2026 the poi authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <sstream>
#include <string>

namespace poi::he {

// Counts of the HE evaluation operations an evaluation performed, plus the
// cost model's accumulated time in plain-multiplication units.
struct OpLedger {
    uint64_t plain_mults = 0;
    uint64_t ciph_mults = 0;
    uint64_t relins = 0;
    uint64_t rescales = 0;
    uint64_t rotations = 0;
    uint64_t pt_adds = 0;
    uint64_t ct_adds = 0;
    uint64_t refreshes = 0;
    double estimated_time = 0.0;

    OpLedger& merge(const OpLedger& o) {
        plain_mults += o.plain_mults;
        ciph_mults += o.ciph_mults;
        relins += o.relins;
        rescales += o.rescales;
        rotations += o.rotations;
        pt_adds += o.pt_adds;
        ct_adds += o.ct_adds;
        refreshes += o.refreshes;
        estimated_time += o.estimated_time;
        return *this;
    }

    // Difference of two snapshots of the same monotone ledger.
    OpLedger since(const OpLedger& before) const {
        OpLedger d;
        d.plain_mults = plain_mults - before.plain_mults;
        d.ciph_mults = ciph_mults - before.ciph_mults;
        d.relins = relins - before.relins;
        d.rescales = rescales - before.rescales;
        d.rotations = rotations - before.rotations;
        d.pt_adds = pt_adds - before.pt_adds;
        d.ct_adds = ct_adds - before.ct_adds;
        d.refreshes = refreshes - before.refreshes;
        d.estimated_time = estimated_time - before.estimated_time;
        return d;
    }

    bool counters_equal(const OpLedger& o) const {
        return plain_mults == o.plain_mults && ciph_mults == o.ciph_mults && relins == o.relins &&
               rescales == o.rescales && rotations == o.rotations && pt_adds == o.pt_adds &&
               ct_adds == o.ct_adds && refreshes == o.refreshes;
    }

    std::string to_string() const {
        std::ostringstream os;
        os << "plain_mults=" << plain_mults << " ciph_mults=" << ciph_mults
           << " relins=" << relins << " rescales=" << rescales << " rotations=" << rotations
           << " pt_adds=" << pt_adds << " ct_adds=" << ct_adds << " refreshes=" << refreshes;
        return os.str();
    }
};

}  // namespace poi::he

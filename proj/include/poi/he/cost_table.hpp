// Copyright (c) 2026 the poi authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace poi::he {

// Relative runtime of the multiplication-related CKKS operations,
// normalized so one plaintext multiplication costs 1.
struct CostTable {
    double plain_mult = 1.0;
    double ciph_mult = 0.0;
    double rescale = 0.0;
    double relinearization = 0.0;
    std::string provenance;

    void validate() const {
        if (plain_mult != 1.0)
            throw std::invalid_argument("CostTable: plain_mult must be 1 by construction");
        if (ciph_mult <= 0 || rescale <= 0 || relinearization <= 0)
            throw std::invalid_argument("CostTable: all unit costs must be positive");
    }

    // Published SEAL measurements for the three (ring degree, depth)
    // benchmark columns, renormalized to their own plaintext multiplication.
    static CostTable paper_default_4096() {
        return {1.0, 2.7, 7.6, 16.1, "paper-default(4096,2)"};
    }
    static CostTable paper_default_8192() {
        return {1.0, 12.3 / 4.0, 38.5 / 4.0, 80.0 / 4.0, "paper-default(8192,4)"};
    }
    static CostTable paper_default_16384() {
        return {1.0, 60.0 / 16.0, 175.7 / 16.0, 477.0 / 16.0, "paper-default(16384,8)"};
    }
};

}  // namespace poi::he

// Copyright (c) 2026 the poi authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "poi/he/modarith.hpp"

namespace poi::he {

// Minimal unsigned big integer (little-endian 64-bit limbs).  Only the
// handful of operations CRT reconstruction needs.
class BigUInt {
public:
    BigUInt() : limbs_(1, 0) {}
    explicit BigUInt(uint64_t v) : limbs_(1, v) {}

    static BigUInt product(const std::vector<uint64_t>& factors) {
        BigUInt r(1);
        for (uint64_t f : factors) r = r.mul_u64(f);
        return r;
    }

    BigUInt mul_u64(uint64_t m) const {
        BigUInt r;
        r.limbs_.assign(limbs_.size() + 1, 0);
        uint64_t carry = 0;
        for (size_t i = 0; i < limbs_.size(); ++i) {
            __uint128_t t = static_cast<__uint128_t>(limbs_[i]) * m + carry;
            r.limbs_[i] = static_cast<uint64_t>(t);
            carry = static_cast<uint64_t>(t >> 64);
        }
        r.limbs_.back() = carry;
        r.trim();
        return r;
    }

    void add_assign(const BigUInt& o) {
        if (o.limbs_.size() > limbs_.size()) limbs_.resize(o.limbs_.size(), 0);
        uint64_t carry = 0;
        for (size_t i = 0; i < limbs_.size(); ++i) {
            uint64_t other = i < o.limbs_.size() ? o.limbs_[i] : 0;
            __uint128_t t = static_cast<__uint128_t>(limbs_[i]) + other + carry;
            limbs_[i] = static_cast<uint64_t>(t);
            carry = static_cast<uint64_t>(t >> 64);
        }
        if (carry) limbs_.push_back(carry);
    }

    // requires *this >= o
    void sub_assign(const BigUInt& o) {
        uint64_t borrow = 0;
        for (size_t i = 0; i < limbs_.size(); ++i) {
            uint64_t b = i < o.limbs_.size() ? o.limbs_[i] : 0;
            uint64_t cur = limbs_[i];
            uint64_t r = cur - b - borrow;
            borrow = (cur < b + borrow || (b + borrow < b)) ? 1 : 0;
            limbs_[i] = r;
        }
        trim();
    }

    int compare(const BigUInt& o) const {
        size_t a = limbs_.size(), b = o.limbs_.size();
        size_t m = a > b ? a : b;
        for (size_t i = m; i-- > 0;) {
            uint64_t x = i < a ? limbs_[i] : 0;
            uint64_t y = i < b ? o.limbs_[i] : 0;
            if (x != y) return x < y ? -1 : 1;
        }
        return 0;
    }

    bool is_half_exceeded_by(const BigUInt& value) const {
        // value > this/2  <=>  2*value > this
        BigUInt twice = value.mul_u64(2);
        return twice.compare(*this) > 0;
    }

    long double to_long_double() const {
        long double r = 0.0L;
        for (size_t i = limbs_.size(); i-- > 0;) r = r * 18446744073709551616.0L + limbs_[i];
        return r;
    }

private:
    void trim() {
        while (limbs_.size() > 1 && limbs_.back() == 0) limbs_.pop_back();
    }
    std::vector<uint64_t> limbs_;
};

// Centered CRT lift: residues r_i mod primes q_i -> signed value in
// (-Q/2, Q/2] returned as long double.
inline long double crt_lift_centered(const std::vector<uint64_t>& residues,
                                     const std::vector<uint64_t>& primes,
                                     const BigUInt& q_total,
                                     const std::vector<BigUInt>& q_over_qi,
                                     const std::vector<uint64_t>& q_over_qi_inv) {
    BigUInt acc;
    for (size_t i = 0; i < primes.size(); ++i) {
        uint64_t t = mul_mod(residues[i], q_over_qi_inv[i], primes[i]);
        acc.add_assign(q_over_qi[i].mul_u64(t));
    }
    while (acc.compare(q_total) >= 0) acc.sub_assign(q_total);
    if (q_total.is_half_exceeded_by(acc)) {
        BigUInt neg = q_total;
        neg.sub_assign(acc);
        return -neg.to_long_double();
    }
    return acc.to_long_double();
}

}  // namespace poi::he

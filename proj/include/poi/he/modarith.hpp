// Copyright (c) 2026 the poi authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace poi::he {

inline uint64_t add_mod(uint64_t a, uint64_t b, uint64_t q) {
    uint64_t s = a + b;
    return s >= q ? s - q : s;
}

inline uint64_t sub_mod(uint64_t a, uint64_t b, uint64_t q) {
    return a >= b ? a - b : a + q - b;
}

inline uint64_t neg_mod(uint64_t a, uint64_t q) {
    return a == 0 ? 0 : q - a;
}

inline uint64_t mul_mod(uint64_t a, uint64_t b, uint64_t q) {
    return static_cast<uint64_t>((static_cast<__uint128_t>(a) * b) % q);
}

// Shoup-style multiplication by a constant w with precomputed
// w_shoup = floor(w * 2^64 / q).  Requires q < 2^63.
inline uint64_t shoup_precompute(uint64_t w, uint64_t q) {
    return static_cast<uint64_t>((static_cast<__uint128_t>(w) << 64) / q);
}

inline uint64_t mul_mod_shoup(uint64_t x, uint64_t w, uint64_t w_shoup, uint64_t q) {
    uint64_t hi = static_cast<uint64_t>((static_cast<__uint128_t>(x) * w_shoup) >> 64);
    uint64_t r = x * w - hi * q;
    return r >= q ? r - q : r;
}

// Barrett reduction of 64-bit values by a fixed modulus q < 2^63.
struct BarrettMod {
    uint64_t q = 0;
    uint64_t magic = 0;  // floor(2^64 / q)

    BarrettMod() = default;
    explicit BarrettMod(uint64_t q_) : q(q_), magic(~uint64_t{0} / q_) {}

    uint64_t reduce(uint64_t x) const {
        uint64_t t = static_cast<uint64_t>((static_cast<__uint128_t>(x) * magic) >> 64);
        uint64_t r = x - t * q;
        while (r >= q) r -= q;
        return r;
    }
};

inline uint64_t pow_mod(uint64_t base, uint64_t exp, uint64_t q) {
    uint64_t result = 1;
    base %= q;
    while (exp > 0) {
        if (exp & 1) result = mul_mod(result, base, q);
        base = mul_mod(base, base, q);
        exp >>= 1;
    }
    return result;
}

inline uint64_t inv_mod(uint64_t a, uint64_t q) {
    // q prime
    if (a == 0) throw std::domain_error("inv_mod: zero has no inverse");
    return pow_mod(a, q - 2, q);
}

// Deterministic Miller-Rabin, valid for all 64-bit integers.
inline bool is_prime(uint64_t n) {
    if (n < 2) return false;
    for (uint64_t p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        if (n == p) return true;
        if (n % p == 0) return false;
    }
    uint64_t d = n - 1;
    int s = 0;
    while ((d & 1) == 0) { d >>= 1; ++s; }
    for (uint64_t a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        uint64_t x = pow_mod(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool witness = true;
        for (int r = 1; r < s; ++r) {
            x = mul_mod(x, x, n);
            if (x == n - 1) { witness = false; break; }
        }
        if (witness) return false;
    }
    return true;
}

// Largest primes of the requested bit size congruent to 1 mod `modulus`,
// skipping any in `exclude`.  Used to build NTT-friendly modulus chains.
inline uint64_t find_ntt_prime(int bits, uint64_t modulus, const std::vector<uint64_t>& exclude) {
    if (bits < 2 || bits > 62) throw std::invalid_argument("find_ntt_prime: bits out of range");
    uint64_t hi = (bits == 63) ? ~0ull : ((1ull << bits) - 1);
    uint64_t lo = 1ull << (bits - 1);
    // largest candidate <= hi with candidate % modulus == 1
    uint64_t c = hi - ((hi - 1) % modulus);
    for (; c > lo; c -= modulus) {
        if (!is_prime(c)) continue;
        bool skip = false;
        for (uint64_t e : exclude)
            if (e == c) { skip = true; break; }
        if (!skip) return c;
    }
    throw std::runtime_error("find_ntt_prime: no prime of requested size");
}

// Primitive 2n-th root of unity mod q (q ≡ 1 mod 2n, n a power of two).
// A candidate x^((q-1)/2n) has order exactly 2n iff its n-th power is -1.
inline uint64_t find_primitive_root(uint64_t q, uint64_t two_n) {
    if ((q - 1) % two_n != 0) throw std::invalid_argument("find_primitive_root: q != 1 mod 2n");
    uint64_t exp = (q - 1) / two_n;
    for (uint64_t x = 2; x < q; ++x) {
        uint64_t cand = pow_mod(x, exp, q);
        if (pow_mod(cand, two_n / 2, q) == q - 1) return cand;
    }
    throw std::runtime_error("find_primitive_root: none found");
}

}  // namespace poi::he

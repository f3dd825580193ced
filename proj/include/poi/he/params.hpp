// Copyright (c) 2026 the poi authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "poi/he/modarith.hpp"

namespace poi::he {

// Maximum total coefficient-modulus bits for 128-bit classical security,
// per the homomorphic encryption standard's parameter tables.
inline int max_modulus_bits_128(size_t ring_degree) {
    switch (ring_degree) {
        case 1024: return 27;
        case 2048: return 54;
        case 4096: return 109;
        case 8192: return 218;
        case 16384: return 438;
        case 32768: return 881;
        default: return -1;
    }
}

// CKKS parameter set.  The modulus chain holds depth+2 NTT-friendly primes:
// a base prime q_0, `depth` rescaling primes sized near the scale, and one
// key-switching prime at the end that never carries ciphertext data.
struct CkksParams {
    size_t ring_degree = 0;               // n, power of two
    std::vector<uint64_t> modulus_chain;  // q_0 .. q_depth, p_keyswitch
    double scale = 0.0;                   // Δ, power of two
    double error_stddev = 3.2;            // discrete Gaussian σ
    size_t depth = 0;                     // multiplicative depth L

    size_t slot_count() const { return ring_degree / 2; }
    size_t data_prime_count() const { return depth + 1; }

    int total_modulus_bits() const {
        double bits = 0;
        for (uint64_t q : modulus_chain) bits += std::log2(static_cast<double>(q));
        return static_cast<int>(std::ceil(bits));
    }

    void validate() const {
        if (ring_degree < 2 || (ring_degree & (ring_degree - 1)) != 0)
            throw std::invalid_argument("CkksParams: ring_degree must be a power of two");
        if (modulus_chain.size() != depth + 2)
            throw std::invalid_argument("CkksParams: modulus chain must have depth+2 primes");
        if (scale <= 0 || std::log2(scale) != std::floor(std::log2(scale)))
            throw std::invalid_argument("CkksParams: scale must be a positive power of two");
        for (size_t i = 0; i < modulus_chain.size(); ++i) {
            uint64_t q = modulus_chain[i];
            if (!is_prime(q) || (q - 1) % (2 * ring_degree) != 0)
                throw std::invalid_argument("CkksParams: chain primes must be NTT-friendly (1 mod 2n)");
            for (size_t j = i + 1; j < modulus_chain.size(); ++j)
                if (modulus_chain[j] == q)
                    throw std::invalid_argument("CkksParams: chain primes must be distinct");
        }
        int bound = max_modulus_bits_128(ring_degree);
        if (bound < 0)
            throw std::invalid_argument("CkksParams: no 128-bit security bound for this ring degree");
        if (total_modulus_bits() > bound)
            throw std::invalid_argument(
                "CkksParams: modulus chain (" + std::to_string(total_modulus_bits()) +
                " bits) exceeds the 128-bit security bound (" + std::to_string(bound) +
                " bits) for ring degree " + std::to_string(ring_degree));
    }

    // Builds a chain of [q0_bits, scale_bits x depth, special_bits] primes.
    static CkksParams build(size_t ring_degree, size_t depth, int scale_bits, int q0_bits,
                            int special_bits) {
        CkksParams p;
        p.ring_degree = ring_degree;
        p.depth = depth;
        p.scale = std::pow(2.0, scale_bits);
        uint64_t m = 2 * static_cast<uint64_t>(ring_degree);
        auto push = [&](int bits) {
            p.modulus_chain.push_back(find_ntt_prime(bits, m, p.modulus_chain));
        };
        push(q0_bits);
        for (size_t i = 0; i < depth; ++i) push(scale_bits);
        push(special_bits);
        p.validate();
        return p;
    }

    // Parameter presets mirroring the three benchmark columns
    // (ring degree, depth) = (2^12, 2), (2^13, 4), (2^14, 8).
    static CkksParams preset_4096() { return build(4096, 2, 23, 28, 35); }
    static CkksParams preset_8192() { return build(8192, 4, 33, 43, 43); }
    static CkksParams preset_16384() { return build(16384, 8, 40, 60, 58); }

    // Wide-headroom set used for numeric accuracy work: Δ=2^40 at n=2^13.
    static CkksParams accuracy_8192() { return build(8192, 2, 40, 60, 58); }
};

}  // namespace poi::he

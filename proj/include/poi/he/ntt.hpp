// Copyright (c) 2026 the poi authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "poi/he/modarith.hpp"

namespace poi::he {

// Negacyclic number-theoretic transform over Z_q[X]/(X^n + 1) for one
// word-sized prime q ≡ 1 mod 2n.  The forward transform leaves values in
// bit-reversed order; the inverse consumes that order, so pointwise
// products compose without explicit reordering.
class NttTable {
public:
    NttTable() = default;

    NttTable(size_t n, uint64_t q) : n_(n), q_(q) {
        size_t log_n = 0;
        while ((size_t(1) << log_n) < n) ++log_n;
        if ((size_t(1) << log_n) != n) throw std::invalid_argument("NttTable: n must be a power of two");

        uint64_t psi = find_primitive_root(q, 2 * n);
        uint64_t psi_inv = inv_mod(psi, q);
        n_inv_ = inv_mod(static_cast<uint64_t>(n), q);
        n_inv_shoup_ = shoup_precompute(n_inv_, q);

        psi_brev_.resize(n);
        psi_brev_shoup_.resize(n);
        ipsi_brev_.resize(n);
        ipsi_brev_shoup_.resize(n);

        uint64_t power = 1, ipower = 1;
        for (size_t i = 0; i < n; ++i) {
            size_t rev = bit_reverse(i, log_n);
            psi_brev_[rev] = power;
            ipsi_brev_[rev] = ipower;
            power = mul_mod(power, psi, q);
            ipower = mul_mod(ipower, psi_inv, q);
        }
        for (size_t i = 0; i < n; ++i) {
            psi_brev_shoup_[i] = shoup_precompute(psi_brev_[i], q);
            ipsi_brev_shoup_[i] = shoup_precompute(ipsi_brev_[i], q);
        }
    }

    size_t n() const { return n_; }
    uint64_t q() const { return q_; }

    void forward(uint64_t* a) const {
        size_t t = n_;
        for (size_t m = 1; m < n_; m <<= 1) {
            t >>= 1;
            for (size_t i = 0; i < m; ++i) {
                uint64_t w = psi_brev_[m + i];
                uint64_t ws = psi_brev_shoup_[m + i];
                size_t j1 = 2 * i * t;
                for (size_t j = j1; j < j1 + t; ++j) {
                    uint64_t u = a[j];
                    uint64_t v = mul_mod_shoup(a[j + t], w, ws, q_);
                    a[j] = add_mod(u, v, q_);
                    a[j + t] = sub_mod(u, v, q_);
                }
            }
        }
    }

    void inverse(uint64_t* a) const {
        size_t t = 1;
        for (size_t m = n_; m > 1; m >>= 1) {
            size_t j1 = 0;
            size_t h = m >> 1;
            for (size_t i = 0; i < h; ++i) {
                uint64_t w = ipsi_brev_[h + i];
                uint64_t ws = ipsi_brev_shoup_[h + i];
                for (size_t j = j1; j < j1 + t; ++j) {
                    uint64_t u = a[j];
                    uint64_t v = a[j + t];
                    a[j] = add_mod(u, v, q_);
                    a[j + t] = mul_mod_shoup(sub_mod(u, v, q_), w, ws, q_);
                }
                j1 += 2 * t;
            }
            t <<= 1;
        }
        for (size_t j = 0; j < n_; ++j) a[j] = mul_mod_shoup(a[j], n_inv_, n_inv_shoup_, q_);
    }

private:
    static size_t bit_reverse(size_t x, size_t bits) {
        size_t r = 0;
        for (size_t i = 0; i < bits; ++i) {
            r = (r << 1) | (x & 1);
            x >>= 1;
        }
        return r;
    }

    size_t n_ = 0;
    uint64_t q_ = 0;
    uint64_t n_inv_ = 0, n_inv_shoup_ = 0;
    std::vector<uint64_t> psi_brev_, psi_brev_shoup_;
    std::vector<uint64_t> ipsi_brev_, ipsi_brev_shoup_;
};

}  // namespace poi::he

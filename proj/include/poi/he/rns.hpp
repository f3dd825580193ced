// Copyright (c) 2026 the poi authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "poi/he/bigint.hpp"
#include "poi/he/modarith.hpp"
#include "poi/he/ntt.hpp"
#include "poi/he/params.hpp"

namespace poi::he {

// Polynomial in residue-number-system form: one row of n coefficients per
// chain prime.  Rows 0..k-2 are always a prefix of the data primes; a poly
// may carry the key-switching prime as an extra final row (has_special).
struct RnsPoly {
    size_t n = 0;
    size_t rows = 0;
    bool ntt_form = false;
    bool has_special = false;
    std::vector<uint64_t> v;

    RnsPoly() = default;
    RnsPoly(size_t n_, size_t rows_, bool special = false)
        : n(n_), rows(rows_), ntt_form(false), has_special(special), v(n_ * rows_, 0) {}

    uint64_t* row(size_t i) { return v.data() + i * n; }
    const uint64_t* row(size_t i) const { return v.data() + i * n; }
    size_t data_rows() const { return has_special ? rows - 1 : rows; }
};

// Shared tables for one parameter set: per-prime NTTs plus the constants
// used by rescale, key-switch mod-down, and CRT decoding.
class RnsContext {
public:
    explicit RnsContext(CkksParams params) : params_(std::move(params)) {
        params_.validate();
        const auto& chain = params_.modulus_chain;
        size_t n = params_.ring_degree;
        tables_.reserve(chain.size());
        for (uint64_t q : chain) tables_.emplace_back(n, q);

        size_t k = chain.size();
        inv_prime_mod_.assign(k, std::vector<uint64_t>(k, 0));
        prime_mod_.assign(k, std::vector<uint64_t>(k, 0));
        for (size_t l = 0; l < k; ++l) {
            for (size_t t = 0; t < k; ++t) {
                if (t == l) continue;
                prime_mod_[l][t] = chain[l] % chain[t];
                inv_prime_mod_[l][t] = inv_mod(prime_mod_[l][t], chain[t]);
            }
        }
    }

    const CkksParams& params() const { return params_; }
    size_t ring_degree() const { return params_.ring_degree; }
    size_t chain_length() const { return params_.modulus_chain.size(); }
    size_t special_index() const { return chain_length() - 1; }
    uint64_t prime(size_t i) const { return params_.modulus_chain[i]; }
    const NttTable& table(size_t i) const { return tables_[i]; }

    // Map a poly row position to its chain prime index.
    size_t chain_index(const RnsPoly& p, size_t row) const {
        if (p.has_special && row == p.rows - 1) return special_index();
        return row;
    }

    void to_ntt(RnsPoly& p) const {
        if (p.ntt_form) return;
        for (size_t r = 0; r < p.rows; ++r) tables_[chain_index(p, r)].forward(p.row(r));
        p.ntt_form = true;
    }

    void from_ntt(RnsPoly& p) const {
        if (!p.ntt_form) return;
        for (size_t r = 0; r < p.rows; ++r) tables_[chain_index(p, r)].inverse(p.row(r));
        p.ntt_form = false;
    }

    void add_inplace(RnsPoly& a, const RnsPoly& b) const {
        check_compatible(a, b);
        for (size_t r = 0; r < a.rows; ++r) {
            uint64_t q = prime(chain_index(a, r));
            uint64_t* x = a.row(r);
            const uint64_t* y = b.row(r);
            for (size_t j = 0; j < a.n; ++j) x[j] = add_mod(x[j], y[j], q);
        }
    }

    void sub_inplace(RnsPoly& a, const RnsPoly& b) const {
        check_compatible(a, b);
        for (size_t r = 0; r < a.rows; ++r) {
            uint64_t q = prime(chain_index(a, r));
            uint64_t* x = a.row(r);
            const uint64_t* y = b.row(r);
            for (size_t j = 0; j < a.n; ++j) x[j] = sub_mod(x[j], y[j], q);
        }
    }

    void negate_inplace(RnsPoly& a) const {
        for (size_t r = 0; r < a.rows; ++r) {
            uint64_t q = prime(chain_index(a, r));
            uint64_t* x = a.row(r);
            for (size_t j = 0; j < a.n; ++j) x[j] = neg_mod(x[j], q);
        }
    }

    // Pointwise product; both operands must be in NTT form.
    RnsPoly multiply(const RnsPoly& a, const RnsPoly& b) const {
        check_compatible(a, b);
        if (!a.ntt_form || !b.ntt_form) throw std::logic_error("multiply: operands must be in NTT form");
        RnsPoly out(a.n, a.rows, a.has_special);
        out.ntt_form = true;
        for (size_t r = 0; r < a.rows; ++r) {
            uint64_t q = prime(chain_index(a, r));
            const uint64_t* x = a.row(r);
            const uint64_t* y = b.row(r);
            uint64_t* z = out.row(r);
            for (size_t j = 0; j < a.n; ++j) z[j] = mul_mod(x[j], y[j], q);
        }
        return out;
    }

    void multiply_accumulate(const RnsPoly& a, const RnsPoly& b, RnsPoly& acc) const {
        check_compatible(a, b);
        check_compatible(a, acc);
        for (size_t r = 0; r < a.rows; ++r) {
            uint64_t q = prime(chain_index(a, r));
            const uint64_t* x = a.row(r);
            const uint64_t* y = b.row(r);
            uint64_t* z = acc.row(r);
            for (size_t j = 0; j < a.n; ++j)
                z[j] = add_mod(z[j], mul_mod(x[j], y[j], q), q);
        }
    }

    // Keeps only the first `rows` data rows (drops special / trailing primes).
    RnsPoly truncated(const RnsPoly& p, size_t rows) const {
        if (rows > p.data_rows()) throw std::logic_error("truncated: not enough rows");
        RnsPoly out(p.n, rows, false);
        out.ntt_form = p.ntt_form;
        for (size_t r = 0; r < rows; ++r)
            std::copy(p.row(r), p.row(r) + p.n, out.row(r));
        return out;
    }

    // Divide-and-round by the top data prime: drops the last row.
    // Input and output in NTT form.
    RnsPoly rescale_poly(const RnsPoly& p) const {
        if (p.has_special || p.rows < 2) throw std::logic_error("rescale_poly: bad operand");
        size_t last = p.rows - 1;
        uint64_t q_last = prime(last);

        std::vector<uint64_t> top(p.row(last), p.row(last) + p.n);
        tables_[last].inverse(top.data());

        RnsPoly out(p.n, p.rows - 1, false);
        out.ntt_form = true;
        std::vector<uint64_t> delta(p.n);
        for (size_t r = 0; r < out.rows; ++r) {
            uint64_t q = prime(r);
            // centered remainder of the dropped row, under prime r
            for (size_t j = 0; j < p.n; ++j) {
                uint64_t c = top[j];
                uint64_t red = c % q;
                delta[j] = (c > q_last / 2) ? sub_mod(red, q_last % q, q) : red;
            }
            tables_[r].forward(delta.data());
            uint64_t inv = inv_prime_mod_[last][r];
            const uint64_t* x = p.row(r);
            uint64_t* z = out.row(r);
            for (size_t j = 0; j < p.n; ++j)
                z[j] = mul_mod(sub_mod(x[j], delta[j], q), inv, q);
        }
        return out;
    }

    // Divide-and-round by the key-switching prime (the poly's final row).
    RnsPoly mod_down_special(const RnsPoly& p) const {
        if (!p.has_special) throw std::logic_error("mod_down_special: no special row");
        size_t sp_row = p.rows - 1;
        uint64_t q_sp = prime(special_index());

        std::vector<uint64_t> top(p.row(sp_row), p.row(sp_row) + p.n);
        if (p.ntt_form) tables_[special_index()].inverse(top.data());

        RnsPoly out(p.n, p.rows - 1, false);
        out.ntt_form = p.ntt_form;
        std::vector<uint64_t> delta(p.n);
        for (size_t r = 0; r < out.rows; ++r) {
            uint64_t q = prime(r);
            for (size_t j = 0; j < p.n; ++j) {
                uint64_t c = top[j];
                uint64_t red = c % q;
                delta[j] = (c > q_sp / 2) ? sub_mod(red, q_sp % q, q) : red;
            }
            if (p.ntt_form) tables_[r].forward(delta.data());
            uint64_t inv = inv_prime_mod_[special_index()][r];
            const uint64_t* x = p.row(r);
            uint64_t* z = out.row(r);
            for (size_t j = 0; j < p.n; ++j)
                z[j] = mul_mod(sub_mod(x[j], delta[j], q), inv, q);
        }
        return out;
    }

    // Galois automorphism X -> X^g on a coefficient-form poly.
    RnsPoly apply_galois(const RnsPoly& p, uint64_t galois_exp) const {
        if (p.ntt_form) throw std::logic_error("apply_galois: coefficient form required");
        size_t n = p.n;
        uint64_t two_n = 2 * n;
        RnsPoly out(n, p.rows, p.has_special);
        for (size_t r = 0; r < p.rows; ++r) {
            uint64_t q = prime(chain_index(p, r));
            const uint64_t* x = p.row(r);
            uint64_t* z = out.row(r);
            uint64_t idx = 0;
            for (size_t k = 0; k < n; ++k) {
                // idx = k * g mod 2n, computed incrementally
                if (k > 0) {
                    idx += galois_exp;
                    if (idx >= two_n) idx -= two_n;
                }
                if (idx < n)
                    z[idx] = x[k];
                else
                    z[idx - n] = neg_mod(x[k], q);
            }
        }
        return out;
    }

    // Centered CRT decode of one coefficient over the poly's data primes.
    struct DecodeTables {
        std::vector<uint64_t> primes;
        BigUInt q_total;
        std::vector<BigUInt> q_over_qi;
        std::vector<uint64_t> q_over_qi_inv;
    };

    DecodeTables decode_tables(size_t data_rows) const {
        DecodeTables dt;
        dt.primes.assign(params_.modulus_chain.begin(), params_.modulus_chain.begin() + data_rows);
        dt.q_total = BigUInt::product(dt.primes);
        for (size_t i = 0; i < data_rows; ++i) {
            std::vector<uint64_t> others;
            for (size_t j = 0; j < data_rows; ++j)
                if (j != i) others.push_back(dt.primes[j]);
            dt.q_over_qi.push_back(BigUInt::product(others));
            uint64_t red = 1;
            for (uint64_t o : others) red = mul_mod(red, o % dt.primes[i], dt.primes[i]);
            dt.q_over_qi_inv.push_back(inv_mod(red, dt.primes[i]));
        }
        return dt;
    }

private:
    void check_compatible(const RnsPoly& a, const RnsPoly& b) const {
        if (a.n != b.n || a.rows != b.rows || a.has_special != b.has_special ||
            a.ntt_form != b.ntt_form)
            throw std::logic_error("RnsContext: incompatible polynomials");
    }

    CkksParams params_;
    std::vector<NttTable> tables_;
    std::vector<std::vector<uint64_t>> inv_prime_mod_;  // [dropped][target]
    std::vector<std::vector<uint64_t>> prime_mod_;
};

}  // namespace poi::he

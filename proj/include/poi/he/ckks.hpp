// Copyright (c) 2026 the poi authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0
//
// Desk-scale CKKS: exact RNS/NTT arithmetic, hybrid key switching with a
// per-prime digit decomposition and one key-switching prime, and measured
// noise tracking through a noiseless shadow polynomial carried by every
// ciphertext.  Not constant-time and not hardened; built for evaluating
// packed linear layers and for studying operation costs.

#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "poi/he/encoder.hpp"
#include "poi/he/params.hpp"
#include "poi/he/rns.hpp"

namespace poi::he {

struct Plaintext {
    RnsPoly poly;       // NTT form over level+1 data primes
    size_t level = 0;
    double scale = 0.0;
    double inf_norm = 0.0;  // max |slot value| at encode time
};

struct Ciphertext {
    std::vector<RnsPoly> polys;  // 2, or 3 transiently after mul_ct
    size_t level = 0;
    double scale = 0.0;
    long double noise_estimate = 0.0;  // analytic bound, coefficient units
    std::shared_ptr<const RnsPoly> shadow;  // noiseless twin, NTT form

    size_t size() const { return polys.size(); }
};

// One key-switching key: per data-prime digit i, a pair (b_i, a_i) over the
// full chain with b_i = -a_i*s + e_i + p*[row i]*target, where `target` is
// s^2 for relinearization or a Galois image of s for rotations.
struct KswKey {
    std::vector<RnsPoly> b, a;
    std::vector<RnsPoly> b_shoup, a_shoup;  // precomputed quotients per row
};

struct KeySet {
    RnsPoly secret;  // NTT form, full chain
    RnsPoly pk_b, pk_a;
    KswKey relin;
    std::map<size_t, KswKey> rotation;  // left-rotation step -> key
};

namespace detail {

inline void sample_ternary(std::vector<int64_t>& out, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> d(-1, 1);
    for (auto& c : out) c = d(rng);
}

inline void sample_gaussian(std::vector<int64_t>& out, double sigma, std::mt19937_64& rng) {
    // Box-Muller; implementation-independent for reproducibility
    std::uniform_real_distribution<double> u(std::nextafter(0.0, 1.0), 1.0);
    for (size_t i = 0; i < out.size(); i += 2) {
        double r = std::sqrt(-2.0 * std::log(u(rng)));
        double t = 2.0 * M_PI * u(rng);
        out[i] = std::llround(sigma * r * std::cos(t));
        if (i + 1 < out.size()) out[i + 1] = std::llround(sigma * r * std::sin(t));
    }
}

inline RnsPoly small_poly_to_rns(const std::vector<int64_t>& coeffs, const RnsContext& ctx,
                                 size_t rows, bool special) {
    RnsPoly p(coeffs.size(), rows, special);
    for (size_t r = 0; r < rows; ++r) {
        uint64_t q = ctx.prime(ctx.chain_index(p, r));
        uint64_t* row = p.row(r);
        for (size_t k = 0; k < coeffs.size(); ++k) {
            int64_t c = coeffs[k];
            row[k] = c >= 0 ? static_cast<uint64_t>(c) % q
                            : neg_mod(static_cast<uint64_t>(-c) % q, q);
        }
    }
    ctx.to_ntt(p);
    return p;
}

inline RnsPoly uniform_poly(const RnsContext& ctx, size_t rows, bool special,
                            std::mt19937_64& rng) {
    RnsPoly p(ctx.ring_degree(), rows, special);
    for (size_t r = 0; r < rows; ++r) {
        uint64_t q = ctx.prime(ctx.chain_index(p, r));
        std::uniform_int_distribution<uint64_t> d(0, q - 1);
        uint64_t* row = p.row(r);
        for (size_t k = 0; k < p.n; ++k) row[k] = d(rng);
    }
    p.ntt_form = true;  // uniform in either domain
    return p;
}

}  // namespace detail

class CkksEngine {
public:
    CkksEngine(const CkksParams& params, uint64_t seed)
        : ctx_(params), encoder_(params.ring_degree), seed_(seed) {
        keygen(seed);
    }

    const RnsContext& context() const { return ctx_; }
    const CkksEncoder& encoder() const { return encoder_; }
    const CkksParams& params() const { return ctx_.params(); }
    const KeySet& keys() const { return keys_; }
    size_t slot_count() const { return encoder_.slot_count(); }
    size_t top_level() const { return ctx_.params().depth; }
    double default_scale() const { return ctx_.params().scale; }

    // ---- encode / decode -------------------------------------------------

    Plaintext encode(const std::vector<double>& values, size_t level, double scale) const {
        check_level(level);
        Plaintext pt;
        pt.poly = encoder_.encode(values, scale, ctx_, level + 1);
        pt.level = level;
        pt.scale = scale;
        pt.inf_norm = inf_norm(values);
        return pt;
    }

    Plaintext encode_broadcast(double value, size_t level, double scale) const {
        check_level(level);
        Plaintext pt;
        pt.poly = encoder_.encode_broadcast(value, scale, ctx_, level + 1);
        pt.level = level;
        pt.scale = scale;
        pt.inf_norm = std::abs(value);
        return pt;
    }

    std::vector<double> decode(const Plaintext& pt) const {
        RnsPoly p = pt.poly;
        ctx_.from_ntt(p);
        return encoder_.decode(lift_coefficients(p), pt.scale);
    }

    // ---- encrypt / decrypt -----------------------------------------------

    Ciphertext encrypt(const Plaintext& pt, std::mt19937_64& rng) const {
        size_t rows = pt.level + 1;
        size_t n = ctx_.ring_degree();
        std::vector<int64_t> small(n);

        detail::sample_ternary(small, rng);
        RnsPoly u = detail::small_poly_to_rns(small, ctx_, rows, false);
        detail::sample_gaussian(small, params().error_stddev, rng);
        RnsPoly e0 = detail::small_poly_to_rns(small, ctx_, rows, false);
        detail::sample_gaussian(small, params().error_stddev, rng);
        RnsPoly e1 = detail::small_poly_to_rns(small, ctx_, rows, false);

        RnsPoly c0 = ctx_.multiply(ctx_.truncated(keys_.pk_b, rows), u);
        ctx_.add_inplace(c0, e0);
        ctx_.add_inplace(c0, pt.poly);
        RnsPoly c1 = ctx_.multiply(ctx_.truncated(keys_.pk_a, rows), u);
        ctx_.add_inplace(c1, e1);

        Ciphertext ct;
        ct.polys = {std::move(c0), std::move(c1)};
        ct.level = pt.level;
        ct.scale = pt.scale;
        ct.noise_estimate = fresh_noise();
        ct.shadow = std::make_shared<RnsPoly>(pt.poly);
        return ct;
    }

    Plaintext decrypt(const Ciphertext& ct) const {
        if (ct.size() != 2) throw std::logic_error("decrypt: ciphertext must have size 2");
        RnsPoly m = ctx_.multiply(ct.polys[1], ctx_.truncated(keys_.secret, ct.level + 1));
        ctx_.add_inplace(m, ct.polys[0]);
        Plaintext pt;
        pt.poly = std::move(m);
        pt.level = ct.level;
        pt.scale = ct.scale;
        pt.inf_norm = 0.0;
        return pt;
    }

    std::vector<double> decrypt_values(const Ciphertext& ct) const { return decode(decrypt(ct)); }

    // ---- evaluation operations --------------------------------------------

    Ciphertext add_pt(const Ciphertext& ct, const Plaintext& pt) const {
        require_size2(ct, "add_pt");
        check_match(ct.level, pt.level, ct.scale, pt.scale, "add_pt");
        Ciphertext out = ct;
        ctx_.add_inplace(out.polys[0], pt.poly);
        out.noise_estimate = ct.noise_estimate;
        if (ct.shadow) {
            RnsPoly s = *ct.shadow;
            ctx_.add_inplace(s, pt.poly);
            out.shadow = std::make_shared<RnsPoly>(std::move(s));
        }
        return out;
    }

    Ciphertext add_ct(const Ciphertext& a, const Ciphertext& b) const {
        require_size2(a, "add_ct");
        require_size2(b, "add_ct");
        check_match(a.level, b.level, a.scale, b.scale, "add_ct");
        Ciphertext out = a;
        ctx_.add_inplace(out.polys[0], b.polys[0]);
        ctx_.add_inplace(out.polys[1], b.polys[1]);
        out.noise_estimate = a.noise_estimate + b.noise_estimate;
        if (a.shadow && b.shadow) {
            RnsPoly s = *a.shadow;
            ctx_.add_inplace(s, *b.shadow);
            out.shadow = std::make_shared<RnsPoly>(std::move(s));
        } else {
            out.shadow.reset();
        }
        return out;
    }

    Ciphertext mul_pt(const Ciphertext& ct, const Plaintext& pt) const {
        require_size2(ct, "mul_pt");
        if (ct.level != pt.level) throw std::invalid_argument("mul_pt: level mismatch");
        Ciphertext out;
        out.polys = {ctx_.multiply(ct.polys[0], pt.poly), ctx_.multiply(ct.polys[1], pt.poly)};
        out.level = ct.level;
        out.scale = ct.scale * pt.scale;
        out.noise_estimate = ct.noise_estimate * std::max(pt.inf_norm, 1.0);
        if (ct.shadow)
            out.shadow = std::make_shared<RnsPoly>(ctx_.multiply(*ct.shadow, pt.poly));
        return out;
    }

    Ciphertext mul_ct(const Ciphertext& a, const Ciphertext& b) const {
        require_size2(a, "mul_ct");
        require_size2(b, "mul_ct");
        if (a.level != b.level) throw std::invalid_argument("mul_ct: level mismatch");
        Ciphertext out;
        RnsPoly d0 = ctx_.multiply(a.polys[0], b.polys[0]);
        RnsPoly d1 = ctx_.multiply(a.polys[0], b.polys[1]);
        RnsPoly d1b = ctx_.multiply(a.polys[1], b.polys[0]);
        ctx_.add_inplace(d1, d1b);
        RnsPoly d2 = ctx_.multiply(a.polys[1], b.polys[1]);
        out.polys = {std::move(d0), std::move(d1), std::move(d2)};
        out.level = a.level;
        out.scale = a.scale * b.scale;
        out.noise_estimate = a.noise_estimate * b.noise_estimate;
        if (a.shadow && b.shadow)
            out.shadow = std::make_shared<RnsPoly>(ctx_.multiply(*a.shadow, *b.shadow));
        return out;
    }

    Ciphertext relinearize(const Ciphertext& ct) const {
        if (ct.size() != 3)
            throw std::logic_error("relinearize: input must have size 3");
        auto [b, a] = key_switch(ct.polys[2], keys_.relin);
        Ciphertext out;
        out.polys = {ct.polys[0], ct.polys[1]};
        ctx_.add_inplace(out.polys[0], b);
        ctx_.add_inplace(out.polys[1], a);
        out.level = ct.level;
        out.scale = ct.scale;
        out.noise_estimate = ct.noise_estimate + key_switch_noise(ct.level);
        out.shadow = ct.shadow;
        return out;
    }

    Ciphertext rescale(const Ciphertext& ct) const {
        require_size2(ct, "rescale");
        if (ct.level == 0)
            throw std::runtime_error("rescale: level 0 reached, depth budget exhausted");
        uint64_t dropped = ctx_.prime(ct.level);
        Ciphertext out;
        out.polys = {ctx_.rescale_poly(ct.polys[0]), ctx_.rescale_poly(ct.polys[1])};
        out.level = ct.level - 1;
        out.scale = ct.scale / static_cast<double>(dropped);
        out.noise_estimate =
            ct.noise_estimate / static_cast<long double>(dropped) + fresh_noise();
        if (ct.shadow)
            out.shadow = std::make_shared<RnsPoly>(ctx_.rescale_poly(*ct.shadow));
        return out;
    }

    // Cyclic left rotation of the slots by `step`.
    Ciphertext rotate(const Ciphertext& ct, size_t step) const {
        require_size2(ct, "rotate");
        step %= slot_count();
        if (step == 0) return ct;
        auto it = keys_.rotation.find(step);
        if (it == keys_.rotation.end())
            throw std::runtime_error("rotate: missing rotation key for step " +
                                     std::to_string(step));
        uint64_t g = galois_exponent(step);

        RnsPoly c0 = ct.polys[0];
        ctx_.from_ntt(c0);
        c0 = ctx_.apply_galois(c0, g);
        ctx_.to_ntt(c0);

        RnsPoly c1 = ct.polys[1];
        ctx_.from_ntt(c1);
        c1 = ctx_.apply_galois(c1, g);

        auto [b, a] = key_switch_coeff(c1, it->second);
        ctx_.add_inplace(c0, b);

        Ciphertext out;
        out.polys = {std::move(c0), std::move(a)};
        out.level = ct.level;
        out.scale = ct.scale;
        out.noise_estimate = ct.noise_estimate + key_switch_noise(ct.level);
        if (ct.shadow) {
            RnsPoly s = *ct.shadow;
            ctx_.from_ntt(s);
            s = ctx_.apply_galois(s, g);
            ctx_.to_ntt(s);
            out.shadow = std::make_shared<RnsPoly>(std::move(s));
        }
        return out;
    }

    // ---- noise ------------------------------------------------------------

    // Measured headroom in bits before the error swallows the modulus.
    // Requires the noiseless shadow (test mode).
    double noise_budget(const Ciphertext& ct) const {
        long double err = measured_noise(ct);
        if (err < 0) return 0.0;  // per-prime lifts disagreed: overflow
        double q_bits = 0;
        for (size_t r = 0; r <= ct.level; ++r)
            q_bits += std::log2(static_cast<double>(ctx_.prime(r)));
        double noise_bits = err <= 1.0L ? 0.0 : static_cast<double>(std::log2(err));
        return q_bits - 1.0 - noise_bits;
    }

    // Infinity norm of (c0 + c1*s - shadow), or -1 if it overflows.
    long double measured_noise(const Ciphertext& ct) const {
        if (!ct.shadow) throw std::logic_error("measured_noise: ciphertext has no shadow");
        if (ct.size() != 2) throw std::logic_error("measured_noise: size-2 ciphertext required");
        RnsPoly m = ctx_.multiply(ct.polys[1], ctx_.truncated(keys_.secret, ct.level + 1));
        ctx_.add_inplace(m, ct.polys[0]);
        ctx_.sub_inplace(m, *ct.shadow);
        ctx_.from_ntt(m);
        long double max_err = 0.0L;
        for (size_t j = 0; j < m.n; ++j) {
            int64_t ref = 0;
            for (size_t r = 0; r < m.rows; ++r) {
                uint64_t q = ctx_.prime(r);
                uint64_t v = m.row(r)[j];
                int64_t c = v > q / 2 ? static_cast<int64_t>(v) - static_cast<int64_t>(q)
                                      : static_cast<int64_t>(v);
                if (r == 0)
                    ref = c;
                else if (c != ref)
                    return -1.0L;
            }
            long double a = ref < 0 ? -static_cast<long double>(ref) : static_cast<long double>(ref);
            if (a > max_err) max_err = a;
        }
        return max_err;
    }

    // Models the hybrid scheme's non-linear stage: re-encrypts the current
    // values at top level with fresh noise.
    Ciphertext refresh(const Ciphertext& ct, std::mt19937_64& rng) const {
        if (noise_budget(ct) <= 0.0)
            throw std::runtime_error("refresh: ciphertext noise budget exhausted");
        std::vector<double> values = decrypt_values(ct);
        Plaintext pt = encode(values, top_level(), default_scale());
        return encrypt(pt, rng);
    }

    // ---- rotation key management -------------------------------------------

    void ensure_rotation_keys(const std::vector<size_t>& steps) {
        for (size_t s : steps) {
            size_t step = s % slot_count();
            if (step == 0 || keys_.rotation.count(step)) continue;
            RnsPoly target = galois_secret(step);
            keys_.rotation.emplace(step, make_ksw_key(target));
        }
    }

    bool has_rotation_key(size_t step) const {
        return step % slot_count() == 0 || keys_.rotation.count(step % slot_count()) > 0;
    }

    uint64_t seed() const { return seed_; }

private:
    void check_level(size_t level) const {
        if (level > top_level()) throw std::invalid_argument("level beyond chain depth");
    }

    std::vector<long double> lift_coefficients(const RnsPoly& coeff_form) const {
        auto dt = ctx_.decode_tables(coeff_form.rows);
        std::vector<long double> out(coeff_form.n);
        std::vector<uint64_t> res(coeff_form.rows);
        for (size_t j = 0; j < coeff_form.n; ++j) {
            for (size_t r = 0; r < coeff_form.rows; ++r) res[r] = coeff_form.row(r)[j];
            out[j] = crt_lift_centered(res, dt.primes, dt.q_total, dt.q_over_qi, dt.q_over_qi_inv);
        }
        return out;
    }

    static double inf_norm(const std::vector<double>& v) {
        double m = 0;
        for (double x : v) m = std::max(m, std::abs(x));
        return m;
    }

    void require_size2(const Ciphertext& ct, const char* op) const {
        if (ct.size() != 2)
            throw std::logic_error(std::string(op) + ": ciphertext must be relinearized first");
    }

    void check_match(size_t l1, size_t l2, double s1, double s2, const char* op) const {
        if (l1 != l2) throw std::invalid_argument(std::string(op) + ": level mismatch");
        if (std::abs(s1 - s2) > 1e-6 * std::max(s1, s2))
            throw std::invalid_argument(std::string(op) + ": scale mismatch");
    }

    long double fresh_noise() const {
        return static_cast<long double>(params().error_stddev) * ctx_.ring_degree();
    }

    long double key_switch_noise(size_t level) const {
        // digit errors are divided by the key-switching prime on mod-down
        long double q_max = 0;
        for (size_t r = 0; r <= level; ++r)
            q_max = std::max(q_max, static_cast<long double>(ctx_.prime(r)));
        long double p_sp = static_cast<long double>(ctx_.prime(ctx_.special_index()));
        return (level + 1) * q_max * ctx_.ring_degree() *
                   static_cast<long double>(params().error_stddev) / p_sp +
               ctx_.ring_degree();
    }

    uint64_t galois_exponent(size_t step) const {
        uint64_t two_n = 2 * ctx_.ring_degree();
        uint64_t g = 1;
        for (size_t i = 0; i < step; ++i) g = (g * 5) % two_n;
        return g;
    }

    void keygen(uint64_t seed) {
        std::mt19937_64 rng(seed);
        size_t n = ctx_.ring_degree();
        size_t full = ctx_.chain_length();

        std::vector<int64_t> small(n);
        detail::sample_ternary(small, rng);
        keys_.secret = detail::small_poly_to_rns(small, ctx_, full, true);

        keys_.pk_a = detail::uniform_poly(ctx_, full, true, rng);
        detail::sample_gaussian(small, params().error_stddev, rng);
        RnsPoly e = detail::small_poly_to_rns(small, ctx_, full, true);
        RnsPoly bs = ctx_.multiply(keys_.pk_a, keys_.secret);
        ctx_.negate_inplace(bs);
        ctx_.add_inplace(bs, e);
        keys_.pk_b = std::move(bs);

        keygen_rng_ = rng;  // key-switching keys continue the same stream
        keys_.relin = make_ksw_key(ctx_.multiply(keys_.secret, keys_.secret));
    }

    RnsPoly galois_secret(size_t step) const {
        RnsPoly s = keys_.secret;
        ctx_.from_ntt(s);
        s = ctx_.apply_galois(s, galois_exponent(step));
        ctx_.to_ntt(s);
        return s;
    }

    KswKey make_ksw_key(const RnsPoly& target) {
        size_t n = ctx_.ring_degree();
        size_t full = ctx_.chain_length();
        size_t digits = ctx_.params().data_prime_count();
        uint64_t p_sp = ctx_.prime(ctx_.special_index());
        KswKey key;
        std::vector<int64_t> small(n);
        for (size_t i = 0; i < digits; ++i) {
            RnsPoly a = detail::uniform_poly(ctx_, full, true, keygen_rng_);
            detail::sample_gaussian(small, params().error_stddev, keygen_rng_);
            RnsPoly b = detail::small_poly_to_rns(small, ctx_, full, true);
            RnsPoly as = ctx_.multiply(a, keys_.secret);
            ctx_.sub_inplace(b, as);
            // add p * target on digit row i only
            uint64_t q_i = ctx_.prime(i);
            uint64_t factor = p_sp % q_i;
            const uint64_t* t_row = target.row(i);
            uint64_t* b_row = b.row(i);
            for (size_t j = 0; j < n; ++j)
                b_row[j] = add_mod(b_row[j], mul_mod(factor, t_row[j], q_i), q_i);
            key.b.push_back(std::move(b));
            key.a.push_back(std::move(a));
        }
        for (size_t i = 0; i < digits; ++i) {
            key.b_shoup.push_back(shoup_table(key.b[i]));
            key.a_shoup.push_back(shoup_table(key.a[i]));
        }
        return key;
    }

    RnsPoly shoup_table(const RnsPoly& p) const {
        RnsPoly t(p.n, p.rows, p.has_special);
        t.ntt_form = p.ntt_form;
        for (size_t r = 0; r < p.rows; ++r) {
            uint64_t q = ctx_.prime(ctx_.chain_index(p, r));
            const uint64_t* src = p.row(r);
            uint64_t* dst = t.row(r);
            for (size_t j = 0; j < p.n; ++j) dst[j] = shoup_precompute(src[j], q);
        }
        return t;
    }

    // Key switch with input in NTT form (digit rows reused from it).
    std::pair<RnsPoly, RnsPoly> key_switch(const RnsPoly& d_ntt, const KswKey& key) const {
        RnsPoly d_coeff = d_ntt;
        ctx_.from_ntt(d_coeff);
        return key_switch_impl(d_coeff, &d_ntt, key);
    }

    // Key switch with input in coefficient form.
    std::pair<RnsPoly, RnsPoly> key_switch_coeff(const RnsPoly& d_coeff, const KswKey& key) const {
        return key_switch_impl(d_coeff, nullptr, key);
    }

    std::pair<RnsPoly, RnsPoly> key_switch_impl(const RnsPoly& d_coeff, const RnsPoly* d_ntt,
                                                const KswKey& key) const {
        size_t rows = d_coeff.rows;  // level + 1
        size_t n = d_coeff.n;
        size_t sp = ctx_.special_index();

        RnsPoly acc_b(n, rows + 1, true);
        RnsPoly acc_a(n, rows + 1, true);
        acc_b.ntt_form = acc_a.ntt_form = true;

        std::vector<uint64_t> digit(n);
        for (size_t i = 0; i < rows; ++i) {
            const uint64_t* src = d_coeff.row(i);
            for (size_t t = 0; t <= rows; ++t) {
                size_t chain_t = (t == rows) ? sp : t;
                uint64_t q_t = ctx_.prime(chain_t);
                const uint64_t* drow;
                if (t == i && d_ntt) {
                    drow = d_ntt->row(i);
                } else {
                    BarrettMod red(q_t);
                    for (size_t j = 0; j < n; ++j) digit[j] = red.reduce(src[j]);
                    ctx_.table(chain_t).forward(digit.data());
                    drow = digit.data();
                }
                size_t key_row = (t == rows) ? ctx_.chain_length() - 1 : t;
                const uint64_t* kb = key.b[i].row(key_row);
                const uint64_t* ka = key.a[i].row(key_row);
                const uint64_t* kbs = key.b_shoup[i].row(key_row);
                const uint64_t* kas = key.a_shoup[i].row(key_row);
                uint64_t* ob = acc_b.row(t);
                uint64_t* oa = acc_a.row(t);
                for (size_t j = 0; j < n; ++j) {
                    ob[j] = add_mod(ob[j], mul_mod_shoup(drow[j], kb[j], kbs[j], q_t), q_t);
                    oa[j] = add_mod(oa[j], mul_mod_shoup(drow[j], ka[j], kas[j], q_t), q_t);
                }
            }
        }
        return {ctx_.mod_down_special(acc_b), ctx_.mod_down_special(acc_a)};
    }

    RnsContext ctx_;
    CkksEncoder encoder_;
    KeySet keys_;
    std::mt19937_64 keygen_rng_;
    uint64_t seed_ = 0;
};

}  // namespace poi::he

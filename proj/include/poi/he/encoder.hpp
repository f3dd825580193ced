// Copyright (c) 2026 the poi authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "poi/he/rns.hpp"

namespace poi::he {

// Canonical-embedding encoder.  A real vector of up to n/2 slot values is
// mapped to an integer polynomial m with m(zeta^(5^j)) = scale * v_j, where
// zeta is a primitive 2n-th root of unity.  Evaluation at the odd roots
// zeta^(2t+1) of a twisted coefficient sequence is a plain size-n DFT, so a
// standard complex FFT does all the work.
class CkksEncoder {
public:
    explicit CkksEncoder(size_t n) : n_(n), slots_(n / 2) {
        size_t two_n = 2 * n;
        slot_to_freq_.resize(slots_);
        uint64_t g = 1;
        for (size_t j = 0; j < slots_; ++j) {
            slot_to_freq_[j] = static_cast<size_t>((g - 1) / 2);
            g = (g * 5) % two_n;
        }
        twist_.resize(n);
        for (size_t k = 0; k < n; ++k) {
            double angle = M_PI * static_cast<double>(k) / static_cast<double>(n);
            twist_[k] = {std::cos(angle), std::sin(angle)};
        }
        size_t log_n = 0;
        while ((size_t(1) << log_n) < n) ++log_n;
        log_n_ = log_n;
    }

    size_t slot_count() const { return slots_; }

    // Real slot values -> RNS polynomial (NTT form) over `data_rows` primes.
    RnsPoly encode(const std::vector<double>& values, double scale, const RnsContext& ctx,
                   size_t data_rows) const {
        if (values.size() > slots_) throw std::invalid_argument("encode: too many values for slot count");
        std::vector<std::complex<double>> spec(n_, {0.0, 0.0});
        for (size_t j = 0; j < values.size(); ++j) {
            std::complex<double> w(values[j] * scale, 0.0);
            spec[slot_to_freq_[j]] = w;
            spec[n_ - 1 - slot_to_freq_[j]] = std::conj(w);
        }
        fft(spec, /*positive_exponent=*/false);
        double inv_n = 1.0 / static_cast<double>(n_);
        return round_to_rns(
            [&](size_t k) { return (spec[k] * std::conj(twist_[k])).real() * inv_n; }, ctx,
            data_rows);
    }

    // Single scalar broadcast to every slot: a constant polynomial.
    RnsPoly encode_broadcast(double value, double scale, const RnsContext& ctx,
                             size_t data_rows) const {
        return round_to_rns([&](size_t k) { return k == 0 ? value * scale : 0.0; }, ctx,
                            data_rows);
    }

    // CRT-lifted coefficients -> slot values.
    std::vector<double> decode(const std::vector<long double>& coeffs, double scale) const {
        if (coeffs.size() != n_) throw std::invalid_argument("decode: coefficient count mismatch");
        std::vector<std::complex<double>> u(n_);
        for (size_t k = 0; k < n_; ++k) {
            double c = static_cast<double>(coeffs[k] / static_cast<long double>(scale));
            u[k] = c * twist_[k];
        }
        fft(u, /*positive_exponent=*/true);
        std::vector<double> out(slots_);
        for (size_t j = 0; j < slots_; ++j) out[j] = u[slot_to_freq_[j]].real();
        return out;
    }

private:
    template <typename CoeffFn>
    RnsPoly round_to_rns(CoeffFn&& coeff, const RnsContext& ctx, size_t data_rows) const {
        // Coefficients must stay inside Q/2.  Values beyond int64 range are
        // reduced through long-double fmod; their representation error is
        // far below the scale they carry.
        double q_bits = 0;
        for (size_t r = 0; r < data_rows; ++r)
            q_bits += std::log2(static_cast<double>(ctx.prime(r)));
        double limit = std::pow(2.0, q_bits - 1.0);
        constexpr double kInt64Limit = 4.6e18;

        RnsPoly p(n_, data_rows, false);
        std::vector<double> cs(n_);
        for (size_t k = 0; k < n_; ++k) {
            double c = coeff(k);
            if (!std::isfinite(c) || std::abs(c) >= limit)
                throw std::overflow_error("encode: coefficient overflows the modulus");
            cs[k] = c;
        }
        for (size_t r = 0; r < data_rows; ++r) {
            uint64_t q = ctx.prime(r);
            uint64_t* row = p.row(r);
            for (size_t k = 0; k < n_; ++k) {
                double c = cs[k];
                if (std::abs(c) < kInt64Limit) {
                    int64_t ci = static_cast<int64_t>(std::llround(c));
                    row[k] = ci >= 0 ? static_cast<uint64_t>(ci) % q
                                     : neg_mod(static_cast<uint64_t>(-ci) % q, q);
                } else {
                    long double rem = std::fmod(std::round(static_cast<long double>(c)),
                                                 static_cast<long double>(q));
                    if (rem < 0) rem += static_cast<long double>(q);
                    row[k] = static_cast<uint64_t>(rem);
                }
            }
        }
        ctx.to_ntt(p);
        return p;
    }

    void fft(std::vector<std::complex<double>>& a, bool positive_exponent) const {
        // iterative radix-2, bit-reversal first
        for (size_t i = 1, j = 0; i < n_; ++i) {
            size_t bit = n_ >> 1;
            for (; j & bit; bit >>= 1) j ^= bit;
            j ^= bit;
            if (i < j) std::swap(a[i], a[j]);
        }
        double sign = positive_exponent ? 1.0 : -1.0;
        for (size_t len = 2; len <= n_; len <<= 1) {
            double ang = sign * 2.0 * M_PI / static_cast<double>(len);
            std::complex<double> wlen(std::cos(ang), std::sin(ang));
            for (size_t i = 0; i < n_; i += len) {
                std::complex<double> w(1.0, 0.0);
                for (size_t j = 0; j < len / 2; ++j) {
                    std::complex<double> u = a[i + j];
                    std::complex<double> v = a[i + j + len / 2] * w;
                    a[i + j] = u + v;
                    a[i + j + len / 2] = u - v;
                    w *= wlen;
                }
            }
        }
    }

    size_t n_;
    size_t slots_;
    size_t log_n_ = 0;
    std::vector<size_t> slot_to_freq_;
    std::vector<std::complex<double>> twist_;
};

}  // namespace poi::he

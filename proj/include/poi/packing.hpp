// Copyright (c) 2026 the poi authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0
//
// Inter-axis packing of FC and convolutional layers.  Weight groups are
// encoded as plaintexts (revealed) or encrypted (hidden) according to a
// leakage plan; the layer is then evaluated homomorphically against a
// single input ciphertext.  The analytic operation counts in
// predicted_fc_ops / predicted_conv_ops mirror the evaluation exactly.

#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "poi/he/backend.hpp"
#include "poi/he/ledger.hpp"
#include "poi/leakage.hpp"
#include "poi/nn/tensor.hpp"

namespace poi::pack {

enum class FcPackingKind { naive, diagonal, hybrid };
enum class EvalMode { relin_only, rescale_all };

inline std::string fc_kind_name(FcPackingKind k) {
    switch (k) {
        case FcPackingKind::naive: return "naive";
        case FcPackingKind::diagonal: return "diagonal";
        case FcPackingKind::hybrid: return "hybrid";
    }
    return "?";
}

inline FcPackingKind fc_kind_from_name(const std::string& n) {
    if (n == "naive") return FcPackingKind::naive;
    if (n == "diagonal") return FcPackingKind::diagonal;
    if (n == "hybrid") return FcPackingKind::hybrid;
    throw std::invalid_argument("unknown fc packing kind '" + n + "'");
}

inline leak::GroupScheme fc_kind_scheme(FcPackingKind k) {
    switch (k) {
        case FcPackingKind::naive: return leak::GroupScheme::fc_naive_rows;
        case FcPackingKind::diagonal: return leak::GroupScheme::fc_diagonal;
        case FcPackingKind::hybrid: return leak::GroupScheme::fc_hybrid_rows;
    }
    throw std::logic_error("fc_kind_scheme");
}

inline size_t next_pow2(size_t v) {
    size_t p = 1;
    while (p < v) p <<= 1;
    return p;
}

inline size_t log2_exact(size_t v) {
    size_t l = 0;
    while ((size_t(1) << l) < v) ++l;
    return l;
}

// Baby-step size for the diagonal method's giant-step schedule (M a power
// of two, so baby * giant == M exactly).
inline size_t diagonal_baby_steps(size_t m) {
    return size_t(1) << ((log2_exact(m) + 1) / 2);
}

// ---- predicted operation counts -------------------------------------------

inline he::OpLedger predicted_fc_ops(size_t M, size_t N, FcPackingKind kind, double p,
                                     EvalMode mode, bool bias_hidden = true) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("predicted_fc_ops: p out of range");
    he::OpLedger l;
    if (kind == FcPackingKind::naive || kind == FcPackingKind::hybrid) {
        size_t h = leak::hidden_quota(p, N);
        size_t logm = log2_exact(next_pow2(M));
        l.plain_mults = N - h;
        l.ciph_mults = h;
        l.relins = h;
        l.rescales = mode == EvalMode::rescale_all ? N : 0;
        l.rotations = N * logm;
        l.ct_adds = N * logm + (bias_hidden ? N : 0);
        l.pt_adds = bias_hidden ? 0 : N;
    } else {
        size_t h = leak::hidden_quota(p, M);
        size_t baby = diagonal_baby_steps(next_pow2(M));
        size_t giant = next_pow2(M) / baby;
        l.plain_mults = M - h;
        l.ciph_mults = h;
        l.relins = h;
        l.rescales = mode == EvalMode::rescale_all ? M : 0;
        l.rotations = (baby - 1) + (giant - 1);
        l.ct_adds = giant * (baby - 1) + (giant - 1) + (bias_hidden ? 1 : 0);
        l.pt_adds = bias_hidden ? 0 : 1;
    }
    return l;
}

struct ConvDims {
    size_t kernel = 3;
    size_t in_channels = 1;
    size_t out_channels = 1;
    size_t height = 0;
    size_t width = 0;
};

inline he::OpLedger predicted_conv_ops(const ConvDims& d, leak::GroupScheme granularity, double p,
                                       EvalMode mode, bool bias_hidden = true) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("predicted_conv_ops: p out of range");
    size_t kk = d.kernel * d.kernel;
    size_t M = d.in_channels, N = d.out_channels;
    he::OpLedger l;
    size_t mults_total, h_mults;
    if (granularity == leak::GroupScheme::conv_per_filter) {
        size_t h = leak::hidden_quota(p, N);
        mults_total = kk * N;
        h_mults = kk * h;
        l.ct_adds = N * (kk - 1) + N * (M - 1);
    } else if (granularity == leak::GroupScheme::conv_per_kernel) {
        size_t h = leak::hidden_quota(p, N * M);
        mults_total = kk * N * M;
        h_mults = kk * h;
        l.ct_adds = N * (kk * M - 1) + N * (M - 1);
    } else {
        throw std::invalid_argument("predicted_conv_ops: not a conv grouping scheme");
    }
    l.plain_mults = mults_total - h_mults;
    l.ciph_mults = h_mults;
    l.relins = h_mults;
    l.rescales = mode == EvalMode::rescale_all ? mults_total : 0;
    l.rotations = (kk - 1) + N * (M - 1);
    l.ct_adds += bias_hidden ? N : 0;
    l.pt_adds = bias_hidden ? 0 : N;
    return l;
}

// Number of plaintext/ciphertext polynomials a layout stores its weights in
// (count-conservation: plain_mults + ciph_mults equals this).
inline size_t layout_polynomial_count(size_t M, size_t N, FcPackingKind kind) {
    return kind == FcPackingKind::diagonal ? M : N;
}
inline size_t layout_polynomial_count(const ConvDims& d, leak::GroupScheme granularity) {
    size_t kk = d.kernel * d.kernel;
    return granularity == leak::GroupScheme::conv_per_filter
               ? kk * d.out_channels
               : kk * d.out_channels * d.in_channels;
}

// ---- packed layers ----------------------------------------------------------

template <typename B>
struct PackedPayload {
    bool hidden = false;
    std::optional<typename B::Pt> pt;
    std::optional<typename B::Ct> ct;
};

template <typename B>
struct PackedFcLayer {
    FcPackingKind kind = FcPackingKind::naive;
    EvalMode mode = EvalMode::relin_only;
    size_t M = 0, N = 0;
    size_t padded_m = 0;
    size_t baby = 0, giant = 0;             // diagonal schedule
    std::vector<PackedPayload<B>> groups;   // naive/hybrid: N; diagonal: M
    std::vector<PackedPayload<B>> bias;     // naive/hybrid: N broadcasts; diagonal: 1
    bool bias_hidden = true;
};

struct ConvGeometry {
    ConvDims dims;
    size_t pad = 0;
    size_t block_h = 0, block_w = 0, block = 0;

    static ConvGeometry make(const ConvDims& d) {
        ConvGeometry g;
        g.dims = d;
        g.pad = d.kernel / 2;
        g.block_h = d.height + 2 * g.pad;
        g.block_w = d.width + 2 * g.pad;
        g.block = g.block_h * g.block_w;
        return g;
    }
    size_t slots_needed() const { return dims.in_channels * block; }
};

template <typename B>
struct PackedConvLayer {
    leak::GroupScheme granularity = leak::GroupScheme::conv_per_filter;
    EvalMode mode = EvalMode::relin_only;
    ConvGeometry geom;
    // per_filter: taps[f] holds k*k payloads; per_kernel: taps[f*M+c].
    std::vector<std::vector<PackedPayload<B>>> taps;
    std::vector<PackedPayload<B>> bias;  // one broadcast payload per filter
    bool bias_hidden = true;
};

namespace detail {

template <typename B>
PackedPayload<B> make_payload(B& backend, const std::vector<double>& values, bool hidden,
                              size_t level, double scale) {
    PackedPayload<B> p;
    p.hidden = hidden;
    auto pt = backend.encode(values, level, scale);
    if (hidden)
        p.ct = backend.encrypt(pt);
    else
        p.pt = std::move(pt);
    return p;
}

template <typename B>
PackedPayload<B> make_broadcast_payload(B& backend, double value, bool hidden, size_t level,
                                        double scale) {
    PackedPayload<B> p;
    p.hidden = hidden;
    auto pt = backend.encode_broadcast(value, level, scale);
    if (hidden)
        p.ct = backend.encrypt(pt);
    else
        p.pt = std::move(pt);
    return p;
}

inline std::vector<bool> hidden_mask(const std::vector<size_t>& hidden, size_t count,
                                     const char* what) {
    std::vector<bool> mask(count, false);
    for (size_t g : hidden) {
        if (g >= count)
            throw std::invalid_argument(std::string(what) + ": plan references group " +
                                        std::to_string(g) + " of " + std::to_string(count));
        mask[g] = true;
    }
    return mask;
}

// Scale and level of the bias payload so it matches the products it is
// added to in the given mode.
template <typename B>
std::pair<size_t, double> bias_target(const B& backend, EvalMode mode) {
    double sq = backend.default_scale() * backend.default_scale();
    if (mode == EvalMode::relin_only) return {backend.top_level(), sq};
    return {backend.top_level() - 1, backend.scale_after_mul_rescale()};
}

}  // namespace detail

// ---- input packing ----------------------------------------------------------

// The layer input is always a single ciphertext (vector replicated across
// the slots so rotations act cyclically within the padded span).
template <typename B>
typename B::Ct pack_fc_input(B& backend, const std::vector<double>& v, FcPackingKind kind) {
    size_t M = v.size();
    size_t span = next_pow2(M);
    if (kind == FcPackingKind::diagonal && span != M)
        throw std::invalid_argument("pack_fc_input: diagonal packing needs power-of-two inputs");
    if (span > backend.slot_count())
        throw std::invalid_argument("pack_fc_input: input exceeds slot capacity");
    std::vector<double> slots(backend.slot_count(), 0.0);
    for (size_t t = 0; t < slots.size(); ++t) {
        size_t u = t % span;
        slots[t] = u < M ? v[u] : 0.0;
    }
    return backend.encrypt(backend.encode(slots, backend.top_level(), backend.default_scale()));
}

template <typename B>
typename B::Ct pack_conv_input(B& backend, const nn::Tensor& image, const ConvGeometry& geom) {
    size_t C = geom.dims.in_channels, H = geom.dims.height, W = geom.dims.width;
    if (image.shape != std::vector<size_t>{C, H, W})
        throw std::invalid_argument("pack_conv_input: image shape mismatch");
    if (geom.slots_needed() > backend.slot_count())
        throw std::invalid_argument("pack_conv_input: image too large for slot count");
    std::vector<double> slots(backend.slot_count(), 0.0);
    for (size_t c = 0; c < C; ++c)
        for (size_t y = 0; y < H; ++y)
            for (size_t x = 0; x < W; ++x)
                slots[c * geom.block + (y + geom.pad) * geom.block_w + (x + geom.pad)] =
                    image.data[(c * H + y) * W + x];
    return backend.encrypt(backend.encode(slots, backend.top_level(), backend.default_scale()));
}

// ---- FC packing -------------------------------------------------------------

template <typename B>
PackedFcLayer<B> pack_fc(B& backend, const nn::Tensor& w, const nn::Tensor& b, FcPackingKind kind,
                         const leak::LayerPlan& plan, EvalMode mode) {
    if (w.rank() != 2) throw std::invalid_argument("pack_fc: weight tensor must be M x N");
    size_t M = w.dim(0), N = w.dim(1);
    if (b.size() != N) throw std::invalid_argument("pack_fc: bias length mismatch");
    if (plan.scheme != fc_kind_scheme(kind))
        throw std::invalid_argument("pack_fc: plan scheme does not match packing kind");

    PackedFcLayer<B> layer;
    layer.kind = kind;
    layer.mode = mode;
    layer.M = M;
    layer.N = N;
    layer.padded_m = next_pow2(M);
    layer.bias_hidden = plan.bias_hidden;
    size_t slots = backend.slot_count();
    size_t top = backend.top_level();
    double scale = backend.default_scale();
    auto [bias_level, bias_scale] = detail::bias_target(backend, mode);

    if (kind == FcPackingKind::naive || kind == FcPackingKind::hybrid) {
        auto mask = detail::hidden_mask(plan.hidden, N, "pack_fc");
        if (layer.padded_m > slots)
            throw std::invalid_argument("pack_fc: layer exceeds slot capacity");
        std::vector<double> vec(slots);
        for (size_t j = 0; j < N; ++j) {
            for (size_t t = 0; t < slots; ++t) {
                size_t u = t % layer.padded_m;
                vec[t] = u < M ? static_cast<double>(w.data[u * N + j]) : 0.0;
            }
            layer.groups.push_back(detail::make_payload(backend, vec, mask[j], top, scale));
        }
        for (size_t j = 0; j < N; ++j)
            layer.bias.push_back(detail::make_broadcast_payload(
                backend, static_cast<double>(b.data[j]), plan.bias_hidden, bias_level, bias_scale));
    } else {
        if (layer.padded_m != M)
            throw std::invalid_argument("pack_fc: diagonal packing needs power-of-two inputs");
        if (N > M)
            throw std::invalid_argument("pack_fc: diagonal packing needs N <= M");
        if (M > slots) throw std::invalid_argument("pack_fc: layer exceeds slot capacity");
        auto mask = detail::hidden_mask(plan.hidden, M, "pack_fc");
        layer.baby = diagonal_baby_steps(M);
        layer.giant = M / layer.baby;
        std::vector<double> vec(slots);
        for (size_t d = 0; d < M; ++d) {
            size_t g = d / layer.baby;
            size_t pre = (g * layer.baby) % M;
            for (size_t t = 0; t < slots; ++t) {
                size_t u = t % M;
                size_t j = (u + M - pre) % M;  // slot after the giant rotation
                vec[t] = j < N ? static_cast<double>(w.data[((d + j) % M) * N + j]) : 0.0;
            }
            layer.groups.push_back(detail::make_payload(backend, vec, mask[d], top, scale));
        }
        std::vector<double> bias_vec(slots, 0.0);
        for (size_t t = 0; t < slots; ++t) {
            size_t u = t % M;
            bias_vec[t] = u < N ? static_cast<double>(b.data[u]) : 0.0;
        }
        PackedPayload<B> bp;
        bp.hidden = plan.bias_hidden;
        auto pt = backend.encode(bias_vec, bias_level, bias_scale);
        if (plan.bias_hidden)
            bp.ct = backend.encrypt(pt);
        else
            bp.pt = std::move(pt);
        layer.bias.push_back(std::move(bp));
    }
    return layer;
}

// ---- conv packing -----------------------------------------------------------

template <typename B>
PackedConvLayer<B> pack_conv(B& backend, const nn::Tensor& w, const nn::Tensor& b,
                             leak::GroupScheme granularity, const leak::LayerPlan& plan,
                             EvalMode mode, size_t height, size_t width) {
    if (w.rank() != 4) throw std::invalid_argument("pack_conv: weight tensor must be k x k x M x N");
    if (granularity != leak::GroupScheme::conv_per_filter &&
        granularity != leak::GroupScheme::conv_per_kernel)
        throw std::invalid_argument("pack_conv: not a conv grouping scheme");
    if (plan.scheme != granularity)
        throw std::invalid_argument("pack_conv: plan scheme does not match granularity");

    size_t k = w.dim(0), M = w.dim(2), N = w.dim(3);
    if (b.size() != N) throw std::invalid_argument("pack_conv: bias length mismatch");

    PackedConvLayer<B> layer;
    layer.granularity = granularity;
    layer.mode = mode;
    layer.geom = ConvGeometry::make({k, M, N, height, width});
    layer.bias_hidden = plan.bias_hidden;
    if (layer.geom.slots_needed() > backend.slot_count())
        throw std::invalid_argument("pack_conv: image too large for slot count");

    size_t slots = backend.slot_count();
    size_t top = backend.top_level();
    double scale = backend.default_scale();
    auto [bias_level, bias_scale] = detail::bias_target(backend, mode);
    const ConvGeometry& geom = layer.geom;

    std::vector<double> vec(slots);
    if (granularity == leak::GroupScheme::conv_per_filter) {
        auto mask = detail::hidden_mask(plan.hidden, N, "pack_conv");
        layer.taps.resize(N);
        for (size_t f = 0; f < N; ++f) {
            for (size_t ky = 0; ky < k; ++ky)
                for (size_t kx = 0; kx < k; ++kx) {
                    for (size_t t = 0; t < slots; ++t) {
                        size_t c = t / geom.block;
                        vec[t] = c < M ? static_cast<double>(w.data[((ky * k + kx) * M + c) * N + f])
                                       : 0.0;
                    }
                    layer.taps[f].push_back(detail::make_payload(backend, vec, mask[f], top, scale));
                }
        }
    } else {
        auto mask = detail::hidden_mask(plan.hidden, N * M, "pack_conv");
        layer.taps.resize(N * M);
        for (size_t f = 0; f < N; ++f)
            for (size_t c = 0; c < M; ++c) {
                size_t g = f * M + c;
                for (size_t ky = 0; ky < k; ++ky)
                    for (size_t kx = 0; kx < k; ++kx) {
                        std::fill(vec.begin(), vec.end(), 0.0);
                        double wv = w.data[((ky * k + kx) * M + c) * N + f];
                        std::fill(vec.begin() + c * geom.block,
                                  vec.begin() + (c + 1) * geom.block, wv);
                        layer.taps[g].push_back(
                            detail::make_payload(backend, vec, mask[g], top, scale));
                    }
            }
    }
    for (size_t f = 0; f < N; ++f)
        layer.bias.push_back(detail::make_broadcast_payload(
            backend, static_cast<double>(b.data[f]), plan.bias_hidden, bias_level, bias_scale));
    return layer;
}

// ---- evaluation -------------------------------------------------------------

template <typename B>
struct EvalResult {
    std::vector<typename B::Ct> outputs;
    he::OpLedger ops;            // this evaluation only
    double mult_seconds = 0.0;   // wall time of the multiplication phase
    double total_seconds = 0.0;
};

namespace detail {

template <typename B>
typename B::Ct group_product(B& backend, const typename B::Ct& input,
                             const PackedPayload<B>& payload, EvalMode mode) {
    typename B::Ct prod = payload.hidden ? backend.relinearize(backend.mul_ct(input, *payload.ct))
                                         : backend.mul_pt(input, *payload.pt);
    if (mode == EvalMode::rescale_all) prod = backend.rescale(prod);
    return prod;
}

template <typename B>
typename B::Ct add_bias(B& backend, const typename B::Ct& acc, const PackedPayload<B>& bias) {
    return bias.hidden ? backend.add_ct(acc, *bias.ct) : backend.add_pt(acc, *bias.pt);
}

using Clock = std::chrono::steady_clock;

inline double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace detail

template <typename B>
EvalResult<B> eval_fc_he(B& backend, const PackedFcLayer<B>& layer, const typename B::Ct& input) {
    EvalResult<B> result;
    he::OpLedger before = backend.ledger();
    auto t0 = detail::Clock::now();

    if (layer.kind == FcPackingKind::naive || layer.kind == FcPackingKind::hybrid) {
        std::vector<size_t> steps;
        for (size_t s = 1; s < layer.padded_m; s <<= 1) steps.push_back(s);
        backend.ensure_rotation_keys(steps);

        auto tm = detail::Clock::now();
        std::vector<typename B::Ct> prods;
        prods.reserve(layer.N);
        for (const auto& g : layer.groups)
            prods.push_back(detail::group_product(backend, input, g, layer.mode));
        result.mult_seconds = detail::seconds_since(tm);

        for (size_t j = 0; j < layer.N; ++j) {
            typename B::Ct acc = std::move(prods[j]);
            for (size_t s : steps) acc = backend.add_ct(acc, backend.rotate(acc, s));
            acc = detail::add_bias(backend, acc, layer.bias[j]);
            result.outputs.push_back(std::move(acc));
        }
    } else {
        std::vector<size_t> steps;
        for (size_t b = 1; b < layer.baby; ++b) steps.push_back(b);
        for (size_t g = 1; g < layer.giant; ++g) steps.push_back(g * layer.baby);
        backend.ensure_rotation_keys(steps);

        std::vector<typename B::Ct> rotated;
        rotated.reserve(layer.baby);
        rotated.push_back(input);
        for (size_t bstep = 1; bstep < layer.baby; ++bstep)
            rotated.push_back(backend.rotate(input, bstep));

        auto tm = detail::Clock::now();
        std::vector<typename B::Ct> prods;
        prods.reserve(layer.M);
        for (size_t d = 0; d < layer.M; ++d)
            prods.push_back(
                detail::group_product(backend, rotated[d % layer.baby], layer.groups[d], layer.mode));
        result.mult_seconds = detail::seconds_since(tm);

        std::optional<typename B::Ct> acc;
        for (size_t g = 0; g < layer.giant; ++g) {
            typename B::Ct inner = std::move(prods[g * layer.baby]);
            for (size_t b = 1; b < layer.baby; ++b)
                inner = backend.add_ct(inner, prods[g * layer.baby + b]);
            if (g == 0)
                acc = std::move(inner);
            else
                acc = backend.add_ct(*acc, backend.rotate(inner, g * layer.baby));
        }
        *acc = detail::add_bias(backend, *acc, layer.bias[0]);
        result.outputs.push_back(std::move(*acc));
    }

    result.total_seconds = detail::seconds_since(t0);
    result.ops = backend.ledger().since(before);
    return result;
}

template <typename B>
EvalResult<B> eval_conv_he(B& backend, const PackedConvLayer<B>& layer,
                           const typename B::Ct& input) {
    EvalResult<B> result;
    he::OpLedger before = backend.ledger();
    auto t0 = detail::Clock::now();

    const ConvGeometry& geom = layer.geom;
    size_t k = geom.dims.kernel, M = geom.dims.in_channels, N = geom.dims.out_channels;
    size_t slots = backend.slot_count();

    std::vector<size_t> steps;
    std::vector<long> deltas;
    for (size_t ky = 0; ky < k; ++ky)
        for (size_t kx = 0; kx < k; ++kx) {
            long dy = static_cast<long>(ky) - static_cast<long>(geom.pad);
            long dx = static_cast<long>(kx) - static_cast<long>(geom.pad);
            deltas.push_back(dy * static_cast<long>(geom.block_w) + dx);
        }
    for (long d : deltas)
        if (d != 0) steps.push_back(static_cast<size_t>((d % static_cast<long>(slots) +
                                                         static_cast<long>(slots)) %
                                                        static_cast<long>(slots)));
    for (size_t c = 1; c < M; ++c) steps.push_back(c * geom.block);
    backend.ensure_rotation_keys(steps);

    std::vector<typename B::Ct> rotated;
    rotated.reserve(deltas.size());
    for (long d : deltas) {
        size_t step = static_cast<size_t>(
            (d % static_cast<long>(slots) + static_cast<long>(slots)) % static_cast<long>(slots));
        rotated.push_back(backend.rotate(input, step));
    }

    bool per_filter = layer.granularity == leak::GroupScheme::conv_per_filter;

    auto tm = detail::Clock::now();
    // products, grouped per filter in tap order (then channel order per kernel)
    std::vector<std::vector<typename B::Ct>> prods(N);
    for (size_t f = 0; f < N; ++f) {
        if (per_filter) {
            for (size_t t = 0; t < k * k; ++t)
                prods[f].push_back(
                    detail::group_product(backend, rotated[t], layer.taps[f][t], layer.mode));
        } else {
            for (size_t c = 0; c < M; ++c)
                for (size_t t = 0; t < k * k; ++t)
                    prods[f].push_back(detail::group_product(backend, rotated[t],
                                                             layer.taps[f * M + c][t], layer.mode));
        }
    }
    result.mult_seconds = detail::seconds_since(tm);

    for (size_t f = 0; f < N; ++f) {
        typename B::Ct sum = std::move(prods[f][0]);
        for (size_t i = 1; i < prods[f].size(); ++i) sum = backend.add_ct(sum, prods[f][i]);
        typename B::Ct acc = sum;
        for (size_t c = 1; c < M; ++c)
            acc = backend.add_ct(acc, backend.rotate(sum, c * geom.block));
        acc = detail::add_bias(backend, acc, layer.bias[f]);
        result.outputs.push_back(std::move(acc));
    }

    result.total_seconds = detail::seconds_since(t0);
    result.ops = backend.ledger().since(before);
    return result;
}

// ---- output decoding (exact backend) ----------------------------------------

template <typename B>
std::vector<double> decrypt_fc_output(B& backend, const PackedFcLayer<B>& layer,
                                      const EvalResult<B>& result) {
    std::vector<double> out(layer.N, 0.0);
    if (layer.kind == FcPackingKind::diagonal) {
        auto slots = backend.decrypt_values(result.outputs[0]);
        if (slots.empty()) return {};
        for (size_t j = 0; j < layer.N; ++j) out[j] = slots[j];
    } else {
        for (size_t j = 0; j < layer.N; ++j) {
            auto slots = backend.decrypt_values(result.outputs[j]);
            if (slots.empty()) return {};
            out[j] = slots[0];
        }
    }
    return out;
}

template <typename B>
std::vector<nn::Tensor> decrypt_conv_output(B& backend, const PackedConvLayer<B>& layer,
                                            const EvalResult<B>& result) {
    const ConvGeometry& geom = layer.geom;
    std::vector<nn::Tensor> maps;
    for (const auto& ct : result.outputs) {
        auto slots = backend.decrypt_values(ct);
        if (slots.empty()) return {};
        nn::Tensor t({geom.dims.height, geom.dims.width});
        for (size_t y = 0; y < geom.dims.height; ++y)
            for (size_t x = 0; x < geom.dims.width; ++x)
                t.data[y * geom.dims.width + x] = static_cast<float>(
                    slots[(y + geom.pad) * geom.block_w + (x + geom.pad)]);
        maps.push_back(std::move(t));
    }
    return maps;
}

}  // namespace poi::pack

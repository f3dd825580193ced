// Copyright (c) 2026 the poi authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "poi/nn/network.hpp"

namespace poi::nn {

// Weight file format "POW1": magic, 32-bit LE version, tensor count, then
// per tensor: name length + UTF-8 name, rank, dims (32-bit LE), values as
// 32-bit LE IEEE-754.  Tensor names are "layer<i>.<field>".

namespace detail {

inline void write_le32(std::ostream& out, uint32_t v) {
    char b[4] = {static_cast<char>(v), static_cast<char>(v >> 8), static_cast<char>(v >> 16),
                 static_cast<char>(v >> 24)};
    out.write(b, 4);
}

inline uint32_t read_le32(std::istream& in, const std::string& path) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) throw std::runtime_error(path + ": truncated file");
    return uint32_t(b[0]) | (uint32_t(b[1]) << 8) | (uint32_t(b[2]) << 16) | (uint32_t(b[3]) << 24);
}

inline void write_f32(std::ostream& out, float v) {
    uint32_t bits;
    std::memcpy(&bits, &v, 4);
    write_le32(out, bits);
}

inline float read_f32(std::istream& in, const std::string& path) {
    uint32_t bits = read_le32(in, path);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
}

}  // namespace detail

inline constexpr char kWeightMagic[4] = {'P', 'O', 'W', '1'};
inline constexpr uint32_t kWeightVersion = 1;

inline void save_weights(const std::string& path, const WeightStore& ws) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");

    std::vector<std::pair<std::string, const Tensor*>> entries;
    for (const auto& [i, lw] : ws.layers) {
        std::string prefix = "layer" + std::to_string(i) + ".";
        if (lw.has_weight()) {
            entries.emplace_back(prefix + "weight", &lw.weight);
            entries.emplace_back(prefix + "bias", &lw.bias);
        }
        if (lw.has_batchnorm()) {
            entries.emplace_back(prefix + "gamma", &lw.gamma);
            entries.emplace_back(prefix + "beta", &lw.beta);
            entries.emplace_back(prefix + "running_mean", &lw.running_mean);
            entries.emplace_back(prefix + "running_var", &lw.running_var);
        }
    }

    out.write(kWeightMagic, 4);
    detail::write_le32(out, kWeightVersion);
    detail::write_le32(out, static_cast<uint32_t>(entries.size()));
    for (const auto& [name, t] : entries) {
        detail::write_le32(out, static_cast<uint32_t>(name.size()));
        out.write(name.data(), static_cast<std::streamsize>(name.size()));
        detail::write_le32(out, static_cast<uint32_t>(t->rank()));
        for (size_t d : t->shape) detail::write_le32(out, static_cast<uint32_t>(d));
        for (float v : t->data) detail::write_f32(out, v);
    }
    if (!out) throw std::runtime_error(path + ": write failed");
}

inline WeightStore load_weights(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(path + ": cannot open");
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kWeightMagic, 4) != 0)
        throw std::runtime_error(path + ": bad weight-file magic");
    uint32_t version = detail::read_le32(in, path);
    if (version != kWeightVersion)
        throw std::runtime_error(path + ": unsupported weight-file version");
    uint32_t count = detail::read_le32(in, path);

    WeightStore ws;
    for (uint32_t e = 0; e < count; ++e) {
        uint32_t name_len = detail::read_le32(in, path);
        std::string name(name_len, '\0');
        if (!in.read(name.data(), name_len)) throw std::runtime_error(path + ": truncated file");
        uint32_t rank = detail::read_le32(in, path);
        std::vector<size_t> shape(rank);
        size_t total = 1;
        for (auto& d : shape) {
            d = detail::read_le32(in, path);
            total *= d;
        }
        Tensor t(shape);
        for (size_t i = 0; i < total; ++i) t.data[i] = detail::read_f32(in, path);

        if (name.rfind("layer", 0) != 0)
            throw std::runtime_error(path + ": unknown tensor name '" + name + "'");
        size_t dot = name.find('.');
        if (dot == std::string::npos)
            throw std::runtime_error(path + ": malformed tensor name '" + name + "'");
        size_t layer = std::stoul(name.substr(5, dot - 5));
        std::string field = name.substr(dot + 1);
        LayerWeights& lw = ws.layers[layer];
        if (field == "weight")
            lw.weight = std::move(t);
        else if (field == "bias")
            lw.bias = std::move(t);
        else if (field == "gamma")
            lw.gamma = std::move(t);
        else if (field == "beta")
            lw.beta = std::move(t);
        else if (field == "running_mean")
            lw.running_mean = std::move(t);
        else if (field == "running_var")
            lw.running_var = std::move(t);
        else
            throw std::runtime_error(path + ": unknown tensor field '" + field + "'");
    }
    return ws;
}

}  // namespace poi::nn

// Copyright (c) 2026 the poi authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "poi/nn/tensor.hpp"

namespace poi::nn {

struct Dataset {
    std::vector<Tensor> images;  // each [C,H,W], values in [0,1]
    std::vector<int> labels;
    size_t classes = 0;
    std::string split;  // "train" or "test"

    size_t size() const { return images.size(); }

    void check_valid() const {
        if (images.size() != labels.size())
            throw std::invalid_argument("Dataset: image/label count mismatch");
        for (int l : labels)
            if (l < 0 || static_cast<size_t>(l) >= classes)
                throw std::invalid_argument("Dataset: label out of range");
    }
};

namespace detail {

inline uint32_t read_be32(std::istream& in, const std::string& path) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4))
        throw std::runtime_error(path + ": truncated file");
    return (uint32_t(b[0]) << 24) | (uint32_t(b[1]) << 16) | (uint32_t(b[2]) << 8) | uint32_t(b[3]);
}

inline void write_be32(std::ostream& out, uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
    out.write(reinterpret_cast<char*>(b), 4);
}

}  // namespace detail

// ---- IDX (big-endian magic, big-endian dims, raw bytes) -------------------

inline constexpr uint32_t kIdxImageMagic = 0x00000803;
inline constexpr uint32_t kIdxLabelMagic = 0x00000801;

inline std::vector<Tensor> load_idx_images(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(path + ": cannot open");
    uint32_t magic = detail::read_be32(in, path);
    if (magic != kIdxImageMagic)
        throw std::runtime_error(path + ": bad IDX image magic");
    uint32_t count = detail::read_be32(in, path);
    uint32_t rows = detail::read_be32(in, path);
    uint32_t cols = detail::read_be32(in, path);
    std::vector<Tensor> images;
    images.reserve(count);
    std::vector<unsigned char> buf(static_cast<size_t>(rows) * cols);
    for (uint32_t i = 0; i < count; ++i) {
        if (!in.read(reinterpret_cast<char*>(buf.data()), buf.size()))
            throw std::runtime_error(path + ": truncated file");
        Tensor t({1, rows, cols});
        for (size_t j = 0; j < buf.size(); ++j) t.data[j] = buf[j] / 255.0f;
        images.push_back(std::move(t));
    }
    return images;
}

inline std::vector<int> load_idx_labels(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(path + ": cannot open");
    uint32_t magic = detail::read_be32(in, path);
    if (magic != kIdxLabelMagic)
        throw std::runtime_error(path + ": bad IDX label magic");
    uint32_t count = detail::read_be32(in, path);
    std::vector<unsigned char> buf(count);
    if (!in.read(reinterpret_cast<char*>(buf.data()), buf.size()))
        throw std::runtime_error(path + ": truncated file");
    return std::vector<int>(buf.begin(), buf.end());
}

inline void save_idx_images(const std::string& path, const std::vector<Tensor>& images) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    detail::write_be32(out, kIdxImageMagic);
    detail::write_be32(out, static_cast<uint32_t>(images.size()));
    uint32_t rows = images.empty() ? 0 : static_cast<uint32_t>(images[0].dim(1));
    uint32_t cols = images.empty() ? 0 : static_cast<uint32_t>(images[0].dim(2));
    detail::write_be32(out, rows);
    detail::write_be32(out, cols);
    for (const Tensor& t : images)
        for (float v : t.data) {
            auto b = static_cast<unsigned char>(std::clamp(v, 0.0f, 1.0f) * 255.0f + 0.5f);
            out.put(static_cast<char>(b));
        }
}

inline void save_idx_labels(const std::string& path, const std::vector<int>& labels) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    detail::write_be32(out, kIdxLabelMagic);
    detail::write_be32(out, static_cast<uint32_t>(labels.size()));
    for (int l : labels) out.put(static_cast<char>(l));
}

inline Dataset load_dataset_idx(const std::string& image_path, const std::string& label_path,
                                const std::string& split) {
    Dataset d;
    d.images = load_idx_images(image_path);
    d.labels = load_idx_labels(label_path);
    d.split = split;
    if (d.images.size() != d.labels.size())
        throw std::runtime_error(image_path + ": image/label count mismatch");
    int mx = -1;
    for (int l : d.labels) mx = std::max(mx, l);
    d.classes = static_cast<size_t>(mx + 1) < 10 ? 10 : static_cast<size_t>(mx + 1);
    d.check_valid();
    return d;
}

// ---- CIFAR-10 binary (3073-byte records, channel-major pixels) ------------

inline constexpr size_t kCifarRecordBytes = 3073;

inline Dataset load_dataset_cifar(const std::vector<std::string>& bin_paths,
                                  const std::string& split) {
    Dataset d;
    d.classes = 10;
    d.split = split;
    for (const auto& path : bin_paths) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw std::runtime_error(path + ": cannot open");
        in.seekg(0, std::ios::end);
        auto bytes = static_cast<size_t>(in.tellg());
        in.seekg(0);
        if (bytes == 0 || bytes % kCifarRecordBytes != 0)
            throw std::runtime_error(path + ": size is not a multiple of 3073 bytes");
        std::vector<unsigned char> rec(kCifarRecordBytes);
        for (size_t r = 0; r < bytes / kCifarRecordBytes; ++r) {
            if (!in.read(reinterpret_cast<char*>(rec.data()), rec.size()))
                throw std::runtime_error(path + ": truncated file");
            if (rec[0] > 9) throw std::runtime_error(path + ": label byte out of range");
            d.labels.push_back(rec[0]);
            Tensor t({3, 32, 32});
            for (size_t j = 0; j < 3072; ++j) t.data[j] = rec[1 + j] / 255.0f;
            d.images.push_back(std::move(t));
        }
    }
    d.check_valid();
    return d;
}

// ---- subsetting ------------------------------------------------------------

inline Dataset take_subset(const Dataset& d, size_t count, uint64_t seed) {
    std::vector<size_t> idx(d.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::mt19937_64 rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    count = std::min(count, d.size());
    Dataset out;
    out.classes = d.classes;
    out.split = d.split;
    for (size_t i = 0; i < count; ++i) {
        out.images.push_back(d.images[idx[i]]);
        out.labels.push_back(d.labels[idx[i]]);
    }
    return out;
}

// Exactly `per_class` samples of every class, in class-major order.
inline Dataset balanced_subset(const Dataset& d, size_t per_class) {
    Dataset out;
    out.classes = d.classes;
    out.split = d.split;
    for (size_t c = 0; c < d.classes; ++c) {
        size_t got = 0;
        for (size_t i = 0; i < d.size() && got < per_class; ++i) {
            if (static_cast<size_t>(d.labels[i]) == c) {
                out.images.push_back(d.images[i]);
                out.labels.push_back(d.labels[i]);
                ++got;
            }
        }
        if (got < per_class)
            throw std::runtime_error("balanced_subset: class " + std::to_string(c) +
                                     " has only " + std::to_string(got) + " samples");
    }
    return out;
}

}  // namespace poi::nn

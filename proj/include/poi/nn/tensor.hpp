// Copyright (c) 2026 the poi authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace poi::nn {

// Dense row-major tensor of 32-bit floats.
struct Tensor {
    std::vector<size_t> shape;
    std::vector<float> data;

    Tensor() = default;
    explicit Tensor(std::vector<size_t> s) : shape(std::move(s)) {
        data.assign(element_count(shape), 0.0f);
    }
    Tensor(std::vector<size_t> s, std::vector<float> d) : shape(std::move(s)), data(std::move(d)) {
        if (data.size() != element_count(shape))
            throw std::invalid_argument("Tensor: shape/data size mismatch");
    }

    static size_t element_count(const std::vector<size_t>& s) {
        return std::accumulate(s.begin(), s.end(), size_t{1}, std::multiplies<size_t>());
    }

    size_t size() const { return data.size(); }
    size_t dim(size_t i) const { return shape.at(i); }
    size_t rank() const { return shape.size(); }

    float& operator[](size_t i) { return data[i]; }
    float operator[](size_t i) const { return data[i]; }

    bool all_finite() const {
        for (float v : data)
            if (!std::isfinite(v)) return false;
        return true;
    }

    void check_valid(const std::string& what) const {
        if (data.size() != element_count(shape))
            throw std::invalid_argument(what + ": shape/data size mismatch");
        if (!all_finite()) throw std::invalid_argument(what + ": non-finite values");
    }
};

}  // namespace poi::nn

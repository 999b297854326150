#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <vector>

#include "quorum/error.hpp"

namespace quorum {

// Dense row-major tensor of doubles. Kept deliberately small: shape plus a
// flat value buffer, no views, no broadcasting.
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> values;

    Tensor() = default;

    explicit Tensor(std::vector<std::size_t> shape_in)
        : shape(std::move(shape_in)), values(numel_of(shape), 0.0) {}

    Tensor(std::vector<std::size_t> shape_in, std::vector<double> values_in)
        : shape(std::move(shape_in)), values(std::move(values_in)) {
        if (values.size() != numel_of(shape)) {
            throw ShapeError("tensor: value count does not match shape product");
        }
    }

    static std::size_t numel_of(const std::vector<std::size_t>& s) {
        std::size_t n = 1;
        for (std::size_t d : s) n *= d;
        return s.empty() ? 0 : n;
    }

    std::size_t numel() const { return values.size(); }

    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }

    bool all_finite() const {
        for (double v : values) {
            if (!std::isfinite(v)) return false;
        }
        return true;
    }
};

inline bool same_shape(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    return a == b;
}

}  // namespace quorum

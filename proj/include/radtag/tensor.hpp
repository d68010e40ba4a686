#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

#include "radtag/common.hpp"

namespace radtag {

// Dense row-major tensor of doubles; rank 0 (scalar) to 2 in practice.
struct Tensor {
    std::vector<size_t> shape;
    std::vector<double> data;

    Tensor() = default;
    explicit Tensor(std::vector<size_t> s) : shape(std::move(s)) {
        data.assign(count(shape), 0.0);
    }
    Tensor(std::vector<size_t> s, std::vector<double> d)
        : shape(std::move(s)), data(std::move(d)) {
        if (data.size() != count(shape))
            throw DimensionMismatch("tensor data does not match shape");
    }

    static size_t count(const std::vector<size_t>& s) {
        size_t n = 1;
        for (size_t d : s) n *= d;
        return n;
    }

    size_t size() const { return data.size(); }
    size_t rows() const { return shape.empty() ? 1 : shape[0]; }
    size_t cols() const { return shape.size() < 2 ? 1 : shape[1]; }

    double& at(size_t i, size_t j) { return data[i * cols() + j]; }
    double at(size_t i, size_t j) const { return data[i * cols() + j]; }

    static Tensor scalar(double v) { return Tensor({1}, {v}); }
    static Tensor vec(std::vector<double> d) {
        size_t n = d.size();
        return Tensor({n}, std::move(d));
    }
};

}  // namespace radtag

#pragma once

#include <cstdint>
#include <numeric>
#include <vector>

#include "subit/errors.hpp"

namespace subit {

// Dense n-dimensional array with an optional same-shape gradient buffer.
template <typename T>
struct Tensor {
    std::vector<int> shape;
    std::vector<T> data;
    std::vector<T> grad;

    Tensor() = default;
    explicit Tensor(std::vector<int> s) : shape(std::move(s)) {
        data.assign(static_cast<size_t>(numel()), T(0));
    }

    int64_t numel() const {
        int64_t n = 1;
        for (int d : shape) n *= d;
        return n;
    }

    void alloc_grad() { grad.assign(data.size(), T(0)); }
    void zero_grad() { std::fill(grad.begin(), grad.end(), T(0)); }

    void require_shape(const std::vector<int>& s, const char* what) const {
        if (shape != s) throw ShapeMismatch(std::string("unexpected tensor shape in ") + what);
    }
};

} // namespace subit

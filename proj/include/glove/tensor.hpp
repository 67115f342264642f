#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "glove/errors.hpp"

namespace glove {

// A single feature map: `ch` rows of `len` contiguous float32 samples.
// Flat vectors are represented as ch=N, len=1.
struct Tensor {
    int ch = 0;
    int len = 0;
    std::vector<float> v;

    Tensor() = default;
    Tensor(int c, int l) : ch(c), len(l), v(size_t(c) * size_t(l), 0.0f) {
        if (c <= 0 || l <= 0) throw ShapeError("tensor dims must be positive");
    }

    float& at(int c, int i) { return v[size_t(c) * len + i]; }
    float at(int c, int i) const { return v[size_t(c) * len + i]; }
    float* row(int c) { return v.data() + size_t(c) * len; }
    const float* row(int c) const { return v.data() + size_t(c) * len; }
    int size() const { return ch * len; }
};

// Batch of feature maps, contiguous (n, ch, len).
struct Batch {
    int n = 0;
    int ch = 0;
    int len = 0;
    std::vector<float> v;

    Batch() = default;
    Batch(int n_, int c, int l)
        : n(n_), ch(c), len(l), v(size_t(n_) * size_t(c) * size_t(l), 0.0f) {
        if (n_ <= 0 || c <= 0 || l <= 0) throw ShapeError("batch dims must be positive");
    }

    size_t stride() const { return size_t(ch) * len; }
    float* sample(int b) { return v.data() + size_t(b) * stride(); }
    const float* sample(int b) const { return v.data() + size_t(b) * stride(); }
    float* row(int b, int c) { return sample(b) + size_t(c) * len; }
    const float* row(int b, int c) const { return sample(b) + size_t(c) * len; }

    void put(int b, const Tensor& t) {
        if (t.ch != ch || t.len != len)
            throw ShapeError("tensor does not fit batch slot");
        std::copy(t.v.begin(), t.v.end(), sample(b));
    }
    Tensor get(int b) const {
        Tensor t(ch, len);
        std::copy(sample(b), sample(b) + stride(), t.v.begin());
        return t;
    }
};

}  // namespace glove

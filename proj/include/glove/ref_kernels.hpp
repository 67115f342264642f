#pragma once

// Serial reference kernels. Deliberately naive: output-centric loops with
// explicit bounds checks, no tiling, no pragmas. They exist as the ground
// truth the parallel kernels are tested against, and — being templated on the
// scalar type — as the double-precision forward used by the finite-difference
// gradient oracle. Do not optimise these.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace glove::ref {

// y[f][i] = b[f] + sum_{c,k} w[f][c][k] * x[c][i + k - (K-1)/2], zero padded.
template <typename T>
void conv1d_same(const T* x, int C, int L, const T* w, const T* b, int F, int K,
                 T* y) {
    int pad = (K - 1) / 2;
    for (int f = 0; f < F; ++f) {
        for (int i = 0; i < L; ++i) {
            T acc = b[f];
            for (int c = 0; c < C; ++c) {
                for (int k = 0; k < K; ++k) {
                    int j = i + k - pad;
                    if (j < 0 || j >= L) continue;
                    acc += w[(size_t(f) * C + c) * K + k] * x[size_t(c) * L + j];
                }
            }
            y[size_t(f) * L + i] = acc;
        }
    }
}

inline int pool_out_len(int L, int pool, int stride) {
    return L >= pool ? (L - pool) / stride + 1 : 1;
}

// Window [j*stride, j*stride+pool) clipped to L. Ties keep the first index.
template <typename T>
void maxpool1d(const T* x, int C, int L, int pool, int stride, T* y,
               int* argmax = nullptr) {
    int out = pool_out_len(L, pool, stride);
    for (int c = 0; c < C; ++c) {
        for (int j = 0; j < out; ++j) {
            int lo = j * stride;
            int hi = std::min(lo + pool, L);
            int best = lo;
            for (int i = lo + 1; i < hi; ++i)
                if (x[size_t(c) * L + i] > x[size_t(c) * L + best]) best = i;
            y[size_t(c) * out + j] = x[size_t(c) * L + best];
            if (argmax) argmax[size_t(c) * out + j] = best;
        }
    }
}

template <typename T>
void relu(const T* x, size_t n, T* y) {
    for (size_t i = 0; i < n; ++i) y[i] = x[i] > T(0) ? x[i] : T(0);
}

// y[u] = b[u] + sum_i w[u][i] * x[i]
template <typename T>
void dense(const T* x, int I, const T* w, const T* b, int U, T* y) {
    for (int u = 0; u < U; ++u) {
        T acc = b[u];
        for (int i = 0; i < I; ++i) acc += w[size_t(u) * I + i] * x[i];
        y[u] = acc;
    }
}

template <typename T>
void softmax(const T* x, int n, T* y) {
    T m = x[0];
    for (int i = 1; i < n; ++i) m = std::max(m, x[i]);
    T s = T(0);
    for (int i = 0; i < n; ++i) {
        y[i] = std::exp(x[i] - m);
        s += y[i];
    }
    for (int i = 0; i < n; ++i) y[i] /= s;
}

// Batch-stat normalisation over (batch, length) per channel, biased variance.
// xs: B samples each C*L. Single-sample inference uses the running stats path
// in the production engine; the reference only needs the training form.
template <typename T>
void batchnorm_train(const std::vector<const T*>& xs, int C, int L,
                     const T* gamma, const T* beta, T eps,
                     const std::vector<T*>& ys) {
    int B = int(xs.size());
    for (int c = 0; c < C; ++c) {
        T mean = T(0);
        for (int b = 0; b < B; ++b)
            for (int i = 0; i < L; ++i) mean += xs[b][size_t(c) * L + i];
        mean /= T(B) * T(L);
        T var = T(0);
        for (int b = 0; b < B; ++b)
            for (int i = 0; i < L; ++i) {
                T d = xs[b][size_t(c) * L + i] - mean;
                var += d * d;
            }
        var /= T(B) * T(L);
        T inv = T(1) / std::sqrt(var + eps);
        for (int b = 0; b < B; ++b)
            for (int i = 0; i < L; ++i)
                ys[b][size_t(c) * L + i] =
                    gamma[c] * (xs[b][size_t(c) * L + i] - mean) * inv + beta[c];
    }
}

// Per-sample per-channel standardisation followed by a learned affine map
// with one gain/shift per (channel, position).
template <typename T>
void channelnorm(const T* x, int C, int L, const T* gain, const T* shift, T eps,
                 T* y) {
    for (int c = 0; c < C; ++c) {
        T mean = T(0);
        for (int i = 0; i < L; ++i) mean += x[size_t(c) * L + i];
        mean /= T(L);
        T var = T(0);
        for (int i = 0; i < L; ++i) {
            T d = x[size_t(c) * L + i] - mean;
            var += d * d;
        }
        var /= T(L);
        T inv = T(1) / std::sqrt(var + eps);
        for (int i = 0; i < L; ++i)
            y[size_t(c) * L + i] = gain[size_t(c) * L + i] *
                                       (x[size_t(c) * L + i] - mean) * inv +
                                   shift[size_t(c) * L + i];
    }
}

}  // namespace glove::ref

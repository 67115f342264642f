#include "glove/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace glove::kern {
namespace {

// Eight-lane dot product: block sums stay in fixed lanes, tail is appended
// last, final reduction order is hardcoded. Vectorises without -ffast-math
// and gives the same bits no matter how the work was scheduled.
inline float dot8(const float* a, const float* b, int n) {
    float acc[8] = {0, 0, 0, 0, 0, 0, 0, 0};
    int i = 0;
    for (; i + 8 <= n; i += 8)
        for (int j = 0; j < 8; ++j) acc[j] += a[i + j] * b[i + j];
    float tail = 0.0f;
    for (; i < n; ++i) tail += a[i] * b[i];
    return (((acc[0] + acc[1]) + (acc[2] + acc[3])) +
            ((acc[4] + acc[5]) + (acc[6] + acc[7]))) +
           tail;
}

inline void axpy(float a, const float* x, int n, float* y) {
    for (int i = 0; i < n; ++i) y[i] += a * x[i];
}

}  // namespace

void conv1d_fwd(const float* x, int B, int C, int L, const float* w,
                const float* bias, int F, int K, float* y) {
    const int pad = (K - 1) / 2;
#pragma omp parallel for collapse(2) schedule(static)
    for (int b = 0; b < B; ++b) {
        for (int f = 0; f < F; ++f) {
            float* yr = y + (size_t(b) * F + f) * L;
            std::fill(yr, yr + L, bias[f]);
            for (int c = 0; c < C; ++c) {
                const float* xr = x + (size_t(b) * C + c) * L;
                const float* wr = w + (size_t(f) * C + c) * K;
                for (int k = 0; k < K; ++k) {
                    // y[i] += w[k] * x[i + k - pad] over the in-range i.
                    int lo = std::max(0, pad - k);
                    int hi = std::min(L, L + pad - k);
                    if (lo < hi) axpy(wr[k], xr + lo + k - pad, hi - lo, yr + lo);
                }
            }
        }
    }
}

void conv1d_bwd_input(const float* dy, int B, int C, int L, const float* w,
                      int F, int K, float* dx) {
    const int pad = (K - 1) / 2;
#pragma omp parallel for collapse(2) schedule(static)
    for (int b = 0; b < B; ++b) {
        for (int c = 0; c < C; ++c) {
            float* dxr = dx + (size_t(b) * C + c) * L;
            std::fill(dxr, dxr + L, 0.0f);
            for (int f = 0; f < F; ++f) {
                const float* dyr = dy + (size_t(b) * F + f) * L;
                const float* wr = w + (size_t(f) * C + c) * K;
                for (int k = 0; k < K; ++k) {
                    // dx[j] += w[k] * dy[j + pad - k]
                    int lo = std::max(0, k - pad);
                    int hi = std::min(L, L + k - pad);
                    if (lo < hi) axpy(wr[k], dyr + lo + pad - k, hi - lo, dxr + lo);
                }
            }
        }
    }
}

void conv1d_bwd_params(const float* dy, const float* x, int B, int C, int L,
                       int F, int K, float* dw, float* db) {
    const int pad = (K - 1) / 2;
#pragma omp parallel for collapse(2) schedule(static)
    for (int f = 0; f < F; ++f) {
        for (int c = 0; c < C; ++c) {
            float* dwr = dw + (size_t(f) * C + c) * K;
            for (int k = 0; k < K; ++k) {
                int lo = std::max(0, pad - k);
                int hi = std::min(L, L + pad - k);
                float acc = 0.0f;
                for (int b = 0; b < B; ++b) {
                    const float* dyr = dy + (size_t(b) * F + f) * L;
                    const float* xr = x + (size_t(b) * C + c) * L;
                    if (lo < hi) acc += dot8(dyr + lo, xr + lo + k - pad, hi - lo);
                }
                dwr[k] = acc;
            }
        }
    }
#pragma omp parallel for schedule(static)
    for (int f = 0; f < F; ++f) {
        float acc = 0.0f;
        for (int b = 0; b < B; ++b) {
            const float* dyr = dy + (size_t(b) * F + f) * L;
            for (int i = 0; i < L; ++i) acc += dyr[i];
        }
        db[f] = acc;
    }
}

int pool_out_len(int L, int pool, int stride) {
    return L >= pool ? (L - pool) / stride + 1 : 1;
}

void maxpool_fwd(const float* x, int B, int C, int L, int pool, int stride,
                 float* y, int* argmax) {
    const int out = pool_out_len(L, pool, stride);
#pragma omp parallel for collapse(2) schedule(static)
    for (int b = 0; b < B; ++b) {
        for (int c = 0; c < C; ++c) {
            const float* xr = x + (size_t(b) * C + c) * L;
            float* yr = y + (size_t(b) * C + c) * out;
            int* ar = argmax + (size_t(b) * C + c) * out;
            for (int j = 0; j < out; ++j) {
                int lo = j * stride;
                int hi = std::min(lo + pool, L);
                int best = lo;
                for (int i = lo + 1; i < hi; ++i)
                    if (xr[i] > xr[best]) best = i;  // ties keep first
                yr[j] = xr[best];
                ar[j] = best;
            }
        }
    }
}

void maxpool_bwd(const float* dy, const int* argmax, int B, int C, int L,
                 int pool, int stride, float* dx) {
    const int out = pool_out_len(L, pool, stride);
#pragma omp parallel for collapse(2) schedule(static)
    for (int b = 0; b < B; ++b) {
        for (int c = 0; c < C; ++c) {
            const float* dyr = dy + (size_t(b) * C + c) * out;
            const int* ar = argmax + (size_t(b) * C + c) * out;
            float* dxr = dx + (size_t(b) * C + c) * L;
            std::fill(dxr, dxr + L, 0.0f);
            for (int j = 0; j < out; ++j) dxr[ar[j]] += dyr[j];
        }
    }
}

void relu_fwd(const float* x, size_t n, float* y) {
#pragma omp parallel for schedule(static)
    for (ptrdiff_t i = 0; i < ptrdiff_t(n); ++i) y[i] = x[i] > 0.0f ? x[i] : 0.0f;
}

void relu_bwd(const float* dy, const float* x, size_t n, float* dx) {
#pragma omp parallel for schedule(static)
    for (ptrdiff_t i = 0; i < ptrdiff_t(n); ++i) dx[i] = x[i] > 0.0f ? dy[i] : 0.0f;
}

void scale_by_mask(const float* x, size_t n, const float* mask, float* y) {
#pragma omp parallel for schedule(static)
    for (ptrdiff_t i = 0; i < ptrdiff_t(n); ++i) y[i] = x[i] * mask[i];
}

void dense_fwd(const float* x, int B, int I, const float* w, const float* bias,
               int U, float* y) {
#pragma omp parallel for collapse(2) schedule(static)
    for (int b = 0; b < B; ++b) {
        for (int u = 0; u < U; ++u) {
            y[size_t(b) * U + u] =
                bias[u] + dot8(x + size_t(b) * I, w + size_t(u) * I, I);
        }
    }
}

void dense_bwd_input(const float* dy, int B, int I, const float* w, int U,
                     float* dx) {
#pragma omp parallel for schedule(static)
    for (int b = 0; b < B; ++b) {
        float* dxr = dx + size_t(b) * I;
        std::fill(dxr, dxr + I, 0.0f);
        const float* dyr = dy + size_t(b) * U;
        for (int u = 0; u < U; ++u) axpy(dyr[u], w + size_t(u) * I, I, dxr);
    }
}

void dense_bwd_params(const float* dy, const float* x, int B, int I, int U,
                      float* dw, float* db) {
#pragma omp parallel for schedule(static)
    for (int u = 0; u < U; ++u) {
        float* dwr = dw + size_t(u) * I;
        std::fill(dwr, dwr + I, 0.0f);
        float acc = 0.0f;
        for (int b = 0; b < B; ++b) {
            float g = dy[size_t(b) * U + u];
            axpy(g, x + size_t(b) * I, I, dwr);
            acc += g;
        }
        db[u] = acc;
    }
}

void softmax_fwd(const float* x, int B, int n, float* y) {
#pragma omp parallel for schedule(static)
    for (int b = 0; b < B; ++b) {
        const float* xr = x + size_t(b) * n;
        float* yr = y + size_t(b) * n;
        float m = xr[0];
        for (int i = 1; i < n; ++i) m = std::max(m, xr[i]);
        float s = 0.0f;
        for (int i = 0; i < n; ++i) {
            yr[i] = std::exp(xr[i] - m);
            s += yr[i];
        }
        float inv = 1.0f / s;
        for (int i = 0; i < n; ++i) yr[i] *= inv;
    }
}

void bn_batch_stats(const float* x, int B, int C, int L, float* mean,
                    float* var) {
    const double count = double(B) * double(L);
#pragma omp parallel for schedule(static)
    for (int c = 0; c < C; ++c) {
        double s = 0.0;
        for (int b = 0; b < B; ++b) {
            const float* xr = x + (size_t(b) * C + c) * L;
            for (int i = 0; i < L; ++i) s += xr[i];
        }
        double m = s / count;
        double v = 0.0;
        for (int b = 0; b < B; ++b) {
            const float* xr = x + (size_t(b) * C + c) * L;
            for (int i = 0; i < L; ++i) {
                double d = xr[i] - m;
                v += d * d;
            }
        }
        mean[c] = float(m);
        var[c] = float(v / count);
    }
}

void bn_fwd(const float* x, int B, int C, int L, const float* mean,
            const float* var, const float* gamma, const float* beta, float eps,
            float* y, float* xhat, float* inv_std) {
#pragma omp parallel for schedule(static)
    for (int c = 0; c < C; ++c)
        inv_std[c] = 1.0f / std::sqrt(var[c] + eps);
#pragma omp parallel for collapse(2) schedule(static)
    for (int b = 0; b < B; ++b) {
        for (int c = 0; c < C; ++c) {
            const float* xr = x + (size_t(b) * C + c) * L;
            float* hr = xhat + (size_t(b) * C + c) * L;
            float* yr = y + (size_t(b) * C + c) * L;
            const float m = mean[c], inv = inv_std[c], g = gamma[c], be = beta[c];
            for (int i = 0; i < L; ++i) {
                hr[i] = (xr[i] - m) * inv;
                yr[i] = g * hr[i] + be;
            }
        }
    }
}

void bn_bwd(const float* dy, const float* xhat, int B, int C, int L,
            const float* gamma, const float* inv_std, float* dx, float* dgamma,
            float* dbeta) {
    const double count = double(B) * double(L);
#pragma omp parallel for schedule(static)
    for (int c = 0; c < C; ++c) {
        double sum_dy = 0.0, sum_dy_h = 0.0;
        for (int b = 0; b < B; ++b) {
            const float* dyr = dy + (size_t(b) * C + c) * L;
            const float* hr = xhat + (size_t(b) * C + c) * L;
            for (int i = 0; i < L; ++i) {
                sum_dy += dyr[i];
                sum_dy_h += double(dyr[i]) * hr[i];
            }
        }
        dgamma[c] = float(sum_dy_h);
        dbeta[c] = float(sum_dy);
        const float gi = gamma[c] * inv_std[c];
        const float mdy = float(sum_dy / count);
        const float mdyh = float(sum_dy_h / count);
        for (int b = 0; b < B; ++b) {
            const float* dyr = dy + (size_t(b) * C + c) * L;
            const float* hr = xhat + (size_t(b) * C + c) * L;
            float* dxr = dx + (size_t(b) * C + c) * L;
            for (int i = 0; i < L; ++i)
                dxr[i] = gi * (dyr[i] - mdy - hr[i] * mdyh);
        }
    }
}

void cn_fwd(const float* x, int B, int C, int L, const float* gain,
            const float* shift, float eps, float* y, float* xhat,
            float* inv_std) {
#pragma omp parallel for collapse(2) schedule(static)
    for (int b = 0; b < B; ++b) {
        for (int c = 0; c < C; ++c) {
            const float* xr = x + (size_t(b) * C + c) * L;
            float* hr = xhat + (size_t(b) * C + c) * L;
            float* yr = y + (size_t(b) * C + c) * L;
            const float* gr = gain + size_t(c) * L;
            const float* sr = shift + size_t(c) * L;
            double s = 0.0;
            for (int i = 0; i < L; ++i) s += xr[i];
            const float m = float(s / L);
            double v = 0.0;
            for (int i = 0; i < L; ++i) {
                double d = double(xr[i]) - m;
                v += d * d;
            }
            const float inv = 1.0f / std::sqrt(float(v / L) + eps);
            inv_std[size_t(b) * C + c] = inv;
            for (int i = 0; i < L; ++i) {
                hr[i] = (xr[i] - m) * inv;
                yr[i] = gr[i] * hr[i] + sr[i];
            }
        }
    }
}

void cn_bwd(const float* dy, const float* xhat, int B, int C, int L,
            const float* gain, const float* inv_std, float* dx, float* dgain,
            float* dshift) {
#pragma omp parallel for collapse(2) schedule(static)
    for (int b = 0; b < B; ++b) {
        for (int c = 0; c < C; ++c) {
            const float* dyr = dy + (size_t(b) * C + c) * L;
            const float* hr = xhat + (size_t(b) * C + c) * L;
            float* dxr = dx + (size_t(b) * C + c) * L;
            const float* gr = gain + size_t(c) * L;
            const float inv = inv_std[size_t(b) * C + c];
            double sum_dh = 0.0, sum_dh_h = 0.0;
            for (int i = 0; i < L; ++i) {
                double dh = double(dyr[i]) * gr[i];
                sum_dh += dh;
                sum_dh_h += dh * hr[i];
            }
            const float mdh = float(sum_dh / L);
            const float mdhh = float(sum_dh_h / L);
            for (int i = 0; i < L; ++i)
                dxr[i] = inv * (dyr[i] * gr[i] - mdh - hr[i] * mdhh);
        }
    }
    // Parameter grads reduce over the batch; each (c, i) owned by one thread.
#pragma omp parallel for schedule(static)
    for (int c = 0; c < C; ++c) {
        float* dgr = dgain + size_t(c) * L;
        float* dsr = dshift + size_t(c) * L;
        std::fill(dgr, dgr + L, 0.0f);
        std::fill(dsr, dsr + L, 0.0f);
        for (int b = 0; b < B; ++b) {
            const float* dyr = dy + (size_t(b) * C + c) * L;
            const float* hr = xhat + (size_t(b) * C + c) * L;
            for (int i = 0; i < L; ++i) {
                dgr[i] += dyr[i] * hr[i];
                dsr[i] += dyr[i];
            }
        }
    }
}

}  // namespace glove::kern

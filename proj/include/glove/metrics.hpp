#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>

#include "glove/data.hpp"

namespace glove {

// Rows are the true class, columns the prediction.
struct ConfusionMatrix {
    std::array<std::array<uint64_t, kNumClasses>, kNumClasses> counts{};

    void add(int truth, int pred);
    ConfusionMatrix& operator+=(const ConfusionMatrix& other);
    uint64_t total() const;
    uint64_t row_sum(int truth) const;
    uint64_t col_sum(int pred) const;
};

ConfusionMatrix confusion(std::span<const int> truth, std::span<const int> pred);

// Unweighted mean of per-class F1. Classes absent from both the truth and the
// predictions are left out of the mean; a class that appears but is never
// predicted correctly contributes 0.
double macro_f1(const ConfusionMatrix& m);

std::string to_csv(const ConfusionMatrix& m);

}  // namespace glove

#include "glove/metrics.hpp"

#include <sstream>

#include "glove/errors.hpp"

namespace glove {

void ConfusionMatrix::add(int truth, int pred) {
    if (truth < 0 || truth >= kNumClasses || pred < 0 || pred >= kNumClasses)
        throw DataError("class index out of range");
    ++counts[truth][pred];
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
    for (int i = 0; i < kNumClasses; ++i)
        for (int j = 0; j < kNumClasses; ++j) counts[i][j] += other.counts[i][j];
    return *this;
}

uint64_t ConfusionMatrix::total() const {
    uint64_t t = 0;
    for (const auto& row : counts)
        for (auto c : row) t += c;
    return t;
}

uint64_t ConfusionMatrix::row_sum(int truth) const {
    uint64_t t = 0;
    for (auto c : counts[truth]) t += c;
    return t;
}

uint64_t ConfusionMatrix::col_sum(int pred) const {
    uint64_t t = 0;
    for (const auto& row : counts) t += row[pred];
    return t;
}

ConfusionMatrix confusion(std::span<const int> truth,
                          std::span<const int> pred) {
    if (truth.size() != pred.size())
        throw DataError("truth/prediction length mismatch");
    ConfusionMatrix m;
    for (size_t i = 0; i < truth.size(); ++i) m.add(truth[i], pred[i]);
    return m;
}

double macro_f1(const ConfusionMatrix& m) {
    double sum = 0.0;
    int classes = 0;
    for (int c = 0; c < kNumClasses; ++c) {
        const uint64_t tp = m.counts[c][c];
        const uint64_t actual = m.row_sum(c);
        const uint64_t predicted = m.col_sum(c);
        if (actual == 0 && predicted == 0) continue;  // class never occurs
        ++classes;
        if (tp == 0) continue;  // precision+recall is 0 -> F1 contributes 0
        const double precision = double(tp) / double(predicted);
        const double recall = double(tp) / double(actual);
        sum += 2.0 * precision * recall / (precision + recall);
    }
    if (classes == 0) throw DataError("empty confusion matrix");
    return sum / double(classes);
}

std::string to_csv(const ConfusionMatrix& m) {
    std::ostringstream os;
    os << "true\\pred";
    for (int j = 0; j < kNumClasses; ++j) os << "," << kClassNames[j];
    os << "\n";
    for (int i = 0; i < kNumClasses; ++i) {
        os << kClassNames[i];
        for (int j = 0; j < kNumClasses; ++j) os << "," << m.counts[i][j];
        os << "\n";
    }
    return os.str();
}

}  // namespace glove

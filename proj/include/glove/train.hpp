#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "glove/nn.hpp"

namespace glove {

// AdaDelta update, per element:
//   E[g2]  <- rho*E[g2] + (1-rho)*g^2
//   delta  = -sqrt(E[d2]+eps)/sqrt(E[g2]+eps) * g
//   E[d2]  <- rho*E[d2] + (1-rho)*delta^2
//   p      += step_scale * delta
struct AdaDeltaConfig {
    float step_scale = 0.9f;
    float rho = 0.95f;
    float epsilon = 1e-7f;
};

class AdaDelta {
public:
    AdaDelta(const std::vector<ParamView>& params, AdaDeltaConfig cfg = {});
    void step(const std::vector<ParamView>& params,
              const std::vector<ParamView>& grads);
    const AdaDeltaConfig& config() const { return cfg_; }

private:
    AdaDeltaConfig cfg_;
    std::vector<std::vector<float>> eg2_, ed2_;
};

// Strict-improvement early stopping: stop once `patience` epochs have passed
// since the best metric. Epochs are 1-based.
class EarlyStopper {
public:
    explicit EarlyStopper(int patience) : patience_(patience) {}

    struct Verdict {
        bool improved = false;
        bool stop = false;
    };
    Verdict update(double metric, int epoch);

    int best_epoch() const { return best_epoch_; }
    double best_metric() const { return best_metric_; }

private:
    int patience_;
    int best_epoch_ = 0;
    double best_metric_ = -1.0;
};

struct TrainConfig {
    int max_epochs = 100;
    int batch_size = 32;
    int patience = 30;
    bool restore_best = true;
    uint64_t seed = 1;
    AdaDeltaConfig opt;
    bool verbose = false;
};

struct EpochStats {
    double train_loss = 0.0;
    double train_acc = 0.0;
    double val_acc = 0.0;
};

struct FitResult {
    ModelWeights weights;
    std::vector<EpochStats> history;
    int best_epoch = 0;  // 1-based epoch of the best monitored value
    double best_val_acc = 0.0;
    int epochs_run = 0;
};

// Trains from a fresh seeded init. Monitors validation accuracy (training
// accuracy when no validation set is given). With restore_best the returned
// weights are the snapshot from the best epoch. A single-class training set
// warns to stderr and proceeds; an empty one throws.
FitResult fit(const ModelSpec& m, std::span<const Tensor> x,
              std::span<const int> y, std::span<const Tensor> xval,
              std::span<const int> yval, const TrainConfig& cfg);

}  // namespace glove

#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "glove/data.hpp"
#include "glove/gate.hpp"
#include "glove/metrics.hpp"
#include "glove/smoothing.hpp"
#include "glove/synth.hpp"
#include "glove/train.hpp"

namespace glove {

struct EvalConfig {
    int window_len = 100;
    int step = 25;

    // threshold <= 0 means: calibrate per session from its first
    // `calib_frames` frames (mean + 3*stddev of movement scores).
    MovementDetectorConfig detector{.span = 6, .threshold = 0.0};
    int calib_frames = 50;

    PowerModel power{};
    SmoothingConfig smoothing{};
    bool apply_smoothing = true;

    TrainConfig inertial_train;                    // max_epochs 100
    TrainConfig capacitive_train = [] {            // max_epochs 200
        TrainConfig t;
        t.max_epochs = 200;
        return t;
    }();

    uint64_t seed = 1;
    bool verbose = false;
};

struct TrainedPair {
    ModelSpec inertial_spec, capacitive_spec;
    ModelWeights inertial_weights, capacitive_weights;
    FitResult inertial_fit, capacitive_fit;
};

// Trains both recognisers on the listed sessions. The last listed session is
// held out as the early-stopping validation split; the rest provide training
// windows.
TrainedPair train_models(const Dataset& d, std::span<const size_t> train_idx,
                         const EvalConfig& cfg);

// One labelled session pushed through the gated pipeline window by window.
struct SessionRun {
    std::vector<RecognitionEvent> events;
    std::vector<int> truth;      // majority frame label per window
    std::vector<int> predicted;  // gate decision per window
    double threshold = 0.0;      // detector threshold actually used
};
SessionRun run_session(const LabeledSession& s, const TrainedPair& models,
                       const EvalConfig& cfg);

struct FoldResult {
    std::string test_session;
    ConfusionMatrix raw, smoothed;
    double f1_raw = 0.0, f1_smoothed = 0.0;
    size_t windows = 0;
    size_t inertial_invocations = 0, capacitive_invocations = 0;
    double average_watts = 0.0, savings = 0.0;
    int inertial_epochs = 0, capacitive_epochs = 0;
    double threshold = 0.0;
    std::string error;  // non-empty when the fold failed
};

struct EvalReport {
    std::vector<FoldResult> folds;
    ConfusionMatrix total_raw, total_smoothed;
    double mean_f1_raw = 0.0, mean_f1_smoothed = 0.0;
    double mean_savings = 0.0, mean_watts = 0.0;
    int failed_folds = 0;
};

// Leave-one-session-out over the dataset. A failing fold is recorded and the
// remaining folds still run; only all folds failing is fatal.
EvalReport evaluate(const Dataset& d, const EvalConfig& cfg);

std::string report_json(const EvalReport& r, const EvalConfig& cfg);
void write_report(const EvalReport& r, const EvalConfig& cfg,
                  const std::filesystem::path& dir);

}  // namespace glove

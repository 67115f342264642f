#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "glove/data.hpp"

namespace glove {

// Synthetic glove recordings. Each session is a shuffled run of
// tries_per_gesture instances of all 8 gestures separated by idle stretches.
// A gesture instance contributes:
//   - a class-specific capacitance pulse (per-channel participation mask,
//     frequency and phase offsets, sin^2 envelope) over the labelled span;
//   - an acceleration burst offset into the gesture so that exactly the
//     windows whose majority label is the gesture have moving trailing
//     frames (the movement detector and the window labeller agree).
// All segment lengths are multiples of 25 frames so gesture starts stay on
// the default analysis grid.
struct SynthConfig {
    int sessions = 10;
    int tries_per_gesture = 4;
    int gesture_len = 100;
    int lead = 100;  // idle frames before the first gesture; the first 50
                     // double as the detector calibration segment
    int tail = 25;
    std::vector<int> gap_choices = {50, 75};
    double sample_hz = 50.0;

    float burst_amp = 1.0f;
    int burst_offset = 50;  // frames after gesture start
    int burst_len = 80;
    int burst_ramp = 15;
    float accel_noise = 0.02f;

    float cap_base = 1000.0f;
    float cap_base_step = 50.0f;
    float cap_amp = 250.0f;
    float cap_noise = 4.0f;

    void validate() const;  // throws ConfigError
};

// Noise-free capacitance pulse of one gesture class, (4, gesture_len),
// centred on zero (add cap_base per channel to get absolute readings).
Tensor gesture_template(const SynthConfig& cfg, int gesture);

LabeledSession synth_session(const SynthConfig& cfg, uint64_t seed,
                             std::string id);

// Session k gets id "session_<k>" and its own seed substream, so a dataset is
// a pure function of (cfg, seed).
Dataset synth_dataset(const SynthConfig& cfg, uint64_t seed);

}  // namespace glove

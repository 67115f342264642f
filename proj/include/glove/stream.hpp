#pragma once

#include <array>
#include <cstddef>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "glove/tensor.hpp"

namespace glove {

// One 50 Hz sample: three acceleration axes plus four capacitance channels
// (wrist, thumb, index, little).
struct SensorFrame {
    double t = 0.0;
    std::array<float, 3> accel{};
    std::array<float, 4> cap{};
};

enum class ChannelSet { Inertial3, Capacitive4 };

struct Window {
    ChannelSet channels = ChannelSet::Inertial3;
    size_t start_index = 0;  // frame index of the first sample
    bool normalized = false;
    Tensor data;
};

// Sliding window assembly: emits a window of `window_len` frames every `step`
// frames, i.e. window k spans frame indices [k*step, k*step + window_len).
class WindowBuffer {
public:
    explicit WindowBuffer(int window_len = 100, int step = 25);

    struct Slice {
        size_t start_index;
        std::vector<SensorFrame> frames;
    };

    // Returns a slice when this frame completes a window. Timestamps must be
    // strictly increasing; violations throw DataError.
    std::optional<Slice> push(const SensorFrame& f);

    size_t frames_seen() const { return count_; }
    size_t windows_emitted() const { return emitted_; }
    int window_len() const { return window_len_; }
    int step() const { return step_; }

private:
    int window_len_;
    int step_;
    std::deque<SensorFrame> buf_;
    size_t count_ = 0;
    size_t emitted_ = 0;
    double last_t_ = 0.0;
};

// Number of windows a batch of n frames yields: 0 if n < window_len, else
// (n - window_len) / step + 1.
size_t window_count(size_t n_frames, int window_len, int step);

// Extract one channel set from a frame slice as a (C, L) tensor.
Window make_window(const WindowBuffer::Slice& s, ChannelSet cs);
Window make_window(std::span<const SensorFrame> frames, size_t start_index,
                   ChannelSet cs);

// Per-channel min-max scaling to [0, 1]. Channels with range < 1e-8 become
// all zeros. Throws ConfigError if the window is already normalized and
// DataError on non-finite samples.
Window normalize_window(const Window& w);

// Sum of |ax|+|ay|+|az| over exactly `span` frames (throws DataError
// otherwise).
double movement_score(std::span<const SensorFrame> frames, int span = 6);

// Same score over the trailing `span` columns of an inertial window.
double movement_score_tail(const Window& w, int span = 6);

struct MovementDetectorConfig {
    int span = 6;
    double threshold = 1.0;
};

// Strictly-above test; a score exactly at threshold stays idle.
bool detect_movement(double score, const MovementDetectorConfig& cfg);

// mean + 3*stddev of movement scores over every `span`-length slice (stride
// 1) of a still segment. Needs at least `span` frames.
double calibrate_threshold(std::span<const SensorFrame> still, int span = 6);

}  // namespace glove

#include "glove/stream.hpp"

#include <cmath>
#include <limits>

#include "glove/errors.hpp"

namespace glove {

WindowBuffer::WindowBuffer(int window_len, int step)
    : window_len_(window_len), step_(step) {
    if (window_len <= 0 || step <= 0 || step > window_len)
        throw ConfigError("window_len/step must satisfy 0 < step <= window_len");
}

std::optional<WindowBuffer::Slice> WindowBuffer::push(const SensorFrame& f) {
    if (count_ > 0 && f.t <= last_t_)
        throw DataError("timestamps must be strictly increasing");
    last_t_ = f.t;
    buf_.push_back(f);
    ++count_;
    if (buf_.size() > size_t(window_len_)) buf_.pop_front();
    // Window k is complete when frame k*step + window_len - 1 arrives.
    if (count_ >= size_t(window_len_) &&
        (count_ - window_len_) % size_t(step_) == 0) {
        Slice s;
        s.start_index = count_ - window_len_;
        s.frames.assign(buf_.begin(), buf_.end());
        ++emitted_;
        return s;
    }
    return std::nullopt;
}

size_t window_count(size_t n_frames, int window_len, int step) {
    if (n_frames < size_t(window_len)) return 0;
    return (n_frames - window_len) / step + 1;
}

Window make_window(std::span<const SensorFrame> frames, size_t start_index,
                   ChannelSet cs) {
    const int L = int(frames.size());
    if (L == 0) throw DataError("empty frame slice");
    Window w;
    w.channels = cs;
    w.start_index = start_index;
    const int C = cs == ChannelSet::Inertial3 ? 3 : 4;
    w.data = Tensor(C, L);
    for (int i = 0; i < L; ++i) {
        if (cs == ChannelSet::Inertial3) {
            for (int c = 0; c < 3; ++c) w.data.at(c, i) = frames[i].accel[c];
        } else {
            for (int c = 0; c < 4; ++c) w.data.at(c, i) = frames[i].cap[c];
        }
    }
    return w;
}

Window make_window(const WindowBuffer::Slice& s, ChannelSet cs) {
    return make_window(s.frames, s.start_index, cs);
}

Window normalize_window(const Window& w) {
    if (w.normalized)
        throw ConfigError("window is already normalized");
    Window out = w;
    for (int c = 0; c < w.data.ch; ++c) {
        const float* src = w.data.row(c);
        float* dst = out.data.row(c);
        float lo = src[0], hi = src[0];
        for (int i = 0; i < w.data.len; ++i) {
            if (!std::isfinite(src[i]))
                throw DataError("non-finite sample in window");
            lo = std::min(lo, src[i]);
            hi = std::max(hi, src[i]);
        }
        const float range = hi - lo;
        if (range < 1e-8f) {
            for (int i = 0; i < w.data.len; ++i) dst[i] = 0.0f;
        } else {
            const float inv = 1.0f / range;
            for (int i = 0; i < w.data.len; ++i) dst[i] = (src[i] - lo) * inv;
        }
    }
    out.normalized = true;
    return out;
}

double movement_score(std::span<const SensorFrame> frames, int span) {
    if (int(frames.size()) != span)
        throw DataError("movement_score expects exactly span frames");
    double s = 0.0;
    for (const auto& f : frames)
        s += std::abs(f.accel[0]) + std::abs(f.accel[1]) + std::abs(f.accel[2]);
    return s;
}

double movement_score_tail(const Window& w, int span) {
    if (w.channels != ChannelSet::Inertial3)
        throw ConfigError("movement score needs an inertial window");
    if (w.normalized)
        throw ConfigError("movement score must see raw acceleration");
    if (w.data.len < span) throw DataError("window shorter than detector span");
    double s = 0.0;
    for (int i = w.data.len - span; i < w.data.len; ++i)
        for (int c = 0; c < 3; ++c) s += std::abs(double(w.data.at(c, i)));
    return s;
}

bool detect_movement(double score, const MovementDetectorConfig& cfg) {
    return score > cfg.threshold;
}

double calibrate_threshold(std::span<const SensorFrame> still, int span) {
    if (int(still.size()) < span)
        throw DataError("calibration segment shorter than detector span");
    std::vector<double> scores;
    scores.reserve(still.size() - span + 1);
    for (size_t i = 0; i + span <= still.size(); ++i)
        scores.push_back(movement_score(still.subspan(i, span), span));
    double mean = 0.0;
    for (double s : scores) mean += s;
    mean /= double(scores.size());
    double var = 0.0;
    for (double s : scores) var += (s - mean) * (s - mean);
    var /= double(scores.size());
    return mean + 3.0 * std::sqrt(var);
}

}  // namespace glove

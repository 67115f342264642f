#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "glove/stream.hpp"

namespace glove {

inline constexpr int kNumClasses = 9;
inline constexpr std::array<std::string_view, kNumClasses> kClassNames = {
    "null", "up", "down", "back", "forward", "land", "stop", "left", "right"};

inline constexpr double kSampleHz = 50.0;

// A recording: 50 Hz frames plus a per-frame label in [0, 9).
struct LabeledSession {
    std::string id;
    std::vector<SensorFrame> frames;
    std::vector<int> labels;
};

struct Dataset {
    std::vector<LabeledSession> sessions;  // sorted by id, ids unique
};

// CSV schema: header "t,ax,ay,az,c1,c2,c3,c4,label", one frame per row.
// Parse errors carry the 1-based line number.
LabeledSession read_session_csv(const std::filesystem::path& path);
void write_session_csv(const std::filesystem::path& path,
                       const LabeledSession& s);

// Loads every *.csv in the directory, sorted by filename.
Dataset load_dataset(const std::filesystem::path& dir);

struct LosoFold {
    std::vector<size_t> train;  // session indices
    size_t test = 0;
};
// One fold per session; needs >= 2 sessions.
std::vector<LosoFold> loso_folds(const Dataset& d);

// Majority frame label over [start, start+len); ties pick the smallest label.
int window_label(std::span<const int> labels, size_t start, int len);

// All sliding windows of a session as normalized model inputs with their
// 9-way labels. `gesture` holds the binary movement targets (label != 0).
struct SessionWindows {
    std::vector<Tensor> inertial;    // normalized (3, L)
    std::vector<Tensor> capacitive;  // normalized (4, L)
    std::vector<int> labels;         // 9-way
    std::vector<int> gesture;        // 0/1
    std::vector<size_t> starts;      // frame index per window
};
SessionWindows session_windows(const LabeledSession& s, int window_len,
                               int step);

}  // namespace glove

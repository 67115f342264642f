#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace glove {

// Fills short runs sandwiched between two equal labels: a run of length
// <= max_gap whose left and right neighbours carry the same label takes that
// label. Sweeps repeat until nothing changes, so the result is a fixpoint
// (applying it again is a no-op). max_gap = 0 disables it.
std::vector<int> gap_fill(std::span<const int> labels, int max_gap);

// Centered majority vote over k windows (k odd; throws ConfigError
// otherwise). Windows truncate at the edges. A tie keeps the original label.
std::vector<int> majority_smooth(std::span<const int> labels, int k);

struct SmoothingConfig {
    int max_gap = 1;
    int majority_k = 5;
};
// gap_fill then majority_smooth, each skipped when disabled (0 / k<=1).
std::vector<int> smooth_labels(std::span<const int> labels,
                               const SmoothingConfig& cfg);

// A maximal run of one label.
struct GestureEvent {
    int label = 0;
    size_t start = 0;  // window index of the first run member
    size_t end = 0;    // window index of the last run member (inclusive)
};

std::vector<GestureEvent> events_from_labels(std::span<const int> labels);
std::vector<int> expand_events(std::span<const GestureEvent> events);

}  // namespace glove

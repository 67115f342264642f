#include "glove/smoothing.hpp"

#include <algorithm>
#include <utility>

#include "glove/errors.hpp"

namespace glove {

std::vector<int> gap_fill(std::span<const int> labels, int max_gap) {
    if (max_gap < 0) throw ConfigError("max_gap must be >= 0");
    std::vector<int> out(labels.begin(), labels.end());
    if (max_gap == 0 || out.size() < 3) return out;
    bool changed = true;
    while (changed) {
        changed = false;
        size_t i = 0;
        while (i < out.size()) {
            size_t j = i;
            while (j + 1 < out.size() && out[j + 1] == out[i]) ++j;
            // run [i, j]; check the flanks
            if (i > 0 && j + 1 < out.size() && out[i - 1] == out[j + 1] &&
                out[i - 1] != out[i] && j - i + 1 <= size_t(max_gap)) {
                for (size_t k = i; k <= j; ++k) out[k] = out[i - 1];
                changed = true;
                // the merged run may now be a fillable neighbour; re-scan from
                // its start on the next sweep
            }
            i = j + 1;
        }
    }
    return out;
}

std::vector<int> majority_smooth(std::span<const int> labels, int k) {
    if (k <= 0 || k % 2 == 0)
        throw ConfigError("majority window must be a positive odd number");
    std::vector<int> out(labels.begin(), labels.end());
    if (k == 1 || labels.empty()) return out;
    const int half = k / 2;
    const int n = int(labels.size());
    std::vector<std::pair<int, int>> count;  // (label, occurrences)
    for (int i = 0; i < n; ++i) {
        count.clear();
        int lo = std::max(0, i - half), hi = std::min(n - 1, i + half);
        for (int j = lo; j <= hi; ++j) {
            auto it = std::find_if(count.begin(), count.end(),
                                   [&](auto& p) { return p.first == labels[j]; });
            if (it == count.end())
                count.emplace_back(labels[j], 1);
            else
                ++it->second;
        }
        int best = labels[i], best_n = 0;
        bool tie = false;
        for (auto& [label, c] : count) {
            if (c > best_n) {
                best_n = c;
                best = label;
                tie = false;
            } else if (c == best_n) {
                tie = true;
            }
        }
        out[i] = tie ? labels[i] : best;
    }
    return out;
}

std::vector<int> smooth_labels(std::span<const int> labels,
                               const SmoothingConfig& cfg) {
    std::vector<int> out = gap_fill(labels, cfg.max_gap);
    if (cfg.majority_k > 1) out = majority_smooth(out, cfg.majority_k);
    return out;
}

std::vector<GestureEvent> events_from_labels(std::span<const int> labels) {
    std::vector<GestureEvent> events;
    size_t i = 0;
    while (i < labels.size()) {
        size_t j = i;
        while (j + 1 < labels.size() && labels[j + 1] == labels[i]) ++j;
        events.push_back({labels[i], i, j});
        i = j + 1;
    }
    return events;
}

std::vector<int> expand_events(std::span<const GestureEvent> events) {
    std::vector<int> out;
    size_t expect = 0;
    for (const auto& e : events) {
        if (e.start != expect || e.end < e.start)
            throw DataError("event list is not contiguous");
        for (size_t i = e.start; i <= e.end; ++i) out.push_back(e.label);
        expect = e.end + 1;
    }
    return out;
}

}  // namespace glove

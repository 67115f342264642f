#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "glove/nn.hpp"
#include "glove/stream.hpp"

namespace glove {

// Pipeline stage reached for a window. Idle means only the movement detector
// ran; InertialActive adds the small null/gesture net; CapacitiveActive adds
// the 9-way classifier.
enum class Stage { Idle, InertialActive, CapacitiveActive };

std::string_view stage_name(Stage s);
Stage stage_from_name(std::string_view s);

struct PowerModel {
    double idle_watts = 0.84;
    double inertial_watts = 0.94;
    double full_watts = 1.15;
    double watts(Stage s) const;
    void validate() const;  // throws ConfigError unless idle <= inertial <= full
};

struct RecognitionEvent {
    size_t window_start = 0;  // frame index of the window's first sample
    int label = 0;            // 0 = null, 1..8 = gestures
    float confidence = 1.0f;  // softmax mass behind the decision, 1 when gated off
    Stage stage = Stage::Idle;
    double power_watts = 0.0;
};

std::string format_event_line(const RecognitionEvent& e);
RecognitionEvent parse_event_line(std::string_view line);  // throws DataError

// Hierarchical gating over one window pair:
//   movement detector (raw inertial tail) -> inertial net (null/gesture on the
//   normalized inertial window) -> capacitive net (9-way on the normalized
//   capacitance window). Later stages only run when the earlier one fires, so
//   an idle stretch never pays for a model inference.
class FusionGate {
public:
    FusionGate(const ModelSpec& inertial, const ModelWeights& inertial_w,
               const ModelSpec& capacitive, const ModelWeights& capacitive_w,
               MovementDetectorConfig detector, PowerModel power);

    // Windows must be raw (unnormalized) and aligned: same start index.
    RecognitionEvent step(const Window& inertial_win, const Window& cap_win);

    size_t inertial_invocations() const { return inertial_runs_; }
    size_t capacitive_invocations() const { return capacitive_runs_; }
    size_t windows_seen() const { return windows_; }
    double average_watts() const;
    const MovementDetectorConfig& detector() const { return detector_; }

private:
    const ModelSpec& ispec_;
    const ModelWeights& iw_;
    const ModelSpec& cspec_;
    const ModelWeights& cw_;
    MovementDetectorConfig detector_;
    PowerModel power_;
    size_t inertial_runs_ = 0;
    size_t capacitive_runs_ = 0;
    size_t windows_ = 0;
    double watt_sum_ = 0.0;
};

// Energy for a piecewise-constant stage timeline: (seconds, stage) segments.
struct EnergySummary {
    double joules = 0.0;
    double average_watts = 0.0;
};
EnergySummary session_energy(std::span<const std::pair<double, Stage>> segments,
                             const PowerModel& power);

// Fraction of power saved versus running the full pipeline for every window:
// 1 - mean(event watts) / full_watts.
double gating_savings(std::span<const RecognitionEvent> events,
                      const PowerModel& power);

}  // namespace glove

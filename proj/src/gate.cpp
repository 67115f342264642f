#include "glove/gate.hpp"

#include <charconv>
#include <cstdio>

#include "glove/errors.hpp"

namespace glove {

std::string_view stage_name(Stage s) {
    switch (s) {
        case Stage::Idle: return "idle";
        case Stage::InertialActive: return "inertial";
        case Stage::CapacitiveActive: return "full";
    }
    return "?";
}

Stage stage_from_name(std::string_view s) {
    if (s == "idle") return Stage::Idle;
    if (s == "inertial") return Stage::InertialActive;
    if (s == "full") return Stage::CapacitiveActive;
    throw DataError("unknown stage: " + std::string(s));
}

double PowerModel::watts(Stage s) const {
    switch (s) {
        case Stage::Idle: return idle_watts;
        case Stage::InertialActive: return inertial_watts;
        case Stage::CapacitiveActive: return full_watts;
    }
    return full_watts;
}

void PowerModel::validate() const {
    if (!(idle_watts > 0.0) || !(idle_watts <= inertial_watts) ||
        !(inertial_watts <= full_watts))
        throw ConfigError("power model must satisfy 0 < idle <= inertial <= full");
}

std::string format_event_line(const RecognitionEvent& e) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%zu\t%d\t%.6f\t%s\t%.3f", e.window_start,
                  e.label, double(e.confidence),
                  std::string(stage_name(e.stage)).c_str(), e.power_watts);
    return buf;
}

RecognitionEvent parse_event_line(std::string_view line) {
    std::vector<std::string_view> cols;
    size_t at = 0;
    while (at <= line.size()) {
        size_t tab = line.find('\t', at);
        if (tab == std::string_view::npos) {
            cols.push_back(line.substr(at));
            break;
        }
        cols.push_back(line.substr(at, tab - at));
        at = tab + 1;
    }
    if (cols.size() != 5) throw DataError("event line needs 5 tab-separated fields");
    RecognitionEvent e;
    auto parse_err = [&](const char* what) {
        return DataError(std::string("bad event field: ") + what);
    };
    {
        auto [p, ec] = std::from_chars(cols[0].begin(), cols[0].end(), e.window_start);
        if (ec != std::errc{} || p != cols[0].end()) throw parse_err("window start");
    }
    {
        auto [p, ec] = std::from_chars(cols[1].begin(), cols[1].end(), e.label);
        if (ec != std::errc{} || p != cols[1].end()) throw parse_err("label");
    }
    try {
        e.confidence = std::stof(std::string(cols[2]));
        e.power_watts = std::stod(std::string(cols[4]));
    } catch (const std::exception&) {
        throw parse_err("confidence/power");
    }
    e.stage = stage_from_name(cols[3]);
    if (e.label < 0 || e.label > 8) throw parse_err("label range");
    return e;
}

FusionGate::FusionGate(const ModelSpec& inertial, const ModelWeights& inertial_w,
                       const ModelSpec& capacitive,
                       const ModelWeights& capacitive_w,
                       MovementDetectorConfig detector, PowerModel power)
    : ispec_(inertial),
      iw_(inertial_w),
      cspec_(capacitive),
      cw_(capacitive_w),
      detector_(detector),
      power_(power) {
    power_.validate();
    if (detector_.span <= 0) throw ConfigError("detector span must be positive");
    auto ichain = shape_chain(ispec_);
    auto cchain = shape_chain(cspec_);
    if (ispec_.in_ch != 3 || ichain.back().ch != 2)
        throw ConfigError("inertial model must map 3 channels to 2 classes");
    if (cspec_.in_ch != 4 || cchain.back().ch != 9)
        throw ConfigError("capacitive model must map 4 channels to 9 classes");
}

RecognitionEvent FusionGate::step(const Window& inertial_win,
                                  const Window& cap_win) {
    if (inertial_win.channels != ChannelSet::Inertial3 ||
        cap_win.channels != ChannelSet::Capacitive4)
        throw ConfigError("gate expects (inertial, capacitive) windows");
    if (inertial_win.start_index != cap_win.start_index)
        throw ConfigError("gate windows are not aligned");
    if (inertial_win.normalized || cap_win.normalized)
        throw ConfigError("gate expects raw windows");

    RecognitionEvent e;
    e.window_start = inertial_win.start_index;

    const double score = movement_score_tail(inertial_win, detector_.span);
    if (!detect_movement(score, detector_)) {
        e.label = 0;
        e.confidence = 1.0f;
        e.stage = Stage::Idle;
    } else {
        ++inertial_runs_;
        auto p2 = model_forward(ispec_, iw_, normalize_window(inertial_win).data);
        if (p2[1] > p2[0]) {
            ++capacitive_runs_;
            auto p9 = model_forward(cspec_, cw_, normalize_window(cap_win).data);
            int best = 0;
            for (int i = 1; i < int(p9.size()); ++i)
                if (p9[i] > p9[best]) best = i;
            e.label = best;
            e.confidence = p9[best];
            e.stage = Stage::CapacitiveActive;
        } else {
            e.label = 0;
            e.confidence = p2[0];
            e.stage = Stage::InertialActive;
        }
    }
    e.power_watts = power_.watts(e.stage);
    ++windows_;
    watt_sum_ += e.power_watts;
    return e;
}

double FusionGate::average_watts() const {
    return windows_ == 0 ? 0.0 : watt_sum_ / double(windows_);
}

EnergySummary session_energy(std::span<const std::pair<double, Stage>> segments,
                             const PowerModel& power) {
    if (segments.empty()) throw DataError("no timeline segments");
    EnergySummary s;
    double seconds = 0.0;
    for (const auto& [dur, stage] : segments) {
        if (dur < 0.0) throw DataError("negative segment duration");
        s.joules += dur * power.watts(stage);
        seconds += dur;
    }
    if (seconds <= 0.0) throw DataError("timeline has zero duration");
    s.average_watts = s.joules / seconds;
    return s;
}

double gating_savings(std::span<const RecognitionEvent> events,
                      const PowerModel& power) {
    if (events.empty()) throw DataError("no events");
    double sum = 0.0;
    for (const auto& e : events) sum += e.power_watts;
    return 1.0 - (sum / double(events.size())) / power.full_watts;
}

}  // namespace glove

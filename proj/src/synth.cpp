#include "glove/synth.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

#include "glove/errors.hpp"
#include "glove/rng.hpp"

namespace glove {
namespace {

// Channel participation per gesture (wrist, thumb, index, little).
constexpr int kMask[8][4] = {
    {1, 1, 0, 0}, {1, 0, 1, 0}, {1, 0, 0, 1}, {0, 1, 1, 0},
    {0, 1, 0, 1}, {0, 0, 1, 1}, {1, 1, 1, 0}, {0, 1, 1, 1},
};

double pulse(int gesture, int channel, double u) {
    const double freq = 1.0 + 0.5 * double((gesture - 1) % 4);
    const double phase = channel * (std::numbers::pi / 2.0) +
                         (gesture - 1) * (std::numbers::pi / 8.0);
    const double env = std::sin(std::numbers::pi * u);
    return env * env * std::sin(2.0 * std::numbers::pi * freq * u + phase);
}

double burst_envelope(int j, int len, int ramp) {
    double e = 1.0;
    if (j < ramp) e = double(j + 1) / double(ramp);
    if (j >= len - ramp) e = std::min(e, double(len - j) / double(ramp));
    return e;
}

}  // namespace

void SynthConfig::validate() const {
    if (sessions < 1) throw ConfigError("sessions must be >= 1");
    if (tries_per_gesture < 1) throw ConfigError("tries_per_gesture must be >= 1");
    if (gesture_len < 2) throw ConfigError("gesture_len must be >= 2");
    if (lead < 0 || tail < 0) throw ConfigError("lead/tail must be >= 0");
    if (gap_choices.empty()) throw ConfigError("gap_choices must not be empty");
    for (int g : gap_choices)
        if (g < 0) throw ConfigError("gaps must be >= 0");
    if (sample_hz <= 0.0) throw ConfigError("sample_hz must be positive");
    if (burst_len < 1 || burst_offset < 0)
        throw ConfigError("burst placement must be non-negative");
    if (burst_ramp < 1 || 2 * burst_ramp > burst_len)
        throw ConfigError("burst_ramp must satisfy 1 <= ramp <= burst_len/2");
    if (burst_amp <= 0.0f || cap_amp <= 0.0f)
        throw ConfigError("signal amplitudes must be positive");
    if (accel_noise < 0.0f || cap_noise < 0.0f)
        throw ConfigError("noise levels must be >= 0");
}

Tensor gesture_template(const SynthConfig& cfg, int gesture) {
    cfg.validate();
    if (gesture < 1 || gesture > 8)
        throw ConfigError("gesture class must be in [1, 8]");
    Tensor t(4, cfg.gesture_len);
    for (int c = 0; c < 4; ++c) {
        if (!kMask[gesture - 1][c]) continue;
        for (int i = 0; i < cfg.gesture_len; ++i) {
            double u = double(i) / double(cfg.gesture_len);
            t.at(c, i) = float(cfg.cap_amp * pulse(gesture, c, u));
        }
    }
    return t;
}

LabeledSession synth_session(const SynthConfig& cfg, uint64_t seed,
                             std::string id) {
    cfg.validate();
    Rng rng(seed);

    // Instance order and gap sizes first, so the layout is fixed before any
    // noise is drawn.
    std::vector<int> order;
    for (int g = 1; g <= 8; ++g)
        for (int t = 0; t < cfg.tries_per_gesture; ++t) order.push_back(g);
    rng.shuffle(order);
    std::vector<int> gaps(order.size() > 0 ? order.size() - 1 : 0);
    for (auto& g : gaps)
        g = cfg.gap_choices[size_t(rng.below(cfg.gap_choices.size()))];

    std::vector<size_t> starts;
    size_t total = size_t(cfg.lead);
    for (size_t k = 0; k < order.size(); ++k) {
        starts.push_back(total);
        total += size_t(cfg.gesture_len);
        total += k + 1 < order.size() ? size_t(gaps[k]) : size_t(cfg.tail);
    }

    LabeledSession s;
    s.id = std::move(id);
    s.frames.resize(total);
    s.labels.assign(total, 0);

    // Idle baseline + noise, in frame order.
    for (size_t i = 0; i < total; ++i) {
        auto& fr = s.frames[i];
        fr.t = double(i) / cfg.sample_hz;
        for (int a = 0; a < 3; ++a)
            fr.accel[a] = float(rng.gaussian(0.0, cfg.accel_noise));
        for (int c = 0; c < 4; ++c)
            fr.cap[c] = float(rng.gaussian(
                cfg.cap_base + c * cfg.cap_base_step, cfg.cap_noise));
    }

    for (size_t k = 0; k < order.size(); ++k) {
        const int g = order[k];
        const size_t G = starts[k];
        for (int i = 0; i < cfg.gesture_len; ++i) {
            s.labels[G + i] = g;
            const double u = double(i) / double(cfg.gesture_len);
            for (int c = 0; c < 4; ++c)
                if (kMask[g - 1][c])
                    s.frames[G + i].cap[c] +=
                        float(cfg.cap_amp * pulse(g, c, u));
        }
        const size_t bstart = G + size_t(cfg.burst_offset);
        for (int j = 0; j < cfg.burst_len; ++j) {
            const size_t at = bstart + size_t(j);
            if (at >= total) break;
            const double u = double(j) / double(cfg.burst_len);
            const double e = cfg.burst_amp * burst_envelope(j, cfg.burst_len,
                                                            cfg.burst_ramp);
            auto& fr = s.frames[at];
            fr.accel[0] += float(e * std::sin(2.0 * std::numbers::pi * 3.0 * u + 0.3));
            fr.accel[1] += float(e * std::sin(2.0 * std::numbers::pi * 2.0 * u + 1.1));
            fr.accel[2] += float(e * std::sin(2.0 * std::numbers::pi * 2.5 * u + 2.0));
        }
    }
    return s;
}

Dataset synth_dataset(const SynthConfig& cfg, uint64_t seed) {
    cfg.validate();
    Rng master(seed);
    Dataset d;
    for (int k = 0; k < cfg.sessions; ++k) {
        char name[32];
        std::snprintf(name, sizeof name, "session_%02d", k);
        d.sessions.push_back(synth_session(cfg, master.next_u64(), name));
    }
    return d;
}

}  // namespace glove

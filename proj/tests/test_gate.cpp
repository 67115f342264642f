#include <doctest.h>

#include <cmath>
#include <utility>
#include <vector>

#include "glove/errors.hpp"
#include "glove/gate.hpp"
#include "glove/nn.hpp"
#include "glove/rng.hpp"
#include "glove/stream.hpp"

using namespace glove;

namespace {

std::vector<SensorFrame> frames_with_tail_accel(float tail_accel) {
    std::vector<SensorFrame> fs(100);
    for (size_t i = 0; i < 100; ++i) {
        fs[i].t = double(i) / 50.0;
        fs[i].accel = {0.0f, 0.0f, 0.0f};
        fs[i].cap = {1000.0f + float(i % 5), 1050.0f - float(i % 3),
                     1100.0f + float(i % 7), 1200.0f};
    }
    for (size_t i = 94; i < 100; ++i)
        fs[i].accel = {tail_accel, tail_accel, tail_accel};
    return fs;
}

struct Rig {
    ModelSpec ispec = build_inertial_model();
    ModelSpec cspec = build_capacitive_model();
    ModelWeights iw, cw;

    // force the 2-way head: fire=true means every moving window is called a
    // gesture, fire=false means the small net always says null
    Rig(bool fire, int cap_label = 3) {
        Rng ri(1), rc(2);
        iw = init_weights(ispec, ri);
        cw = init_weights(cspec, rc);
        auto& ibias = iw.layers[ispec.layers.size() - 2].tensors[1];
        ibias[0] = fire ? -12.0f : 12.0f;
        ibias[1] = fire ? 12.0f : -12.0f;
        auto& cbias = cw.layers[cspec.layers.size() - 2].tensors[1];
        for (auto& b : cbias) b = -12.0f;
        cbias[cap_label] = 12.0f;
    }
};

}  // namespace

TEST_CASE("power model") {
    PowerModel p;
    CHECK(p.watts(Stage::Idle) == 0.84);
    CHECK(p.watts(Stage::InertialActive) == 0.94);
    CHECK(p.watts(Stage::CapacitiveActive) == 1.15);
    CHECK_NOTHROW(p.validate());

    PowerModel bad{.idle_watts = 1.2, .inertial_watts = 0.9, .full_watts = 1.15};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    PowerModel zero{.idle_watts = 0.0};
    CHECK_THROWS_AS(zero.validate(), ConfigError);
}

TEST_CASE("stage names round-trip") {
    for (Stage s : {Stage::Idle, Stage::InertialActive, Stage::CapacitiveActive})
        CHECK(stage_from_name(stage_name(s)) == s);
    CHECK(stage_name(Stage::CapacitiveActive) == "full");
    CHECK_THROWS_AS(stage_from_name("sleepy"), DataError);
}

TEST_CASE("session energy and savings arithmetic") {
    PowerModel p;
    // 10 s fully idle
    std::vector<std::pair<double, Stage>> idle10 = {{10.0, Stage::Idle}};
    auto e = session_energy(idle10, p);
    CHECK(e.joules == doctest::Approx(8.4));
    CHECK(e.average_watts == doctest::Approx(0.84));

    // mixed timeline: 5 s idle + 3 s inertial + 2 s full
    std::vector<std::pair<double, Stage>> mixed = {
        {5.0, Stage::Idle}, {3.0, Stage::InertialActive},
        {2.0, Stage::CapacitiveActive}};
    auto em = session_energy(mixed, p);
    CHECK(em.joules == doctest::Approx(5 * 0.84 + 3 * 0.94 + 2 * 1.15));
    CHECK(em.average_watts == doctest::Approx(em.joules / 10.0));

    std::vector<std::pair<double, Stage>> none;
    CHECK_THROWS_AS(session_energy(none, p), DataError);
    std::vector<std::pair<double, Stage>> neg = {{-1.0, Stage::Idle}};
    CHECK_THROWS_AS(session_energy(neg, p), DataError);
}

TEST_CASE("idle-dominated streams approach the 27% power ceiling") {
    PowerModel p;
    auto ev = [&](Stage s) {
        RecognitionEvent e;
        e.stage = s;
        e.power_watts = p.watts(s);
        return e;
    };
    std::vector<RecognitionEvent> all_idle(40, ev(Stage::Idle));
    CHECK(gating_savings(all_idle, p) ==
          doctest::Approx(1.0 - 0.84 / 1.15).epsilon(1e-9));
    CHECK(gating_savings(all_idle, p) == doctest::Approx(0.2696).epsilon(1e-3));

    // 50% idle, 25% inertial, 25% full -> mean 0.9425 W
    std::vector<RecognitionEvent> mixed;
    for (int i = 0; i < 2; ++i) mixed.push_back(ev(Stage::Idle));
    mixed.push_back(ev(Stage::InertialActive));
    mixed.push_back(ev(Stage::CapacitiveActive));
    double mean = (2 * 0.84 + 0.94 + 1.15) / 4.0;
    CHECK(mean == doctest::Approx(0.9425));
    CHECK(gating_savings(mixed, p) == doctest::Approx(1.0 - mean / 1.15));

    std::vector<RecognitionEvent> all_full(8, ev(Stage::CapacitiveActive));
    CHECK(gating_savings(all_full, p) == doctest::Approx(0.0));
}

TEST_CASE("event lines round-trip and reject malformed input") {
    RecognitionEvent e;
    e.window_start = 1250;
    e.label = 7;
    e.confidence = 0.874512f;
    e.stage = Stage::CapacitiveActive;
    e.power_watts = 1.15;
    auto line = format_event_line(e);
    CHECK(line == "1250\t7\t0.874512\tfull\t1.150");
    auto r = parse_event_line(line);
    CHECK(r.window_start == e.window_start);
    CHECK(r.label == e.label);
    CHECK(r.confidence == doctest::Approx(e.confidence).epsilon(1e-6));
    CHECK(r.stage == e.stage);
    CHECK(r.power_watts == doctest::Approx(e.power_watts).epsilon(1e-6));

    CHECK_THROWS_AS(parse_event_line("1250\t7\t0.8"), DataError);
    CHECK_THROWS_AS(parse_event_line("x\t7\t0.8\tfull\t1.15"), DataError);
    CHECK_THROWS_AS(parse_event_line("0\t9\t0.8\tfull\t1.15"), DataError);
    CHECK_THROWS_AS(parse_event_line("0\t2\t0.8\tnap\t1.15"), DataError);
    CHECK_THROWS_AS(parse_event_line(""), DataError);
}

TEST_CASE("still windows never wake the models") {
    Rig rig(true);
    FusionGate gate(rig.ispec, rig.iw, rig.cspec, rig.cw,
                    {.span = 6, .threshold = 1.0}, {});

    auto fs = frames_with_tail_accel(0.0f);
    auto iw = make_window(fs, 0, ChannelSet::Inertial3);
    auto cw = make_window(fs, 0, ChannelSet::Capacitive4);
    for (int k = 0; k < 10; ++k) {
        auto e = gate.step(iw, cw);
        CHECK(e.stage == Stage::Idle);
        CHECK(e.label == 0);
        CHECK(e.confidence == 1.0f);
        CHECK(e.power_watts == 0.84);
    }
    CHECK(gate.windows_seen() == 10);
    CHECK(gate.inertial_invocations() == 0);
    CHECK(gate.capacitive_invocations() == 0);
    CHECK(gate.average_watts() == doctest::Approx(0.84));
}

TEST_CASE("a null verdict from the small net keeps the classifier asleep") {
    Rig rig(false);
    FusionGate gate(rig.ispec, rig.iw, rig.cspec, rig.cw,
                    {.span = 6, .threshold = 1.0}, {});
    auto fs = frames_with_tail_accel(1.0f);  // tail score 18 > 1
    auto iw = make_window(fs, 0, ChannelSet::Inertial3);
    auto cw = make_window(fs, 0, ChannelSet::Capacitive4);
    for (int k = 0; k < 4; ++k) {
        auto e = gate.step(iw, cw);
        CHECK(e.stage == Stage::InertialActive);
        CHECK(e.label == 0);
        CHECK(e.power_watts == 0.94);
        CHECK(e.confidence > 0.5f);
    }
    CHECK(gate.inertial_invocations() == 4);
    CHECK(gate.capacitive_invocations() == 0);
}

TEST_CASE("a gesture verdict escalates to the 9-way classifier") {
    Rig rig(true, 5);
    FusionGate gate(rig.ispec, rig.iw, rig.cspec, rig.cw,
                    {.span = 6, .threshold = 1.0}, {});
    auto fs = frames_with_tail_accel(1.0f);
    auto iw = make_window(fs, 25, ChannelSet::Inertial3);
    auto cw = make_window(fs, 25, ChannelSet::Capacitive4);
    auto e = gate.step(iw, cw);
    CHECK(e.stage == Stage::CapacitiveActive);
    CHECK(e.label == 5);
    CHECK(e.power_watts == 1.15);
    CHECK(e.window_start == 25);
    CHECK(e.confidence > 0.9f);
    CHECK(gate.inertial_invocations() == 1);
    CHECK(gate.capacitive_invocations() == 1);

    // mixed traffic accumulates the right average power
    auto still = frames_with_tail_accel(0.0f);
    gate.step(make_window(still, 50, ChannelSet::Inertial3),
              make_window(still, 50, ChannelSet::Capacitive4));
    CHECK(gate.average_watts() == doctest::Approx((1.15 + 0.84) / 2.0));
}

TEST_CASE("gate rejects misuse") {
    Rig rig(true);
    FusionGate gate(rig.ispec, rig.iw, rig.cspec, rig.cw,
                    {.span = 6, .threshold = 1.0}, {});
    auto fs = frames_with_tail_accel(0.0f);
    auto iw = make_window(fs, 0, ChannelSet::Inertial3);
    auto cw = make_window(fs, 0, ChannelSet::Capacitive4);

    auto cw_off = make_window(fs, 25, ChannelSet::Capacitive4);
    CHECK_THROWS_AS(gate.step(iw, cw_off), ConfigError);      // misaligned
    CHECK_THROWS_AS(gate.step(cw, iw), ConfigError);          // swapped sets
    CHECK_THROWS_AS(gate.step(normalize_window(iw), cw), ConfigError);

    // wrong head shapes are rejected at construction
    CHECK_THROWS_AS(FusionGate(rig.cspec, rig.cw, rig.cspec, rig.cw,
                               {.span = 6, .threshold = 1.0}, {}),
                    ConfigError);
    PowerModel bad{.idle_watts = 2.0, .inertial_watts = 0.9, .full_watts = 1.0};
    CHECK_THROWS_AS(FusionGate(rig.ispec, rig.iw, rig.cspec, rig.cw,
                               {.span = 6, .threshold = 1.0}, bad),
                    ConfigError);
}
